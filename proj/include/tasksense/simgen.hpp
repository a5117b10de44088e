#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tasksense/core.hpp"
#include "tasksense/detail/random.hpp"
#include "tasksense/errors.hpp"
#include "tasksense/timeline.hpp"

namespace tasksense {

// Per-task generator parameters: channel means plus Gaussian noise widths
// for the signal and for the task duration.
struct TaskProfile {
  TaskLabel label = TaskLabel::ScionCutting;
  std::map<ChannelId, double> centroid;
  double channel_sigma = 0.3;
  double duration_mean = 1.0;   // seconds
  double duration_sigma = 0.1;  // seconds

  void validate() const {
    if (!(channel_sigma > 0.0))
      raise(errc::bad_config, "channel_sigma must be positive");
    if (!(duration_mean > 0.0))
      raise(errc::bad_config, "duration_mean must be positive");
    // zero is meaningful: deterministic durations, exactly duration_mean
    if (!(duration_sigma >= 0.0))
      raise(errc::bad_config, "duration_sigma must be non-negative");
  }
};

// One grafting cycle: the ordered task sequence and the frame cadence.
struct CyclePlan {
  std::vector<TaskLabel> tasks{TaskLabel::ScionCutting, TaskLabel::RootstockCutting,
                               TaskLabel::RootstockClipping, TaskLabel::Joining};
  Timestamp frame_period = 2;  // ticks between frames
  double tick_seconds = 0.01;  // tick -> seconds

  void validate() const {
    if (tasks.empty()) raise(errc::bad_config, "cycle plan needs at least one task");
    if (frame_period <= 0) raise(errc::bad_config, "frame_period must be positive");
    if (!(tick_seconds > 0.0)) raise(errc::bad_config, "tick_seconds must be positive");
  }
};

// The five channels whose per-task means the reference tables publish.
inline ChannelSchema default_schema() {
  return ChannelSchema(
      {"RING3.Z", "INDEX1.Z", "INDEX2.Z", "MIDDLE1.X", "LITTLE2.Z"});
}

// Reference operating point: per-task channel means over the default schema
// plus typical observed durations. channel_sigma=0.3 is a calibration
// constant (it places the end-to-end pipeline near its nominal accuracy),
// not a measured value.
inline std::map<TaskLabel, TaskProfile> default_profiles() {
  auto mk = [](TaskLabel l, std::vector<double> v, double dur) {
    TaskProfile p;
    p.label = l;
    const auto schema = default_schema();
    for (std::size_t i = 0; i < schema.size(); ++i) p.centroid[schema.name(i)] = v[i];
    p.duration_mean = dur;
    return p;
  };
  std::map<TaskLabel, TaskProfile> out;
  out[TaskLabel::ScionCutting] =
      mk(TaskLabel::ScionCutting, {1.167, 0.430, 0.634, -2.062, 1.093}, 4.2);
  out[TaskLabel::RootstockCutting] =
      mk(TaskLabel::RootstockCutting, {3.293, 2.059, 2.816, 0.480, 2.723}, 2.7);
  out[TaskLabel::RootstockClipping] =
      mk(TaskLabel::RootstockClipping, {3.612, 2.400, 3.400, -0.355, 2.805}, 3.4);
  out[TaskLabel::Joining] =
      mk(TaskLabel::Joining, {2.800, 2.022, 2.822, -0.820, 2.133}, 13.0);
  return out;
}

// Seeded labeled frames at a fixed cadence: profile channels draw from
// Normal(centroid, channel_sigma^2); schema channels the profile does not
// name draw from Normal(0, channel_sigma^2).
inline std::vector<LabeledSample> gen_frames(const TaskProfile& profile,
                                             const ChannelSchema& schema,
                                             std::size_t count, std::uint64_t seed,
                                             Timestamp start_ts = 0,
                                             Timestamp period = 2) {
  profile.validate();
  if (period <= 0) raise(errc::bad_config, "frame period must be positive");

  std::vector<double> means(schema.size(), 0.0);
  for (const auto& [ch, mean] : profile.centroid) {
    const auto idx = schema.index_of(ch);
    if (idx) means[*idx] = mean;
  }

  detail::Rng rng(seed);
  std::vector<LabeledSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SensorFrame frame;
    frame.ts = start_ts + static_cast<Timestamp>(i) * period;
    frame.values.reserve(schema.size());
    for (double m : means)
      frame.values.push_back(m + profile.channel_sigma * rng.gaussian());
    out.push_back(LabeledSample{std::move(frame), profile.label,
                                Provenance::Historical});
  }
  return out;
}

struct SimStream {
  std::vector<LabeledSample> frames;
  std::vector<TaskEvent> truth;  // aligned with the frame labels
};

namespace detail {

inline std::size_t frames_for_duration(double duration_seconds,
                                       double frame_seconds) {
  const auto n = static_cast<std::size_t>(
      std::llround(duration_seconds / frame_seconds));
  return std::max<std::size_t>(n, 1);  // floor at one frame
}

}  // namespace detail

// Full grafting cycles with ground truth. Each task run lasts a seeded
// Normal(duration_mean, duration_sigma^2) stretch, never shorter than one
// frame. Truth events carry the known end of every run, including the last.
inline SimStream gen_cycles(const CyclePlan& plan,
                            const std::map<TaskLabel, TaskProfile>& profiles,
                            std::size_t n_cycles, std::uint64_t seed,
                            Timestamp start_ts = 0) {
  plan.validate();
  if (n_cycles < 1) raise(errc::bad_config, "need at least one cycle");
  for (TaskLabel task : plan.tasks)
    if (!profiles.count(task))
      raise(errc::missing_profile, "no profile for " + to_string(task));
  for (const auto& [task, profile] : profiles) profile.validate();

  const ChannelSchema schema = default_schema();
  const double frame_seconds =
      static_cast<double>(plan.frame_period) * plan.tick_seconds;

  detail::Rng rng(seed);
  SimStream sim;
  Timestamp ts = start_ts;
  std::uint64_t frame_index = 0;
  for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
    for (TaskLabel task : plan.tasks) {
      const TaskProfile& profile = profiles.at(task);
      const double duration =
          profile.duration_mean + profile.duration_sigma * rng.gaussian();
      const std::size_t n_frames =
          detail::frames_for_duration(std::max(duration, frame_seconds),
                                      frame_seconds);

      TaskEvent event;
      event.label = task;
      event.start_id = frame_index;
      event.start_ts = ts;

      std::vector<double> means(schema.size(), 0.0);
      for (const auto& [ch, mean] : profile.centroid) {
        const auto idx = schema.index_of(ch);
        if (idx) means[*idx] = mean;
      }
      for (std::size_t i = 0; i < n_frames; ++i) {
        SensorFrame frame;
        frame.ts = ts;
        frame.values.reserve(schema.size());
        for (double m : means)
          frame.values.push_back(m + profile.channel_sigma * rng.gaussian());
        sim.frames.push_back(
            LabeledSample{std::move(frame), task, Provenance::Historical});
        ts += plan.frame_period;
        ++frame_index;
      }

      event.end_ts = ts;
      event.processing_time =
          static_cast<double>(event.end_ts - event.start_ts) * plan.tick_seconds;
      event.complete = true;
      sim.truth.push_back(event);
    }
  }
  return sim;
}

}  // namespace tasksense
