#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tasksense/core.hpp"
#include "tasksense/detail/stats.hpp"
#include "tasksense/errors.hpp"

namespace tasksense {

// ---------------------------------------------------------------------------
// conjugate Gaussian duration model
//
// Latent mean duration x_k with prior N(mu, tau^2); each observed duration
// z_k is modeled as N(x_k, sigma^2) with fixed observation variance. The
// posterior after folding in z_k stays Gaussian, so the Bayesian update has
// a closed form:
//
//   tau'^2 = 1 / (1/tau^2 + 1/sigma^2)
//   mu'    = tau'^2 * (mu/tau^2 + z_k/sigma^2)

class DurationPosterior {
public:
  DurationPosterior(TaskLabel task, double prior_mean, double prior_variance,
                    double obs_variance)
      : task_(task),
        mean_(prior_mean),
        prior_precision_(1.0 / prior_variance),
        obs_variance_(obs_variance),
        obs_precision_(1.0 / obs_variance) {
    if (!(prior_variance > 0.0))
      raise(errc::bad_config, "prior variance must be positive");
    if (!(obs_variance > 0.0))
      raise(errc::bad_config, "observation variance must be positive");
  }

  TaskLabel task() const { return task_; }
  double mean() const { return mean_; }
  double obs_variance() const { return obs_variance_; }
  std::uint64_t count() const { return n_; }

  // Precision accumulates additively: 1/tau_n^2 = 1/tau_0^2 + n/sigma^2.
  double precision() const {
    return prior_precision_ + static_cast<double>(n_) * obs_precision_;
  }
  double variance() const { return 1.0 / precision(); }

  void update(double z) {
    if (!(z > 0.0))
      raise(errc::non_positive_duration, "observed duration must be positive");
    const double old_precision = precision();
    ++n_;
    mean_ = (mean_ * old_precision + z * obs_precision_) / precision();
  }

private:
  TaskLabel task_;
  double mean_;
  double prior_precision_;
  double obs_variance_;
  double obs_precision_;
  std::uint64_t n_ = 0;
};

// Seed the model from historical durations: prior mean = sample mean, prior
// variance = variance of that mean (sample variance / n), observation
// variance = sample variance, floored to keep the model proper when history
// is constant.
inline DurationPosterior init_prior(TaskLabel task, std::span<const double> durations,
                                    std::size_t min_n = 5,
                                    double variance_floor = 1e-6) {
  if (durations.size() < min_n)
    raise(errc::insufficient_history, "need at least min_n historical durations");
  const auto n = static_cast<double>(durations.size());
  double mean = 0.0;
  for (double d : durations) {
    if (!(d > 0.0))
      raise(errc::non_positive_duration, "historical duration must be positive");
    mean += d;
  }
  mean /= n;
  double var = 0.0;
  for (double d : durations) var += (d - mean) * (d - mean);
  var = durations.size() > 1 ? var / (n - 1.0) : 0.0;
  var = std::max(var, variance_floor);
  return DurationPosterior(task, mean, var / n, var);
}

inline DurationPosterior update(DurationPosterior p, double z) {
  p.update(z);
  return p;
}

// ---------------------------------------------------------------------------
// acceptance intervals and verdicts

struct AcceptanceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.99;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class IntervalMode {
  Mean,        // interval on the posterior mean: mu +/- q*tau
  Predictive,  // interval on the next observation: mu +/- q*sqrt(tau^2+sigma^2)
};

inline std::string to_string(IntervalMode mode) {
  return mode == IntervalMode::Mean ? "mean" : "predictive";
}

inline IntervalMode parse_interval_mode(const std::string& s) {
  if (s == "mean") return IntervalMode::Mean;
  if (s == "predictive") return IntervalMode::Predictive;
  raise(errc::bad_config, "anomaly.mode must be 'mean' or 'predictive'");
}

inline AcceptanceInterval credible_interval(const DurationPosterior& p,
                                            double level = 0.99,
                                            IntervalMode mode = IntervalMode::Mean) {
  if (!(level > 0.0 && level < 1.0))
    raise(errc::bad_config, "credible level must be in (0, 1)");
  const double q = detail::two_sided_quantile(level);
  const double spread = mode == IntervalMode::Mean
                            ? std::sqrt(p.variance())
                            : std::sqrt(p.variance() + p.obs_variance());
  return AcceptanceInterval{p.mean() - q * spread, p.mean() + q * spread, level};
}

enum class Verdict { Normal, Abnormal, NA };

// Table-2 flag spelling
inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Normal: return "No";
    case Verdict::Abnormal: return "Yes";
    default: return "NA";
  }
}

struct AnomalyRecord {
  TaskLabel task = TaskLabel::ScionCutting;
  double duration = 0.0;
  std::optional<AcceptanceInterval> interval;
  Verdict verdict = Verdict::NA;
};

// A duration is abnormal iff it falls outside the closed acceptance
// interval; without an interval the verdict is NA.
inline Verdict classify(double duration,
                        const std::optional<AcceptanceInterval>& interval) {
  if (!interval) return Verdict::NA;
  return interval->contains(duration) ? Verdict::Normal : Verdict::Abnormal;
}

// ---------------------------------------------------------------------------
// per-task tracking

struct AnomalyParams {
  double level = 0.99;
  IntervalMode mode = IntervalMode::Mean;
  std::size_t min_history = 5;
  double variance_floor = 1e-6;
  bool update_on_abnormal = true;

  void validate() const {
    if (!(level > 0.0 && level < 1.0))
      raise(errc::bad_config, "anomaly.level must be in (0, 1)");
    if (min_history < 1)
      raise(errc::bad_config, "anomaly.min_history must be >= 1");
    if (!(variance_floor > 0.0))
      raise(errc::bad_config, "anomaly.variance_floor must be positive");
  }
};

// Owns one posterior per task. Until a task has min_history observed
// durations its verdicts are NA; those warm-up durations then seed the
// prior, after which every duration is judged against the interval that was
// current *before* the observation is folded in (Table 2's acceptance-range
// column shows the pre-update range).
class DurationTracker {
public:
  explicit DurationTracker(AnomalyParams params = {}) : params_(params) {
    params_.validate();
  }

  const AnomalyParams& params() const { return params_; }

  // Seed a task directly from a historical duration set.
  void seed(TaskLabel task, std::span<const double> durations) {
    posteriors_[static_cast<std::size_t>(task)] = init_prior(
        task, durations, params_.min_history, params_.variance_floor);
  }

  bool has_posterior(TaskLabel task) const {
    return posteriors_[static_cast<std::size_t>(task)].has_value();
  }

  const DurationPosterior& posterior(TaskLabel task) const {
    const auto& p = posteriors_[static_cast<std::size_t>(task)];
    if (!p) raise(errc::no_posterior, "no posterior for " + to_string(task));
    return *p;
  }

  std::optional<AcceptanceInterval> interval(TaskLabel task) const {
    const auto& p = posteriors_[static_cast<std::size_t>(task)];
    if (!p) return std::nullopt;
    return credible_interval(*p, params_.level, params_.mode);
  }

  // Judge one completed task duration and fold it into the model.
  AnomalyRecord observe(TaskLabel task, double duration) {
    if (!(duration > 0.0))
      raise(errc::non_positive_duration, "observed duration must be positive");
    AnomalyRecord rec;
    rec.task = task;
    rec.duration = duration;
    rec.interval = interval(task);
    rec.verdict = classify(duration, rec.interval);

    auto& p = posteriors_[static_cast<std::size_t>(task)];
    if (!p) {
      auto& warm = warmup_[static_cast<std::size_t>(task)];
      warm.push_back(duration);
      if (warm.size() >= params_.min_history) {
        p = init_prior(task, warm, params_.min_history, params_.variance_floor);
        warm.clear();
      }
    } else if (rec.verdict != Verdict::Abnormal || params_.update_on_abnormal) {
      p->update(duration);
    }
    return rec;
  }

private:
  AnomalyParams params_;
  std::array<std::optional<DurationPosterior>, kTaskCount> posteriors_;
  std::array<std::vector<double>, kTaskCount> warmup_;
};

}  // namespace tasksense
