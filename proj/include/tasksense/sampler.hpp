#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tasksense/core.hpp"
#include "tasksense/errors.hpp"

namespace tasksense {

// Sliding-window stream filter: W equal-size sample arrays separated by
// equal gaps laid out over a cyclic index space of period W*(C+G). A frame
// lands in the window its random draw points at, passes through when the
// draw points at a gap, and repairs a stale window regardless of the draw.
struct WindowConfig {
  std::size_t window_count = 4;    // W
  std::size_t window_capacity = 64;  // C
  std::size_t gap = 64;            // G, in index-space slots
  Timestamp stale_after = 200;     // in timestamp ticks

  std::size_t period() const { return window_count * (window_capacity + gap); }

  void validate() const {
    if (window_count < 1 || window_capacity < 1)
      raise(errc::bad_config, "window_count and window_capacity must be >= 1");
  }
};

struct SampleDecision {
  enum class Outcome { Stored, PassedThrough, ForcedStale };

  Outcome outcome = Outcome::PassedThrough;
  std::size_t window = 0;  // valid unless PassedThrough
  std::size_t slot = 0;    // valid unless PassedThrough

  bool accepted() const { return outcome != Outcome::PassedThrough; }
};

class WindowBank {
public:
  explicit WindowBank(WindowConfig config) : config_(config) {
    config_.validate();
    slots_.resize(config_.window_count * config_.window_capacity);
    last_update_.resize(config_.window_count);
    forced_cursor_.resize(config_.window_count, 0);
  }

  const WindowConfig& config() const { return config_; }

  // Admits one frame. `draw` must come from the caller (uniform in [0,1));
  // `now` must not regress. A window that has not been written within
  // stale_after is repaired by the next frame, lowest index first, and the
  // frame is consumed by that repair.
  SampleDecision offer(const SensorFrame& frame, double draw, Timestamp now) {
    if (!(draw >= 0.0 && draw < 1.0))
      raise(errc::invalid_draw, "draw must be in [0, 1)");
    std::lock_guard lock(mu_);
    if (last_now_ && now < *last_now_)
      raise(errc::non_monotone_clock,
            "now=" + std::to_string(now) + " after " + std::to_string(*last_now_));
    last_now_ = now;

    SampleDecision d;
    if (auto stale = first_stale(now)) {
      d.outcome = SampleDecision::Outcome::ForcedStale;
      d.window = *stale;
      d.slot = forced_cursor_[*stale];
      forced_cursor_[*stale] = (forced_cursor_[*stale] + 1) % config_.window_capacity;
      write(d.window, d.slot, frame, now);
      return d;
    }

    const std::size_t period = config_.period();
    const std::size_t stride = config_.window_capacity + config_.gap;
    const auto r = static_cast<std::size_t>(draw * static_cast<double>(period));
    if (r % stride < config_.window_capacity) {
      d.outcome = SampleDecision::Outcome::Stored;
      d.window = r / stride;
      d.slot = r % stride;
      write(d.window, d.slot, frame, now);
    }
    return d;
  }

  // All filled slots, window-major then slot order. Point-in-time view.
  std::vector<SensorFrame> snapshot() const {
    std::lock_guard lock(mu_);
    std::vector<SensorFrame> out;
    for (const auto& slot : slots_)
      if (slot) out.push_back(*slot);
    return out;
  }

  std::size_t filled() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& slot : slots_)
      if (slot) ++n;
    return n;
  }

  std::optional<Timestamp> last_update(std::size_t window) const {
    std::lock_guard lock(mu_);
    return last_update_[window];
  }

private:
  std::optional<std::size_t> first_stale(Timestamp now) const {
    for (std::size_t i = 0; i < config_.window_count; ++i)
      if (last_update_[i] && now - *last_update_[i] > config_.stale_after)
        return i;
    return std::nullopt;
  }

  void write(std::size_t window, std::size_t slot, const SensorFrame& frame,
             Timestamp now) {
    slots_[window * config_.window_capacity + slot] = frame;
    last_update_[window] = now;
  }

  WindowConfig config_;
  std::vector<std::optional<SensorFrame>> slots_;
  std::vector<std::optional<Timestamp>> last_update_;  // empty until first write
  std::vector<std::size_t> forced_cursor_;
  std::optional<Timestamp> last_now_;
  mutable std::mutex mu_;
};

}  // namespace tasksense
