#pragma once

#include <stdexcept>
#include <string>

namespace tasksense {

// Failure categories surfaced by the public operations. Each value maps to
// one documented error condition.
enum class errc {
  // parsing / domain types
  malformed_line,
  missing_channel,
  non_finite_value,
  unknown_label,
  invalid_schema,
  dataset_full,
  // sampler
  non_monotone_clock,
  invalid_draw,
  // tree
  dataset_too_small,
  empty_dataset,
  empty_counts,
  schema_mismatch,
  // labeler
  too_few_points,
  degenerate_clusters,
  dimension_mismatch,
  missing_label,
  non_square,
  non_finite,
  // timeline
  length_mismatch,
  // anomaly
  insufficient_history,
  non_positive_duration,
  no_posterior,
  // simgen
  missing_profile,
  // cli / io
  bad_config,
  io_error,
};

inline const char* to_string(errc c) {
  switch (c) {
    case errc::malformed_line: return "malformed_line";
    case errc::missing_channel: return "missing_channel";
    case errc::non_finite_value: return "non_finite_value";
    case errc::unknown_label: return "unknown_label";
    case errc::invalid_schema: return "invalid_schema";
    case errc::dataset_full: return "dataset_full";
    case errc::non_monotone_clock: return "non_monotone_clock";
    case errc::invalid_draw: return "invalid_draw";
    case errc::dataset_too_small: return "dataset_too_small";
    case errc::empty_dataset: return "empty_dataset";
    case errc::empty_counts: return "empty_counts";
    case errc::schema_mismatch: return "schema_mismatch";
    case errc::too_few_points: return "too_few_points";
    case errc::degenerate_clusters: return "degenerate_clusters";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::missing_label: return "missing_label";
    case errc::non_square: return "non_square";
    case errc::non_finite: return "non_finite";
    case errc::length_mismatch: return "length_mismatch";
    case errc::insufficient_history: return "insufficient_history";
    case errc::non_positive_duration: return "non_positive_duration";
    case errc::no_posterior: return "no_posterior";
    case errc::missing_profile: return "missing_profile";
    case errc::bad_config: return "bad_config";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tasksense
