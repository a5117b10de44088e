#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tasksense/anomaly.hpp"
#include "tasksense/core.hpp"
#include "tasksense/errors.hpp"

namespace tasksense {

// One timestamped predicted label.
struct Detection {
  std::uint64_t id = 0;  // strictly increasing
  Timestamp ts = 0;      // non-decreasing
  TaskLabel label = TaskLabel::ScionCutting;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// A maximal run of equal detections. The event ends when the *next* task is
// first detected, so processing_time measures first-detection to
// first-detection; the stream-final run has no end yet.
struct TaskEvent {
  TaskLabel label = TaskLabel::ScionCutting;
  std::uint64_t start_id = 0;
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;  // meaningful only when complete
  std::optional<double> processing_time;  // seconds
  bool complete = false;
};

// Streaming flicker suppression: the output keeps the current label until m
// consecutive observations agree on a new one, then switches from that
// observation onward. m=1 is the identity.
class Debouncer {
public:
  explicit Debouncer(std::size_t m) : m_(m) {
    if (m < 1) raise(errc::bad_config, "debounce window must be >= 1");
  }

  TaskLabel step(TaskLabel observed) {
    if (!current_) {
      current_ = pending_ = observed;
      return *current_;
    }
    if (observed == *current_) {
      pending_ = *current_;  // a candidate run was broken; require m afresh
      streak_ = 0;
    } else {
      if (observed != pending_) {
        pending_ = observed;
        streak_ = 0;
      }
      if (++streak_ >= m_) {
        current_ = pending_;
        streak_ = 0;
      }
    }
    return *current_;
  }

private:
  std::size_t m_;
  std::optional<TaskLabel> current_;
  TaskLabel pending_ = TaskLabel::ScionCutting;
  std::size_t streak_ = 0;
};

inline std::vector<Detection> debounce(std::span<const Detection> detections,
                                       std::size_t m) {
  Debouncer db(m);
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (const auto& d : detections)
    out.push_back(Detection{d.id, d.ts, db.step(d.label)});
  return out;
}

// Streaming run-length segmentation: step() returns the event a detection
// just completed (the first detection of a new task closes the previous
// run), finish() returns the final incomplete run.
class Segmenter {
public:
  explicit Segmenter(double tick_seconds) : tick_seconds_(tick_seconds) {
    if (!(tick_seconds > 0.0))
      raise(errc::bad_config, "tick_seconds must be positive");
  }

  std::optional<TaskEvent> step(const Detection& d) {
    if (run_) {
      if (d.id <= last_id_)
        raise(errc::malformed_line, "detection ids must be strictly increasing");
      if (d.ts < run_->start_ts || d.ts < last_ts_)
        raise(errc::non_monotone_clock,
              "detection timestamps must be non-decreasing");
    }
    last_id_ = d.id;
    last_ts_ = d.ts;
    if (!run_) {
      run_ = open_run(d);
      return std::nullopt;
    }
    if (d.label == run_->label) return std::nullopt;

    TaskEvent done = *run_;
    done.end_ts = d.ts;
    done.processing_time =
        static_cast<double>(done.end_ts - done.start_ts) * tick_seconds_;
    done.complete = true;
    run_ = open_run(d);
    return done;
  }

  std::optional<TaskEvent> finish() {
    auto out = run_;
    run_.reset();
    return out;
  }

private:
  static TaskEvent open_run(const Detection& d) {
    TaskEvent e;
    e.label = d.label;
    e.start_id = d.id;
    e.start_ts = d.ts;
    return e;
  }

  double tick_seconds_;
  std::optional<TaskEvent> run_;
  std::uint64_t last_id_ = 0;
  Timestamp last_ts_ = 0;
};

// Group an ordered detection stream into task events. Empty input yields an
// empty timeline; the final run is emitted incomplete.
inline std::vector<TaskEvent> segment(std::span<const Detection> detections,
                                      double tick_seconds) {
  Segmenter seg(tick_seconds);
  std::vector<TaskEvent> events;
  for (const auto& d : detections)
    if (auto done = seg.step(d)) events.push_back(*done);
  if (auto tail = seg.finish()) events.push_back(*tail);
  return events;
}

// ---------------------------------------------------------------------------
// Table-2-style report

struct ReportRow {
  std::uint64_t id = 0;
  Timestamp ts = 0;
  TaskLabel task = TaskLabel::ScionCutting;
  std::optional<double> processing_time;
  std::optional<AcceptanceInterval> range;
  Verdict verdict = Verdict::NA;
};

// One row per event, stamped with the event's first detection. Verdicts are
// consumed in order by the complete events; the stream-final incomplete
// event prints NA fields.
inline std::vector<ReportRow> emit_rows(std::span<const TaskEvent> events,
                                        std::span<const AnomalyRecord> verdicts) {
  std::size_t complete = 0;
  for (const auto& e : events) complete += e.complete;
  if (verdicts.size() != complete)
    raise(errc::length_mismatch, "one verdict required per complete event");

  std::vector<ReportRow> rows;
  rows.reserve(events.size());
  std::size_t v = 0;
  for (const auto& e : events) {
    ReportRow row;
    row.id = e.start_id;
    row.ts = e.start_ts;
    row.task = e.label;
    if (e.complete) {
      row.processing_time = e.processing_time;
      row.range = verdicts[v].interval;
      row.verdict = verdicts[v].verdict;
      ++v;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

inline std::string format_range(const AcceptanceInterval& r) {
  return "[" + format_seconds(r.lo) + ", " + format_seconds(r.hi) + "]";
}

// RFC-4180 quoting for fields that embed commas (the acceptance range does)
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline constexpr const char* kReportHeader =
    "ID,Time Stamp,Detected Task,Processing Time (s),Acceptance Range,"
    "Detected Abnormality";

inline std::string report_csv(std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.id << ',' << r.ts << ',' << to_string(r.task) << ','
        << (r.processing_time ? detail::format_seconds(*r.processing_time) : "NA")
        << ','
        << detail::csv_field(r.range ? detail::format_range(*r.range) : "NA")
        << ',' << to_string(r.verdict) << '\n';
  }
  return out.str();
}

namespace detail {

// RFC-4180-ish field splitter (quotes, doubled quotes); enough to read back
// the report CSV this module writes.
inline std::vector<std::string> split_csv_quoted(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline Verdict parse_verdict(const std::string& s) {
  if (s == "No") return Verdict::Normal;
  if (s == "Yes") return Verdict::Abnormal;
  if (s == "NA") return Verdict::NA;
  raise(errc::malformed_line, "unknown abnormality flag: " + s);
}

inline AcceptanceInterval parse_range(const std::string& s) {
  // shape: [lo, hi]
  if (s.size() < 5 || s.front() != '[' || s.back() != ']')
    raise(errc::malformed_line, "malformed acceptance range: " + s);
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    raise(errc::malformed_line, "malformed acceptance range: " + s);
  AcceptanceInterval r;
  try {
    r.lo = std::stod(s.substr(1, comma - 1));
    r.hi = std::stod(s.substr(comma + 1, s.size() - comma - 2));
  } catch (const std::exception&) {
    raise(errc::malformed_line, "malformed acceptance range: " + s);
  }
  return r;
}

}  // namespace detail

// Parse a report CSV (optionally with extra trailing columns, e.g. the live
// pipeline's model version). The header line is required.
inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    raise(errc::malformed_line, "empty report: missing header");
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_quoted(line);
    if (f.size() < 6)
      raise(errc::malformed_line,
            "report line " + std::to_string(lineno) + ": expected 6+ columns");
    ReportRow row;
    try {
      row.id = std::stoull(f[0]);
      row.ts = std::stoll(f[1]);
    } catch (const std::exception&) {
      raise(errc::malformed_line,
            "report line " + std::to_string(lineno) + ": bad id/timestamp");
    }
    row.task = parse_task_label(f[2]);
    if (f[3] != "NA") {
      try {
        row.processing_time = std::stod(f[3]);
      } catch (const std::exception&) {
        raise(errc::malformed_line,
              "report line " + std::to_string(lineno) + ": bad processing time");
      }
    }
    if (f[4] != "NA") row.range = detail::parse_range(f[4]);
    row.verdict = detail::parse_verdict(f[5]);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// aggregate summary (per-task duration statistics and anomaly counts)

struct TaskSummary {
  std::uint64_t rows = 0;       // rows naming the task
  std::uint64_t complete = 0;   // rows with a processing time
  std::uint64_t abnormal = 0;
  double mean_duration = 0.0;
  double min_duration = 0.0;
  double max_duration = 0.0;
};

struct ReportSummary {
  std::array<TaskSummary, kTaskCount> per_task{};
  std::uint64_t rows = 0;
  std::uint64_t complete = 0;
  std::uint64_t abnormal = 0;
};

inline ReportSummary summarize(std::span<const ReportRow> rows) {
  ReportSummary s;
  for (const auto& r : rows) {
    TaskSummary& t = s.per_task[static_cast<std::size_t>(r.task)];
    t.rows++;
    s.rows++;
    if (!r.processing_time) continue;
    const double d = *r.processing_time;
    if (t.complete == 0) {
      t.min_duration = t.max_duration = d;
    } else {
      t.min_duration = std::min(t.min_duration, d);
      t.max_duration = std::max(t.max_duration, d);
    }
    t.mean_duration += d;
    t.complete++;
    s.complete++;
    if (r.verdict == Verdict::Abnormal) {
      t.abnormal++;
      s.abnormal++;
    }
  }
  for (auto& t : s.per_task)
    if (t.complete > 0) t.mean_duration /= static_cast<double>(t.complete);
  return s;
}

inline std::string summary_text(const ReportSummary& s) {
  std::ostringstream out;
  out << "Task                Events  Complete  Mean (s)  Min (s)  Max (s)  Abnormal\n";
  for (std::size_t i = 0; i < kTaskCount; ++i) {
    const TaskSummary& t = s.per_task[i];
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%-18s  %6llu  %8llu  %8s  %7s  %7s  %8llu\n",
                  to_string(static_cast<TaskLabel>(i)).c_str(),
                  static_cast<unsigned long long>(t.rows),
                  static_cast<unsigned long long>(t.complete),
                  t.complete ? detail::format_seconds(t.mean_duration).c_str() : "NA",
                  t.complete ? detail::format_seconds(t.min_duration).c_str() : "NA",
                  t.complete ? detail::format_seconds(t.max_duration).c_str() : "NA",
                  static_cast<unsigned long long>(t.abnormal));
    out << buf;
  }
  out << "Total rows: " << s.rows << "  complete events: " << s.complete
      << "  abnormalities: " << s.abnormal << '\n';
  return out.str();
}

// Fixed-width text table mirroring the CSV column set.
inline std::string report_text(std::span<const ReportRow> rows) {
  static constexpr const char* kCols[] = {
      "ID",       "Time Stamp",       "Detected Task",
      "Processing Time (s)", "Acceptance Range", "Detected Abnormality"};
  std::vector<std::array<std::string, 6>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.id), std::to_string(r.ts),
                     to_string(r.task),
                     r.processing_time ? detail::format_seconds(*r.processing_time)
                                       : "NA",
                     r.range ? detail::format_range(*r.range) : "NA",
                     to_string(r.verdict)});
  }
  std::array<std::size_t, 6> width{};
  for (std::size_t c = 0; c < 6; ++c) width[c] = std::string(kCols[c]).size();
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  auto emit = [&](const auto& get) {
    for (std::size_t c = 0; c < 6; ++c) {
      const std::string cell = get(c);
      out << cell << std::string(width[c] - cell.size(), ' ');
      out << (c + 1 < 6 ? "  " : "");
    }
    out << '\n';
  };
  emit([&](std::size_t c) { return std::string(kCols[c]); });
  for (const auto& row : cells)
    emit([&](std::size_t c) { return row[c]; });
  return out.str();
}

}  // namespace tasksense
