#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tasksense/errors.hpp"

namespace tasksense {

// Timestamps are integer stream ticks. The physical duration of one tick is
// configuration (tick_seconds, default 0.01); nothing in the domain types
// depends on it.
using Timestamp = std::int64_t;

// ---------------------------------------------------------------------------
// task labels

enum class TaskLabel : std::uint8_t {
  ScionCutting = 0,
  RootstockCutting = 1,
  RootstockClipping = 2,
  Joining = 3,
};

inline constexpr std::size_t kTaskCount = 4;

inline constexpr TaskLabel kAllTasks[kTaskCount] = {
    TaskLabel::ScionCutting,
    TaskLabel::RootstockCutting,
    TaskLabel::RootstockClipping,
    TaskLabel::Joining,
};

inline std::string to_string(TaskLabel l) {
  switch (l) {
    case TaskLabel::ScionCutting: return "Scion Cutting";
    case TaskLabel::RootstockCutting: return "Rootstock Cutting";
    case TaskLabel::RootstockClipping: return "Rootstock Clipping";
    case TaskLabel::Joining: return "Joining";
  }
  return "?";
}

// Label text is matched case-insensitively with all whitespace removed, so
// "Scion Cutting", "ScionCutting" and "scion cutting" are the same label.
inline std::optional<TaskLabel> try_parse_task_label(std::string_view text) {
  std::string key;
  key.reserve(text.size());
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch)))
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "scioncutting") return TaskLabel::ScionCutting;
  if (key == "rootstockcutting") return TaskLabel::RootstockCutting;
  if (key == "rootstockclipping") return TaskLabel::RootstockClipping;
  if (key == "joining") return TaskLabel::Joining;
  return std::nullopt;
}

inline TaskLabel parse_task_label(std::string_view text) {
  if (auto l = try_parse_task_label(text)) return *l;
  raise(errc::unknown_label, "not a task label: '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// channel schema

using ChannelId = std::string;

// Ordered set of channel names. The order is the canonical feature order for
// every vector operation in the engine.
class ChannelSchema {
public:
  ChannelSchema() = default;

  explicit ChannelSchema(std::vector<ChannelId> channels)
      : channels_(std::move(channels)) {
    if (channels_.empty())
      raise(errc::invalid_schema, "schema needs at least one channel");
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (channels_[i].empty())
        raise(errc::invalid_schema, "empty channel name");
      if (!index_.emplace(channels_[i], i).second)
        raise(errc::invalid_schema, "duplicate channel: " + channels_[i]);
    }
  }

  std::size_t size() const { return channels_.size(); }
  bool empty() const { return channels_.empty(); }
  const std::vector<ChannelId>& channels() const { return channels_; }
  const ChannelId& name(std::size_t i) const { return channels_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const ChannelSchema& o) const {
    return channels_ == o.channels_;
  }

private:
  std::vector<ChannelId> channels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// frames and samples

// One timestamped reading of all schema channels. Values are stored in
// schema order; the association channel -> value goes through the schema.
struct SensorFrame {
  Timestamp ts = 0;
  std::vector<double> values;

  bool operator==(const SensorFrame&) const = default;
};

enum class Provenance : std::uint8_t { Historical, PseudoLabeled };

struct LabeledSample {
  SensorFrame frame;
  TaskLabel label = TaskLabel::ScionCutting;
  Provenance provenance = Provenance::Historical;
};

// frame values in schema order
inline std::vector<double> channel_vector(const SensorFrame& frame,
                                          const ChannelSchema& schema) {
  if (frame.values.size() != schema.size())
    raise(errc::schema_mismatch, "frame has " + std::to_string(frame.values.size()) +
                                     " values, schema has " + std::to_string(schema.size()));
  return frame.values;
}

// ---------------------------------------------------------------------------
// line parsing (NDJSON objects and CSV rows)

namespace detail {

inline bool looks_like_json(std::string_view line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '{';
  }
  return false;
}

inline double parse_number(std::string_view text) {
  // trim
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  double out = 0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end)
    raise(errc::malformed_line, "bad number: '" + std::string(text) + "'");
  return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

struct ParsedLine {
  SensorFrame frame;
  std::optional<TaskLabel> label;
};

inline ParsedLine parse_json_line(std::string_view line, const ChannelSchema& schema) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::malformed_line, e.what());
  }
  if (!doc.is_object() || !doc.contains("ts") || !doc.contains("channels"))
    raise(errc::malformed_line, "expected object with 'ts' and 'channels'");
  const auto& ts = doc["ts"];
  if (!ts.is_number_integer() || ts.get<std::int64_t>() < 0)
    raise(errc::malformed_line, "'ts' must be a non-negative integer");
  const auto& channels = doc["channels"];
  if (!channels.is_object())
    raise(errc::malformed_line, "'channels' must be an object");

  ParsedLine out;
  out.frame.ts = ts.get<std::int64_t>();
  out.frame.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    auto it = channels.find(schema.name(i));
    if (it == channels.end())
      raise(errc::missing_channel, schema.name(i));
    if (!it->is_number())
      raise(errc::malformed_line, "channel " + schema.name(i) + " is not a number");
    const double v = it->get<double>();
    if (!std::isfinite(v))
      raise(errc::non_finite_value, schema.name(i));
    out.frame.values[i] = v;
  }
  if (doc.contains("label")) {
    if (!doc["label"].is_string())
      raise(errc::malformed_line, "'label' must be a string");
    out.label = parse_task_label(doc["label"].get<std::string>());
  }
  return out;
}

// CSV rows carry ts, then one value per schema channel in schema order, then
// optionally a label.
inline ParsedLine parse_csv_line(std::string_view line, const ChannelSchema& schema) {
  auto fields = split_csv(line);
  if (fields.size() != schema.size() + 1 && fields.size() != schema.size() + 2)
    raise(errc::malformed_line,
          "expected " + std::to_string(schema.size() + 1) + " or " +
              std::to_string(schema.size() + 2) + " fields, got " +
              std::to_string(fields.size()));
  ParsedLine out;
  const double ts = parse_number(fields[0]);
  if (ts < 0 || ts != std::floor(ts))
    raise(errc::malformed_line, "'ts' must be a non-negative integer");
  out.frame.ts = static_cast<Timestamp>(ts);
  out.frame.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const double v = parse_number(fields[i + 1]);
    if (!std::isfinite(v))
      raise(errc::non_finite_value, schema.name(i));
    out.frame.values[i] = v;
  }
  if (fields.size() == schema.size() + 2)
    out.label = parse_task_label(fields.back());
  return out;
}

inline ParsedLine parse_line(std::string_view line, const ChannelSchema& schema) {
  return looks_like_json(line) ? parse_json_line(line, schema)
                               : parse_csv_line(line, schema);
}

}  // namespace detail

inline SensorFrame parse_frame(std::string_view line, const ChannelSchema& schema) {
  return detail::parse_line(line, schema).frame;
}

inline LabeledSample parse_labeled_record(std::string_view line,
                                          const ChannelSchema& schema) {
  auto parsed = detail::parse_line(line, schema);
  if (!parsed.label)
    raise(errc::unknown_label, "record has no 'label' field");
  return LabeledSample{std::move(parsed.frame), *parsed.label,
                       Provenance::Historical};
}

inline std::string to_ndjson(const SensorFrame& frame, const ChannelSchema& schema,
                             std::optional<TaskLabel> label = std::nullopt) {
  nlohmann::json channels = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size(); ++i)
    channels[schema.name(i)] = frame.values[i];
  nlohmann::json doc{{"ts", frame.ts}, {"channels", std::move(channels)}};
  if (label) doc["label"] = to_string(*label);
  return doc.dump();
}

inline std::string to_ndjson(const LabeledSample& sample, const ChannelSchema& schema) {
  return to_ndjson(sample.frame, schema, sample.label);
}

// CSV header for a schema: ts,<channels...>[,label]
inline std::string csv_header(const ChannelSchema& schema, bool with_label) {
  std::string out = "ts";
  for (const auto& c : schema.channels()) {
    out += ',';
    out += c;
  }
  if (with_label) out += ",label";
  return out;
}

// Parses a CSV header row and checks it matches `ts,<schema...>[,label]`.
// Returns true when a label column is present.
inline bool parse_csv_header(std::string_view line, const ChannelSchema& schema) {
  auto fields = detail::split_csv(line);
  if (fields.size() != schema.size() + 1 && fields.size() != schema.size() + 2)
    raise(errc::malformed_line, "csv header does not match schema width");
  if (fields[0] != "ts")
    raise(errc::malformed_line, "csv header must start with 'ts'");
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (fields[i + 1] != schema.name(i))
      raise(errc::missing_channel, schema.name(i));
  if (fields.size() == schema.size() + 2) {
    if (fields.back() != "label")
      raise(errc::malformed_line, "last csv header field must be 'label'");
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// dataset

// Bounded training set. Pseudo-labeled samples are evicted oldest-first when
// the capacity is reached; historical samples are never evicted.
class Dataset {
public:
  Dataset(ChannelSchema schema, std::size_t capacity)
      : schema_(std::move(schema)), capacity_(capacity) {
    if (capacity_ == 0) raise(errc::bad_config, "dataset capacity must be positive");
  }

  const ChannelSchema& schema() const { return schema_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::deque<LabeledSample>& samples() const { return samples_; }

  // Returns false when the sample was dropped (a pseudo-labeled insert into
  // a dataset already full of historical samples evicts itself).
  bool push(LabeledSample sample) {
    if (sample.frame.values.size() != schema_.size())
      raise(errc::schema_mismatch, "sample does not match dataset schema");
    samples_.push_back(std::move(sample));
    if (samples_.size() <= capacity_) return true;

    auto victim = std::find_if(samples_.begin(), samples_.end(),
                               [](const LabeledSample& s) {
                                 return s.provenance == Provenance::PseudoLabeled;
                               });
    if (victim == samples_.end()) {
      samples_.pop_back();
      raise(errc::dataset_full, "capacity reached and no pseudo-labeled sample to evict");
    }
    const bool dropped_self = (victim == samples_.end() - 1);
    samples_.erase(victim);
    return !dropped_self;
  }

  std::size_t count(Provenance p) const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(),
                      [p](const LabeledSample& s) { return s.provenance == p; }));
  }

private:
  ChannelSchema schema_;
  std::deque<LabeledSample> samples_;
  std::size_t capacity_;
};

// Reads a labeled dataset: NDJSON (one object per line) or CSV with a
// `ts,<channels...>,label` header. Parse failures name the 1-based line.
inline Dataset read_dataset(
    std::istream& in, const ChannelSchema& schema,
    std::size_t capacity = std::numeric_limits<std::size_t>::max()) {
  Dataset ds(schema, capacity);
  std::string line;
  std::size_t lineno = 0;
  bool saw_any = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      if (!saw_any && !detail::looks_like_json(line)) {
        saw_any = true;
        if (!parse_csv_header(line, schema))
          raise(errc::unknown_label, "csv dataset needs a 'label' column");
        continue;
      }
      saw_any = true;
      ds.push(parse_labeled_record(line, schema));
    } catch (const Error& e) {
      raise(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ds.empty()) raise(errc::empty_dataset, "no labeled records found");
  return ds;
}

}  // namespace tasksense
