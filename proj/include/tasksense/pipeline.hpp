#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tasksense/anomaly.hpp"
#include "tasksense/core.hpp"
#include "tasksense/detail/random.hpp"
#include "tasksense/dtree.hpp"
#include "tasksense/errors.hpp"
#include "tasksense/labeler.hpp"
#include "tasksense/sampler.hpp"
#include "tasksense/timeline.hpp"

namespace tasksense {

struct PipelineConfig {
  WindowConfig sampler;
  LabelerParams labeler;
  TreeParams tree;
  AnomalyParams anomaly;
  std::size_t debounce_m = 2;     // live default; replay tests typically use 1
  double tick_seconds = 0.01;
  std::size_t retrain_every = 256;  // accepted samples between retrains
  std::size_t dataset_capacity = 8192;
  double train_fraction = 0.7;
  std::uint64_t seed = 7;
  bool async = false;             // true: retrain on a worker thread
  std::size_t queue_capacity = 8;

  void validate() const {
    sampler.validate();
    labeler.validate();
    tree.validate();
    anomaly.validate();
    if (debounce_m < 1) raise(errc::bad_config, "debounce_m must be >= 1");
    if (!(tick_seconds > 0.0)) raise(errc::bad_config, "tick_seconds must be positive");
    if (retrain_every < 1) raise(errc::bad_config, "retrain_every must be >= 1");
    if (dataset_capacity < 2) raise(errc::bad_config, "dataset_capacity must be >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      raise(errc::bad_config, "train_fraction must be in (0, 1)");
    if (queue_capacity < 1) raise(errc::bad_config, "queue_capacity must be >= 1");
  }
};

// An immutable trained model version. Predictions always reference exactly
// one snapshot; retraining publishes a new one with the next version.
struct ModelSnapshot {
  DecisionTree tree;
  std::uint64_t version = 0;
  EvalMetrics eval;  // holdout metrics at training time
};

namespace detail {

// Mutex-guarded swappable reference to the live snapshot (readers copy the
// shared_ptr under the lock, then use it lock-free).
class SnapshotCell {
public:
  std::shared_ptr<const ModelSnapshot> load() const {
    std::lock_guard<std::mutex> lock(mu_);
    return snapshot_;
  }
  void store(std::shared_ptr<const ModelSnapshot> next) {
    std::lock_guard<std::mutex> lock(mu_);
    snapshot_ = std::move(next);
  }

private:
  mutable std::mutex mu_;
  std::shared_ptr<const ModelSnapshot> snapshot_;
};

// Producer-side non-blocking bounded queue: try_push drops when full so the
// producer never waits; pop blocks until an item arrives or the queue is
// closed and drained.
template <typename T>
class BoundedQueue {
public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  bool try_push(T item) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closed_ || items_.size() >= capacity_) return false;
      items_.push_back(std::move(item));
    }
    ready_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock<std::mutex> lock(mu_);
    ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      closed_ = true;
    }
    ready_.notify_all();
  }

private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable ready_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace detail

// One report row as emitted by the live pipeline: the timeline row plus the
// model version that produced it.
struct PipelineRow {
  ReportRow row;
  std::uint64_t model_version = 0;
};

inline constexpr const char* kPipelineHeader =
    "ID,Time Stamp,Detected Task,Processing Time (s),Acceptance Range,"
    "Detected Abnormality,Model Version";

inline std::string pipeline_csv_row(const PipelineRow& r) {
  std::ostringstream out;
  out << r.row.id << ',' << r.row.ts << ',' << to_string(r.row.task) << ','
      << (r.row.processing_time ? detail::format_seconds(*r.row.processing_time)
                                : "NA")
      << ','
      << detail::csv_field(r.row.range ? detail::format_range(*r.row.range) : "NA")
      << ',' << to_string(r.row.verdict) << ',' << r.model_version;
  return out.str();
}

inline nlohmann::json eval_to_json(const EvalMetrics& m) {
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : m.confusion) confusion.push_back(row);
  return nlohmann::json{{"accuracy", m.accuracy},
                        {"confusion", std::move(confusion)},
                        {"mean_predict_latency", m.mean_predict_latency}};
}

inline EvalMetrics eval_from_json(const nlohmann::json& doc) {
  EvalMetrics m;
  m.accuracy = doc.value("accuracy", 0.0);
  m.mean_predict_latency = doc.value("mean_predict_latency", 0.0);
  if (doc.contains("confusion")) {
    const auto& c = doc["confusion"];
    if (!c.is_array() || c.size() != kTaskCount)
      raise(errc::malformed_line, "confusion matrix must be 4x4");
    for (std::size_t i = 0; i < kTaskCount; ++i) {
      auto row = c[i].get<std::vector<std::uint64_t>>();
      if (row.size() != kTaskCount)
        raise(errc::malformed_line, "confusion matrix must be 4x4");
      std::copy(row.begin(), row.end(), m.confusion[i].begin());
    }
  }
  return m;
}

inline nlohmann::json model_to_json(const ModelSnapshot& snap) {
  return nlohmann::json{{"format", "tasksense-model"},
                        {"version", snap.version},
                        {"tree", tree_to_json(snap.tree)},
                        {"eval", eval_to_json(snap.eval)}};
}

inline ModelSnapshot model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "tasksense-model")
    raise(errc::malformed_line, "not a tasksense model document");
  ModelSnapshot snap;
  snap.version = doc.value("version", std::uint64_t{1});
  snap.tree = tree_from_json(doc.at("tree"));
  if (doc.contains("eval")) snap.eval = eval_from_json(doc["eval"]);
  return snap;
}

struct RunStats {
  std::uint64_t frames = 0;
  std::uint64_t labeled_frames = 0;   // frames that carried ground truth
  std::uint64_t correct_frames = 0;   // emitted label == ground truth
  std::uint64_t accepted_samples = 0; // sampler stores (incl. forced refresh)
  std::uint64_t retrains = 0;
  std::uint64_t skipped_retrains = 0; // batch unusable (too small/degenerate)
  std::uint64_t dropped_batches = 0;  // async queue full
  std::uint64_t events = 0;
  std::uint64_t abnormal_events = 0;

  double frame_accuracy() const {
    return labeled_frames == 0
               ? 0.0
               : static_cast<double>(correct_frames) /
                     static_cast<double>(labeled_frames);
  }
};

// Realizes the two parallel phases: the caller's thread predicts, debounces,
// segments and judges durations; retraining either runs inline at the
// sampling cadence (sync mode, deterministic replay) or on a training worker
// fed through a bounded queue (async mode, prediction never blocks). Either
// way the trainer publishes immutable snapshots through an atomic cell.
class PipelineEngine {
public:
  PipelineEngine(PipelineConfig cfg, DecisionTree tree, EvalMetrics initial_eval,
                 std::optional<Dataset> historical = std::nullopt)
      : cfg_(std::move(cfg)),
        schema_(tree.schema()),
        bank_(cfg_.sampler),
        debouncer_(cfg_.debounce_m),
        segmenter_(cfg_.tick_seconds),
        tracker_(cfg_.anomaly),
        rng_(cfg_.seed),
        queue_(cfg_.queue_capacity) {
    cfg_.validate();
    cell_.store(std::make_shared<const ModelSnapshot>(
        ModelSnapshot{std::move(tree), 1, std::move(initial_eval)}));
    if (historical) {
      if (!(historical->schema() == schema_))
        raise(errc::schema_mismatch, "historical dataset schema differs from model");
      refs_ = reference_centroids(*historical);
      dataset_.emplace(schema_, cfg_.dataset_capacity);
      for (std::size_t i = 0; i < historical->size(); ++i)
        dataset_->push((*historical)[i]);
      if (cfg_.async)
        trainer_ = std::thread([this] { train_loop(); });
    }
  }

  ~PipelineEngine() { shutdown(); }

  PipelineEngine(const PipelineEngine&) = delete;
  PipelineEngine& operator=(const PipelineEngine&) = delete;

  // Feed one frame; returns the report rows completed by it. `truth` (when
  // the stream carries labels) feeds the accuracy counters only.
  std::vector<PipelineRow> step(const SensorFrame& frame,
                                std::optional<TaskLabel> truth = std::nullopt) {
    const auto snapshot = cell_.load();
    const TaskLabel raw = snapshot->tree.predict(frame);
    const TaskLabel emitted = debouncer_.step(raw);

    stats_.frames++;
    if (truth) {
      stats_.labeled_frames++;
      stats_.correct_frames += (emitted == *truth);
    }

    std::vector<PipelineRow> rows;
    const Detection det{next_id_++, frame.ts, emitted};
    if (auto done = segmenter_.step(det))
      rows.push_back(judge(*done, snapshot->version));

    // training phase: sample the frame, retrain at the cadence boundary
    if (dataset_) {
      const auto decision = bank_.offer(frame, rng_.u01(), frame.ts);
      if (decision.accepted() &&
          ++stats_.accepted_samples % cfg_.retrain_every == 0) {
        auto batch = bank_.snapshot();
        if (cfg_.async) {
          if (!queue_.try_push(std::move(batch))) stats_.dropped_batches++;
        } else {
          retrain(batch);
        }
      }
    }
    return rows;
  }

  // Flush the final incomplete event and stop the training worker.
  std::vector<PipelineRow> finish() {
    shutdown();
    std::vector<PipelineRow> rows;
    if (auto tail = segmenter_.finish()) {
      ReportRow row;
      row.id = tail->start_id;
      row.ts = tail->start_ts;
      row.task = tail->label;
      rows.push_back(PipelineRow{row, cell_.load()->version});
    }
    return rows;
  }

  std::shared_ptr<const ModelSnapshot> snapshot() const { return cell_.load(); }

  RunStats stats() const {
    RunStats out = stats_;
    out.retrains = retrains_.load();
    out.skipped_retrains = skipped_retrains_.load();
    return out;
  }

  const PipelineConfig& config() const { return cfg_; }

private:
  PipelineRow judge(const TaskEvent& event, std::uint64_t version) {
    const AnomalyRecord rec = tracker_.observe(event.label, *event.processing_time);
    stats_.events++;
    stats_.abnormal_events += (rec.verdict == Verdict::Abnormal);
    ReportRow row;
    row.id = event.start_id;
    row.ts = event.start_ts;
    row.task = event.label;
    row.processing_time = event.processing_time;
    row.range = rec.interval;
    row.verdict = rec.verdict;
    return PipelineRow{row, version};
  }

  // Pseudo-label the sampled batch against the historical reference
  // centroids, fold it into the dataset, retrain, and publish the next
  // snapshot. Unusable batches (too small, or collapsing to fewer distinct
  // points than clusters) are skipped, never fatal.
  void retrain(const std::vector<SensorFrame>& batch) {
    const std::uint64_t round = ++batch_counter_;
    const std::uint64_t round_seed =
        cfg_.seed ^ (0x9E3779B97F4A7C15ull * (round + 1));
    try {
      const PseudoLabelBatch labeled =
          pseudo_label(batch, schema_, refs_, round_seed, cfg_.labeler);
      for (const auto& sample : labeled.samples) dataset_->push(sample);
      auto [train_part, test_part] =
          split_holdout(*dataset_, cfg_.train_fraction, round_seed);
      DecisionTree tree = train(train_part, cfg_.tree);
      EvalMetrics eval = evaluate(tree, test_part);
      const auto prev = cell_.load();
      cell_.store(std::make_shared<const ModelSnapshot>(
          ModelSnapshot{std::move(tree), prev->version + 1, std::move(eval)}));
      retrains_.fetch_add(1);
    } catch (const Error& e) {
      if (e.code() == errc::too_few_points ||
          e.code() == errc::degenerate_clusters ||
          e.code() == errc::dataset_too_small) {
        skipped_retrains_.fetch_add(1);
        return;
      }
      throw;
    }
  }

  void train_loop() {
    while (auto batch = queue_.pop()) retrain(*batch);
  }

  void shutdown() {
    queue_.close();
    if (trainer_.joinable()) trainer_.join();
  }

  PipelineConfig cfg_;
  ChannelSchema schema_;
  WindowBank bank_;
  Debouncer debouncer_;
  Segmenter segmenter_;
  DurationTracker tracker_;
  detail::Rng rng_;

  detail::SnapshotCell cell_;
  detail::BoundedQueue<std::vector<SensorFrame>> queue_;
  std::thread trainer_;

  std::map<TaskLabel, std::vector<double>> refs_;
  std::optional<Dataset> dataset_;  // owned by the training side

  std::uint64_t next_id_ = 0;
  std::uint64_t batch_counter_ = 0;
  RunStats stats_;
  std::atomic<std::uint64_t> retrains_{0};
  std::atomic<std::uint64_t> skipped_retrains_{0};
};

}  // namespace tasksense
