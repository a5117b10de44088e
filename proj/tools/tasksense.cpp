// tasksense: train, replay and inspect the task-recognition pipeline.
//
// Subcommands:
//   train     fit a decision tree on a labeled dataset (70/30 holdout)
//   run       replay or pipe a frame stream through the live pipeline
//   simulate  generate a synthetic glove stream with ground truth
//   report    aggregate a report-row CSV into per-task statistics
//
// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 runtime error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tasksense/anomaly.hpp"
#include "tasksense/core.hpp"
#include "tasksense/dtree.hpp"
#include "tasksense/errors.hpp"
#include "tasksense/labeler.hpp"
#include "tasksense/pipeline.hpp"
#include "tasksense/sampler.hpp"
#include "tasksense/simgen.hpp"
#include "tasksense/timeline.hpp"

namespace ts = tasksense;

namespace {

// All tunables, named exactly like their config-file keys. A config file is
// an INI/TOML-style key=value list; command-line flags take precedence.
struct Options {
  std::vector<std::string> schema;  // empty: the 5 reference channels

  // sampler.*
  std::size_t sampler_windows = 4;
  std::size_t sampler_capacity = 64;
  std::size_t sampler_gap = 64;
  double sampler_stale_ms = 2000.0;

  // labeler.*
  std::size_t labeler_k = ts::kTaskCount;
  std::size_t labeler_restarts = 5;
  std::size_t labeler_max_iter = 100;
  double labeler_tol = 1e-6;
  std::vector<std::string> labeler_channels;

  // tree.*
  std::size_t tree_min_leaf = 25;
  std::size_t tree_max_depth = 0;
  bool tree_prune = false;
  double tree_confidence = 0.25;

  // anomaly.*
  double anomaly_level = 0.99;
  std::string anomaly_mode = "mean";
  std::size_t anomaly_min_history = 5;
  double anomaly_variance_floor = 1e-6;

  // pipeline.*
  std::size_t retrain_every = 256;
  std::size_t dataset_capacity = 65536;
  double train_fraction = 0.7;
  std::size_t debounce = 2;
  double tick_seconds = 0.01;
  std::uint64_t seed = 7;
  bool async = false;
  double replay_speed = 0.0;  // 0 = unpaced
};

void add_schema_option(CLI::App* cmd, Options& o) {
  cmd->add_option("--schema", o.schema,
                  "Channel names in canonical order (default: the 5 reference "
                  "channels)")
      ->delimiter(',');
}

void add_tree_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--tree.min_leaf_size", o.tree_min_leaf,
                  "Minimum samples per leaf")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tree.max_depth", o.tree_max_depth,
                  "Maximum tree depth (0 = unbounded)");
  cmd->add_flag("--tree.prune", o.tree_prune, "Pessimistic-error pruning");
  cmd->add_option("--tree.confidence", o.tree_confidence,
                  "Pruning confidence factor");
}

void add_pipeline_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--sampler.windows", o.sampler_windows, "Window count W")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sampler.capacity", o.sampler_capacity,
                  "Samples per window C")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sampler.gap", o.sampler_gap, "Gap slots between windows G");
  cmd->add_option("--sampler.stale_ms", o.sampler_stale_ms,
                  "Force-refresh windows older than this (stream ms)");

  cmd->add_option("--labeler.k", o.labeler_k, "Cluster count");
  cmd->add_option("--labeler.restarts", o.labeler_restarts, "k-means restarts");
  cmd->add_option("--labeler.max_iter", o.labeler_max_iter,
                  "k-means iteration cap");
  cmd->add_option("--labeler.tol", o.labeler_tol, "k-means shift tolerance");
  cmd->add_option("--labeler.channels", o.labeler_channels,
                  "Channel subset for the assignment cost matrix")
      ->delimiter(',');

  cmd->add_option("--anomaly.level", o.anomaly_level,
                  "Credible level for acceptance intervals");
  cmd->add_option("--anomaly.mode", o.anomaly_mode, "mean|predictive")
      ->check(CLI::IsMember({"mean", "predictive"}));
  cmd->add_option("--anomaly.min_history", o.anomaly_min_history,
                  "Durations required before verdicts");
  cmd->add_option("--anomaly.variance_floor", o.anomaly_variance_floor,
                  "Lower bound on the duration variance estimate");

  cmd->add_option("--pipeline.retrain_every", o.retrain_every,
                  "Accepted samples between retrains");
  cmd->add_option("--pipeline.dataset_capacity", o.dataset_capacity,
                  "Training set size bound");
  cmd->add_option("--pipeline.train_fraction", o.train_fraction,
                  "Train split fraction");
  cmd->add_option("--pipeline.debounce", o.debounce,
                  "Consecutive agreeing labels required to switch task");
  cmd->add_option("--pipeline.tick_seconds", o.tick_seconds,
                  "Physical seconds per timestamp tick");
  cmd->add_option("--pipeline.seed", o.seed, "Pipeline RNG seed");
  cmd->add_flag("--pipeline.async", o.async,
                "Retrain on a worker thread instead of inline");
  cmd->add_option("--pipeline.replay_speed", o.replay_speed,
                  "Stream pacing multiplier (0 = as fast as possible)");
}

ts::ChannelSchema make_schema(const Options& o) {
  if (o.schema.empty()) return ts::default_schema();
  return ts::ChannelSchema(o.schema);
}

ts::TreeParams tree_params(const Options& o) {
  ts::TreeParams p;
  p.min_leaf_size = o.tree_min_leaf;
  p.max_depth = o.tree_max_depth;
  p.prune = o.tree_prune;
  p.confidence = o.tree_confidence;
  return p;
}

ts::PipelineConfig pipeline_config(const Options& o) {
  ts::PipelineConfig cfg;
  cfg.sampler.window_count = o.sampler_windows;
  cfg.sampler.window_capacity = o.sampler_capacity;
  cfg.sampler.gap = o.sampler_gap;
  cfg.sampler.stale_after = static_cast<ts::Timestamp>(
      std::llround(o.sampler_stale_ms / 1000.0 / o.tick_seconds));
  cfg.labeler.k = o.labeler_k;
  cfg.labeler.restarts = o.labeler_restarts;
  cfg.labeler.max_iter = o.labeler_max_iter;
  cfg.labeler.tol = o.labeler_tol;
  cfg.labeler.channels = o.labeler_channels;
  cfg.tree = tree_params(o);
  cfg.anomaly.level = o.anomaly_level;
  cfg.anomaly.mode = ts::parse_interval_mode(o.anomaly_mode);
  cfg.anomaly.min_history = o.anomaly_min_history;
  cfg.anomaly.variance_floor = o.anomaly_variance_floor;
  cfg.debounce_m = o.debounce;
  cfg.tick_seconds = o.tick_seconds;
  cfg.retrain_every = o.retrain_every;
  cfg.dataset_capacity = o.dataset_capacity;
  cfg.train_fraction = o.train_fraction;
  cfg.seed = o.seed;
  cfg.async = o.async;
  return cfg;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) ts::raise(ts::errc::io_error, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) ts::raise(ts::errc::io_error, "cannot write " + path);
  return out;
}

ts::Dataset load_dataset(const std::string& path, const ts::ChannelSchema& schema,
                         std::size_t capacity) {
  auto in = open_input(path);
  try {
    return ts::read_dataset(in, schema, capacity);
  } catch (const ts::Error& e) {
    ts::raise(e.code(), path + ": " + e.what());
  }
}

ts::ModelSnapshot load_model(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    ts::raise(ts::errc::malformed_line, path + ": " + e.what());
  }
  return ts::model_from_json(doc);
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const Options& o, const std::string& data_path,
              const std::string& model_path) {
  const auto schema = make_schema(o);
  const ts::Dataset ds = load_dataset(data_path, schema,
                                      std::numeric_limits<std::size_t>::max());
  auto [train_part, test_part] = ts::split_holdout(ds, o.train_fraction, o.seed);
  const ts::DecisionTree tree = ts::train(train_part, tree_params(o));
  const ts::EvalMetrics eval = ts::evaluate(tree, test_part);

  ts::ModelSnapshot snap{tree, 1, eval};
  auto out = open_output(model_path);
  out << ts::model_to_json(snap).dump(2) << '\n';
  if (!out) ts::raise(ts::errc::io_error, "failed writing " + model_path);

  std::cout << "samples: " << ds.size() << " (train " << train_part.size()
            << ", holdout " << test_part.size() << ")\n"
            << "holdout accuracy: " << eval.accuracy << '\n'
            << "leaves: " << tree.leaf_count() << "  depth: " << tree.depth()
            << '\n'
            << "mean predict latency: " << eval.mean_predict_latency * 1e6
            << " us\n"
            << "attribute contribution (path coverage):\n";
  for (const auto& [channel, rate] : ts::attribute_contribution(tree, ds))
    std::cout << "  " << channel << ": " << rate << '\n';
  std::cout << "model written to " << model_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const Options& o, const std::string& stream_path,
            const std::string& model_path, const std::string& dataset_path,
            const std::string& out_path) {
  ts::ModelSnapshot snap = load_model(model_path);
  const ts::ChannelSchema schema = snap.tree.schema();

  std::optional<ts::Dataset> historical;
  if (!dataset_path.empty())
    historical = load_dataset(dataset_path, schema, o.dataset_capacity);

  ts::PipelineEngine engine(pipeline_config(o), std::move(snap.tree),
                            std::move(snap.eval), std::move(historical));

  std::ifstream file;
  std::istream* in = &std::cin;
  if (stream_path != "-") {
    file = open_input(stream_path);
    in = &file;
  }
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file = open_output(out_path);
    out = &out_file;
  }

  *out << ts::kPipelineHeader << '\n';
  std::string line;
  std::size_t lineno = 0;
  std::optional<ts::Timestamp> prev_ts;
  bool skipped_header = false;
  while (std::getline(*in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!skipped_header && !ts::detail::looks_like_json(line)) {
      skipped_header = true;  // headered CSV stream
      try {
        ts::parse_csv_header(line, schema);
        continue;
      } catch (const ts::Error&) {
        // not a header; fall through and parse as a data row
      }
    }
    skipped_header = true;

    ts::detail::ParsedLine parsed;
    try {
      parsed = ts::detail::parse_line(line, schema);
    } catch (const ts::Error& e) {
      ts::raise(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }

    if (o.replay_speed > 0.0 && prev_ts) {
      const double gap_s = static_cast<double>(parsed.frame.ts - *prev_ts) *
                           o.tick_seconds / o.replay_speed;
      if (gap_s > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(gap_s));
    }
    prev_ts = parsed.frame.ts;

    for (const auto& row : engine.step(parsed.frame, parsed.label))
      *out << ts::pipeline_csv_row(row) << '\n';
  }
  for (const auto& row : engine.finish())
    *out << ts::pipeline_csv_row(row) << '\n';
  if (!*out) ts::raise(ts::errc::io_error, "failed writing report rows");

  const ts::RunStats stats = engine.stats();
  std::cerr << "frames: " << stats.frames << "  events: " << stats.events
            << "  abnormal: " << stats.abnormal_events << '\n';
  if (stats.labeled_frames > 0)
    std::cerr << "frame accuracy vs stream labels: " << stats.frame_accuracy()
              << '\n';
  std::cerr << "sampler accepts: " << stats.accepted_samples
            << "  retrains: " << stats.retrains
            << " (skipped " << stats.skipped_retrains << ", dropped "
            << stats.dropped_batches << ")"
            << "  final model version: " << engine.snapshot()->version << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Options& o, std::size_t cycles, double channel_sigma,
                 double duration_sigma, ts::Timestamp frame_period,
                 const std::string& out_path, const std::string& truth_path) {
  ts::CyclePlan plan;
  plan.frame_period = frame_period;
  plan.tick_seconds = o.tick_seconds;
  auto profiles = ts::default_profiles();
  for (auto& [label, profile] : profiles) {
    profile.channel_sigma = channel_sigma;
    profile.duration_sigma = duration_sigma;
  }
  const ts::SimStream sim = ts::gen_cycles(plan, profiles, cycles, o.seed);
  const auto schema = ts::default_schema();

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (out_path != "-") {
    out_file = open_output(out_path);
    out = &out_file;
  }
  for (const auto& sample : sim.frames)
    *out << ts::to_ndjson(sample, schema) << '\n';
  if (!*out) ts::raise(ts::errc::io_error, "failed writing stream");

  if (!truth_path.empty()) {
    auto truth = open_output(truth_path);
    truth << "label,start_id,start_ts,end_ts,processing_time_s\n";
    for (const auto& e : sim.truth)
      truth << ts::to_string(e.label) << ',' << e.start_id << ',' << e.start_ts
            << ',' << e.end_ts << ',' << *e.processing_time << '\n';
    if (!truth) ts::raise(ts::errc::io_error, "failed writing " + truth_path);
  }
  std::cerr << "frames: " << sim.frames.size() << "  events: " << sim.truth.size()
            << "  seed: " << o.seed << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct TruthEvent {
  ts::TaskLabel label;
  ts::Timestamp start_ts;
  ts::Timestamp end_ts;
};

std::vector<TruthEvent> load_truth(const std::string& path) {
  auto in = open_input(path);
  std::vector<TruthEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || lineno == 1) continue;  // header
    const auto f = ts::detail::split_csv(line);
    if (f.size() < 4)
      ts::raise(ts::errc::malformed_line,
                path + " line " + std::to_string(lineno) + ": expected 4+ fields");
    try {
      out.push_back(TruthEvent{ts::parse_task_label(f[0]),
                               static_cast<ts::Timestamp>(std::stoll(std::string(f[2]))),
                               static_cast<ts::Timestamp>(std::stoll(std::string(f[3])))});
    } catch (const std::exception&) {
      ts::raise(ts::errc::malformed_line,
                path + " line " + std::to_string(lineno) + ": bad field");
    }
  }
  return out;
}

int cmd_report(const std::string& rows_path, const std::string& truth_path) {
  auto in = open_input(rows_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = ts::parse_report_csv(buf.str());
  std::cout << ts::summary_text(ts::summarize(rows));

  if (!truth_path.empty()) {
    const auto truth = load_truth(truth_path);
    std::size_t judged = 0, correct = 0;
    for (const auto& row : rows) {
      for (const auto& t : truth) {
        if (row.ts >= t.start_ts && row.ts < t.end_ts) {
          ++judged;
          correct += (row.task == t.label);
          break;
        }
      }
    }
    std::cout << "rows matched to truth: " << judged << '/' << rows.size()
              << "  task accuracy: "
              << (judged ? static_cast<double>(correct) / judged : 0.0) << '\n';
  }
  return 0;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ts::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ts::errc::bad_config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time task recognition over wearable sensor streams"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Fit a decision tree on labeled data");
  std::string train_data, train_model = "model.json";
  train->add_option("--data", train_data, "Labeled NDJSON/CSV dataset")->required();
  train->add_option("--out", train_model, "Model output path");
  train->add_option("--pipeline.train_fraction", o.train_fraction,
                    "Train split fraction");
  train->add_option("--pipeline.seed", o.seed, "Split shuffle seed");
  add_schema_option(train, o);
  add_tree_options(train, o);
  train->set_config("--config");

  auto* run = app.add_subcommand("run", "Replay or pipe a stream through the pipeline");
  std::string run_stream = "-", run_model, run_dataset, run_out;
  run->add_option("--stream", run_stream, "Frame stream file, or '-' for stdin");
  run->add_option("--model", run_model, "Trained model file")->required();
  run->add_option("--dataset", run_dataset,
                  "Labeled dataset enabling pseudo-label retraining");
  run->add_option("--out", run_out, "Write report rows here instead of stdout");
  add_schema_option(run, o);
  add_tree_options(run, o);
  add_pipeline_options(run, o);
  run->set_config("--config");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic glove stream");
  std::size_t sim_cycles = 0;
  double sim_channel_sigma = 0.3, sim_duration_sigma = 0.1;
  ts::Timestamp sim_period = 2;
  std::string sim_out = "-", sim_truth;
  simulate->add_option("--cycles", sim_cycles, "Grafting cycles to generate")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "Generator seed");
  simulate->add_option("--channel-sigma", sim_channel_sigma, "Channel noise sigma");
  simulate->add_option("--duration-sigma", sim_duration_sigma,
                       "Task duration noise sigma (s)");
  simulate->add_option("--frame-period", sim_period, "Ticks between frames");
  simulate->add_option("--pipeline.tick_seconds", o.tick_seconds,
                       "Physical seconds per tick");
  simulate->add_option("--out", sim_out, "Stream output path, or '-' for stdout");
  simulate->add_option("--truth", sim_truth, "Ground-truth events CSV path");
  simulate->set_config("--config");

  auto* report = app.add_subcommand("report", "Summarize a report-row CSV");
  std::string report_rows, report_truth;
  report->add_option("--rows", report_rows, "Report CSV (from 'run')")->required();
  report->add_option("--truth", report_truth, "Ground-truth events CSV");
  report->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed())
    return guarded([&] { return cmd_train(o, train_data, train_model); });
  if (run->parsed())
    return guarded([&] { return cmd_run(o, run_stream, run_model, run_dataset, run_out); });
  if (simulate->parsed())
    return guarded([&] {
      return cmd_simulate(o, sim_cycles, sim_channel_sigma, sim_duration_sigma,
                          sim_period, sim_out, sim_truth);
    });
  return guarded([&] { return cmd_report(report_rows, report_truth); });
}
