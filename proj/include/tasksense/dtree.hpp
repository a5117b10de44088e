#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tasksense/core.hpp"
#include "tasksense/detail/random.hpp"
#include "tasksense/detail/stats.hpp"
#include "tasksense/errors.hpp"

namespace tasksense {

using ClassCounts = std::array<std::uint64_t, kTaskCount>;

struct TreeParams {
  std::size_t min_leaf_size = 1;
  std::size_t max_depth = 0;  // 0 = unbounded
  bool prune = false;         // pessimistic error pruning
  double confidence = 0.25;

  void validate() const {
    if (min_leaf_size < 1) raise(errc::bad_config, "min_leaf_size must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
      raise(errc::bad_config, "confidence must be in (0, 1)");
  }
};

// Shannon entropy in bits over the nonzero classes.
inline double entropy(const ClassCounts& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) raise(errc::empty_counts, "entropy of empty counts");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

struct SplitCandidate {
  double threshold = 0.0;
  double gain_ratio = 0.0;
  double gain = 0.0;
};

namespace detail {

// argmax count, ties to the lowest label index
inline TaskLabel majority_label(const ClassCounts& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kTaskCount; ++i)
    if (counts[i] > counts[best]) best = i;
  return static_cast<TaskLabel>(best);
}

inline bool is_pure(const ClassCounts& counts) {
  std::size_t nonzero = 0;
  for (auto c : counts) nonzero += (c != 0);
  return nonzero <= 1;
}

// Scans the midpoints between consecutive distinct values of one channel and
// returns the candidate with the highest gain ratio. `pairs` must be sorted
// by value. Candidates leaving fewer than min_leaf samples on either side
// are skipped.
inline std::optional<SplitCandidate> best_split_sorted(
    std::span<const std::pair<double, TaskLabel>> pairs, double parent_entropy,
    std::size_t min_leaf) {
  const std::size_t n = pairs.size();
  ClassCounts left{}, right{};
  for (const auto& [v, l] : pairs) right[static_cast<std::size_t>(l)]++;

  std::optional<SplitCandidate> best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto cls = static_cast<std::size_t>(pairs[i].second);
    left[cls]++;
    right[cls]--;
    if (pairs[i].first == pairs[i + 1].first) continue;
    const std::size_t nl = i + 1, nr = n - nl;
    if (nl < min_leaf || nr < min_leaf) continue;

    const double fl = static_cast<double>(nl) / static_cast<double>(n);
    const double fr = static_cast<double>(nr) / static_cast<double>(n);
    const double gain =
        parent_entropy - fl * entropy(left) - fr * entropy(right);
    if (gain < 0.0) continue;
    const double split_info = -fl * std::log2(fl) - fr * std::log2(fr);
    const double ratio = gain / split_info;
    if (!best || ratio > best->gain_ratio) {
      best = SplitCandidate{(pairs[i].first + pairs[i + 1].first) / 2.0, ratio,
                            gain};
    }
  }
  return best;
}

}  // namespace detail

// Best binary split of `samples` on one channel, or nullopt when all values
// are equal (NoSplit).
inline std::optional<SplitCandidate> best_split(
    std::span<const LabeledSample> samples, std::size_t channel,
    std::size_t min_leaf = 1) {
  if (samples.size() < 2)
    raise(errc::dataset_too_small, "best_split needs at least 2 samples");
  std::vector<std::pair<double, TaskLabel>> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples)
    pairs.emplace_back(s.frame.values[channel], s.label);
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  ClassCounts counts{};
  for (const auto& s : samples) counts[static_cast<std::size_t>(s.label)]++;
  return detail::best_split_sorted(pairs, entropy(counts), min_leaf);
}

// ---------------------------------------------------------------------------
// decision tree

struct TreeNode {
  std::int32_t channel = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  TaskLabel label = TaskLabel::ScionCutting;
  ClassCounts counts{};

  bool is_leaf() const { return channel < 0; }
};

// Binary C4.5-style tree over continuous channels: internal nodes test
// value <= threshold (left) / value > threshold (right), leaves carry the
// majority label and its class counts.
class DecisionTree {
public:
  DecisionTree() = default;
  DecisionTree(ChannelSchema schema, std::vector<TreeNode> nodes,
               std::uint64_t trained_on, TreeParams params)
      : schema_(std::move(schema)),
        nodes_(std::move(nodes)),
        trained_on_(trained_on),
        params_(params) {}

  const ChannelSchema& schema() const { return schema_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::uint64_t trained_on() const { return trained_on_; }
  const TreeParams& params() const { return params_; }
  bool empty() const { return nodes_.empty(); }

  TaskLabel predict(const SensorFrame& frame) const {
    if (frame.values.size() != schema_.size())
      raise(errc::schema_mismatch, "frame width does not match tree schema");
    return nodes_[walk(frame)].label;
  }

  // indices of the internal nodes tested on the way to the leaf
  void visit_path(const SensorFrame& frame,
                  const std::function<void(const TreeNode&)>& fn) const {
    std::int32_t i = 0;
    while (!nodes_[i].is_leaf()) {
      fn(nodes_[i]);
      i = frame.values[nodes_[i].channel] <= nodes_[i].threshold
              ? nodes_[i].left
              : nodes_[i].right;
    }
  }

  std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.is_leaf();
    return n;
  }

  std::size_t depth() const { return depth_below(0); }

private:
  std::size_t walk(const SensorFrame& frame) const {
    std::int32_t i = 0;
    while (!nodes_[i].is_leaf())
      i = frame.values[nodes_[i].channel] <= nodes_[i].threshold
              ? nodes_[i].left
              : nodes_[i].right;
    return static_cast<std::size_t>(i);
  }

  std::size_t depth_below(std::int32_t i) const {
    if (nodes_.empty() || nodes_[i].is_leaf()) return 0;
    return 1 + std::max(depth_below(nodes_[i].left), depth_below(nodes_[i].right));
  }

  ChannelSchema schema_;
  std::vector<TreeNode> nodes_;
  std::uint64_t trained_on_ = 0;
  TreeParams params_;
};

inline std::size_t leaf_count(const DecisionTree& tree) { return tree.leaf_count(); }

// ---------------------------------------------------------------------------
// training

namespace detail {

class TreeBuilder {
public:
  TreeBuilder(const Dataset& ds, const TreeParams& params)
      : ds_(ds), params_(params) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> indices(ds_.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    grow(indices, 0);
    return std::move(nodes_);
  }

private:
  // Returns the node index. Ties between equally good splits go to the
  // lowest channel index, then the smallest threshold; both fall out of the
  // strict `>` comparisons and the ascending scan order.
  std::int32_t grow(std::vector<std::size_t>& indices, std::size_t depth) {
    ClassCounts counts{};
    for (auto i : indices) counts[static_cast<std::size_t>(ds_[i].label)]++;

    const auto node_index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[node_index].counts = counts;
    nodes_[node_index].label = majority_label(counts);

    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    if (is_pure(counts) || depth_capped ||
        indices.size() < 2 * params_.min_leaf_size)
      return node_index;

    const double parent_entropy = entropy(counts);
    std::optional<SplitCandidate> best;
    std::size_t best_channel = 0;
    std::vector<std::pair<double, TaskLabel>> pairs(indices.size());
    for (std::size_t ch = 0; ch < ds_.schema().size(); ++ch) {
      for (std::size_t j = 0; j < indices.size(); ++j)
        pairs[j] = {ds_[indices[j]].frame.values[ch], ds_[indices[j]].label};
      std::sort(pairs.begin(), pairs.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      auto cand = best_split_sorted(pairs, parent_entropy, params_.min_leaf_size);
      if (cand && (!best || cand->gain_ratio > best->gain_ratio)) {
        best = cand;
        best_channel = ch;
      }
    }
    if (!best) return node_index;  // NoSplit on all channels

    std::vector<std::size_t> left, right;
    for (auto i : indices) {
      (ds_[i].frame.values[best_channel] <= best->threshold ? left : right)
          .push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    nodes_[node_index].channel = static_cast<std::int32_t>(best_channel);
    nodes_[node_index].threshold = best->threshold;
    const auto l = grow(left, depth + 1);
    nodes_[node_index].left = l;
    const auto r = grow(right, depth + 1);
    nodes_[node_index].right = r;
    return node_index;
  }

  const Dataset& ds_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
};

// Upper confidence bound on the error count of a leaf that misclassifies E
// of N samples (normal approximation to the binomial tail at the given
// confidence).
inline double pessimistic_errors(double errors, double n, double z) {
  if (n <= 0) return 0.0;
  const double f = errors / n;
  const double z2 = z * z;
  const double upper = (f + z2 / (2 * n) +
                        z * std::sqrt(f / n - f * f / n + z2 / (4 * n * n))) /
                       (1 + z2 / n);
  return upper * n;
}

// Bottom-up subtree replacement: collapse an internal node to a leaf when
// the leaf's pessimistic error does not exceed the subtree's.
inline double prune_subtree(std::vector<TreeNode>& nodes, std::int32_t i, double z) {
  TreeNode& node = nodes[i];
  std::uint64_t total = 0, errors = 0;
  for (std::size_t c = 0; c < kTaskCount; ++c) total += node.counts[c];
  errors = total - node.counts[static_cast<std::size_t>(majority_label(node.counts))];
  const double as_leaf =
      pessimistic_errors(static_cast<double>(errors), static_cast<double>(total), z);
  if (node.is_leaf()) return as_leaf;

  const double subtree = prune_subtree(nodes, node.left, z) +
                         prune_subtree(nodes, node.right, z);
  if (as_leaf <= subtree + 1e-12) {
    node.channel = -1;
    node.left = node.right = -1;
    node.label = majority_label(node.counts);
    return as_leaf;
  }
  return subtree;
}

// drop nodes that became unreachable after pruning, preserving preorder layout
inline std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes) {
  std::vector<TreeNode> out;
  struct Rec {
    const std::vector<TreeNode>& in;
    std::vector<TreeNode>& out;
    std::int32_t copy(std::int32_t i) {
      const auto at = static_cast<std::int32_t>(out.size());
      out.push_back(in[i]);
      if (!in[i].is_leaf()) {
        out[at].left = copy(in[i].left);
        out[at].right = copy(in[i].right);
      }
      return at;
    }
  };
  Rec rec{nodes, out};
  rec.copy(0);
  return out;
}

}  // namespace detail

// Top-down induction choosing the channel/threshold with the highest gain
// ratio; stops on purity, min_leaf_size, max_depth or when no channel
// splits. Deterministic for a given dataset and params.
inline DecisionTree train(const Dataset& ds, const TreeParams& params) {
  params.validate();
  if (ds.empty()) raise(errc::empty_dataset, "cannot train on empty dataset");
  if (ds.size() < params.min_leaf_size)
    raise(errc::dataset_too_small, "fewer samples than min_leaf_size");

  detail::TreeBuilder builder(ds, params);
  auto nodes = builder.build();
  if (params.prune) {
    const double z = detail::normal_quantile(1.0 - params.confidence);
    detail::prune_subtree(nodes, 0, z);
    nodes = detail::compact(nodes);
  }
  return DecisionTree(ds.schema(), std::move(nodes), ds.size(), params);
}

inline TaskLabel predict(const DecisionTree& tree, const SensorFrame& frame) {
  return tree.predict(frame);
}

// ---------------------------------------------------------------------------
// evaluation

struct EvalMetrics {
  double accuracy = 0.0;
  std::array<std::array<std::uint64_t, kTaskCount>, kTaskCount> confusion{};  // [true][predicted]
  double mean_predict_latency = 0.0;  // seconds

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& row : confusion)
      for (auto c : row) n += c;
    return n;
  }
};

inline EvalMetrics evaluate(const DecisionTree& tree, const Dataset& ds) {
  if (ds.empty()) raise(errc::empty_dataset, "cannot evaluate on empty dataset");
  EvalMetrics m;
  std::uint64_t hits = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const TaskLabel got = tree.predict(ds[i].frame);
    m.confusion[static_cast<std::size_t>(ds[i].label)][static_cast<std::size_t>(got)]++;
    hits += (got == ds[i].label);
  }
  const auto t1 = std::chrono::steady_clock::now();
  m.accuracy = static_cast<double>(hits) / static_cast<double>(ds.size());
  m.mean_predict_latency =
      std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(ds.size());
  return m;
}

// Per-channel path coverage: the fraction of samples whose root-to-leaf path
// tests the channel at least once. Sorted descending, ties by schema order.
inline std::vector<std::pair<ChannelId, double>> attribute_contribution(
    const DecisionTree& tree, const Dataset& ds) {
  if (ds.empty()) raise(errc::empty_dataset, "attribute_contribution needs samples");
  std::vector<std::uint64_t> hits(tree.schema().size(), 0);
  std::vector<char> seen(tree.schema().size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    tree.visit_path(ds[i].frame, [&](const TreeNode& n) {
      seen[static_cast<std::size_t>(n.channel)] = 1;
    });
    for (std::size_t ch = 0; ch < seen.size(); ++ch) hits[ch] += seen[ch];
  }
  std::vector<std::pair<ChannelId, double>> out;
  for (std::size_t ch = 0; ch < hits.size(); ++ch)
    out.emplace_back(tree.schema().name(ch),
                     static_cast<double>(hits[ch]) / static_cast<double>(ds.size()));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

// ---------------------------------------------------------------------------
// holdout split

// Seeded shuffle then split; the train part gets round(fraction * n)
// samples.
inline std::pair<Dataset, Dataset> split_holdout(const Dataset& ds,
                                                 double train_fraction,
                                                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    raise(errc::bad_config, "train_fraction must be in (0, 1)");
  if (ds.size() < 2)
    raise(errc::dataset_too_small, "holdout split needs at least 2 samples");

  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  detail::Rng rng(seed);
  detail::shuffle(order, rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(ds.size())));
  if (n_train == 0 || n_train == ds.size())
    raise(errc::dataset_too_small, "split would leave an empty part");

  Dataset train(ds.schema(), std::max<std::size_t>(n_train, 1));
  Dataset test(ds.schema(), ds.size() - n_train);
  for (std::size_t i = 0; i < n_train; ++i) train.push(ds[order[i]]);
  for (std::size_t i = n_train; i < ds.size(); ++i) test.push(ds[order[i]]);
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// persistence

namespace detail {

inline nlohmann::json node_to_json(const std::vector<TreeNode>& nodes,
                                   const ChannelSchema& schema, std::int32_t i) {
  const TreeNode& n = nodes[i];
  if (n.is_leaf()) {
    return nlohmann::json{{"label", to_string(n.label)},
                          {"counts", n.counts}};
  }
  return nlohmann::json{{"channel", schema.name(n.channel)},
                        {"threshold", n.threshold},
                        {"left", node_to_json(nodes, schema, n.left)},
                        {"right", node_to_json(nodes, schema, n.right)}};
}

inline std::int32_t node_from_json(const nlohmann::json& doc,
                                   const ChannelSchema& schema,
                                   std::vector<TreeNode>& nodes) {
  const auto at = static_cast<std::int32_t>(nodes.size());
  nodes.push_back(TreeNode{});
  if (doc.contains("label")) {
    nodes[at].label = parse_task_label(doc["label"].get<std::string>());
    if (doc.contains("counts")) {
      auto counts = doc["counts"].get<std::vector<std::uint64_t>>();
      if (counts.size() != kTaskCount)
        raise(errc::malformed_line, "leaf counts must have one entry per label");
      std::copy(counts.begin(), counts.end(), nodes[at].counts.begin());
    }
    return at;
  }
  const auto ch = schema.index_of(doc["channel"].get<std::string>());
  if (!ch) raise(errc::missing_channel, doc["channel"].get<std::string>());
  nodes[at].channel = static_cast<std::int32_t>(*ch);
  nodes[at].threshold = doc["threshold"].get<double>();
  const auto l = node_from_json(doc["left"], schema, nodes);
  nodes[at].left = l;
  const auto r = node_from_json(doc["right"], schema, nodes);
  nodes[at].right = r;
  return at;
}

}  // namespace detail

// Self-describing JSON document: schema, params, and the recursive node
// structure. Threshold round-trips are exact (shortest-round-trip doubles).
inline nlohmann::json tree_to_json(const DecisionTree& tree) {
  return nlohmann::json{
      {"format", "tasksense-tree"},
      {"schema", tree.schema().channels()},
      {"params",
       {{"min_leaf_size", tree.params().min_leaf_size},
        {"max_depth", tree.params().max_depth},
        {"prune", tree.params().prune},
        {"confidence", tree.params().confidence}}},
      {"trained_on", tree.trained_on()},
      {"root", detail::node_to_json(tree.nodes(), tree.schema(), 0)}};
}

inline DecisionTree tree_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "tasksense-tree")
    raise(errc::malformed_line, "not a tasksense tree document");
  ChannelSchema schema(doc["schema"].get<std::vector<std::string>>());
  TreeParams params;
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    params.min_leaf_size = p.value("min_leaf_size", params.min_leaf_size);
    params.max_depth = p.value("max_depth", params.max_depth);
    params.prune = p.value("prune", params.prune);
    params.confidence = p.value("confidence", params.confidence);
  }
  std::vector<TreeNode> nodes;
  detail::node_from_json(doc["root"], schema, nodes);
  return DecisionTree(std::move(schema), std::move(nodes),
                      doc.value("trained_on", std::uint64_t{0}), params);
}

}  // namespace tasksense
