#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tasksense/core.hpp"
#include "tasksense/detail/random.hpp"
#include "tasksense/errors.hpp"

namespace tasksense {

// ---------------------------------------------------------------------------
// k-means

struct ClusterModel {
  std::vector<std::vector<double>> centroids;  // k vectors in schema order
  std::vector<std::size_t> assignments;        // per-point cluster index
  double inertia = 0.0;                        // sum of squared distances
  std::size_t iterations = 0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration

  std::size_t k() const { return centroids.size(); }
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::size_t nearest_centroid(
    std::span<const double> p, const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = sq_dist(p, centroids[0]);
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = sq_dist(p, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

// k-means++ seeding: first centroid uniform, the rest sampled with
// probability proportional to the squared distance to the nearest chosen
// centroid. All-zero weights mean fewer than k distinct points.
inline std::vector<std::vector<double>> seed_centroids(
    const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.index(points.size())]);

  std::vector<double> d2(points.size());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = sq_dist(points[i], centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        best = std::min(best, sq_dist(points[i], centroids[j]));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0)
      raise(errc::degenerate_clusters, "fewer distinct points than clusters");
    double target = rng.u01() * total;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      target -= d2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

inline ClusterModel lloyd(const std::vector<std::vector<double>>& points,
                          std::size_t k, std::size_t max_iter, double tol,
                          Rng& rng) {
  const std::size_t dim = points[0].size();
  ClusterModel model;
  model.centroids = seed_centroids(points, k, rng);
  model.assignments.assign(points.size(), 0);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // assignment step
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      model.assignments[i] = nearest_centroid(points[i], model.centroids);
      inertia += sq_dist(points[i], model.centroids[model.assignments[i]]);
    }
    model.inertia_history.push_back(inertia);
    model.iterations = iter + 1;

    // update step
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      counts[model.assignments[i]]++;
      for (std::size_t d = 0; d < dim; ++d)
        next[model.assignments[i]][d] += points[i][d];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d)
        next[j][d] /= static_cast<double>(counts[j]);
    }
    // empty-cluster repair: reseed with the point farthest from its centroid,
    // never reusing a point within one repair pass
    std::vector<char> taken(points.size(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (taken[i]) continue;
        const double d = sq_dist(points[i], next[model.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = 1;
      next[j] = points[far];
    }

    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      shift = std::max(shift, std::sqrt(sq_dist(next[j], model.centroids[j])));
    model.centroids = std::move(next);
    if (shift < tol) break;
  }

  // final assignment against the converged centroids
  model.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    model.assignments[i] = nearest_centroid(points[i], model.centroids);
    model.inertia += sq_dist(points[i], model.centroids[model.assignments[i]]);
  }
  return model;
}

}  // namespace detail

// Seeded k-means++ Lloyd clustering; `restarts` independent runs keep the
// lowest-inertia model. Deterministic for a given (points, k, seed).
inline ClusterModel kmeans(const std::vector<std::vector<double>>& points,
                           std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100, double tol = 1e-6,
                           std::size_t restarts = 5) {
  if (k == 0) raise(errc::bad_config, "k must be positive");
  if (points.size() < k)
    raise(errc::too_few_points, "need at least k points to form k clusters");
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim)
      raise(errc::dimension_mismatch, "points differ in dimension");
  if (max_iter == 0) raise(errc::bad_config, "max_iter must be positive");
  if (restarts == 0) raise(errc::bad_config, "restarts must be positive");

  detail::Rng rng(seed);
  std::optional<ClusterModel> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    ClusterModel model = detail::lloyd(points, k, max_iter, tol, rng);
    if (!best || model.inertia < best->inertia) best = std::move(model);
  }
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// reference centroids

// Per-label mean vector over the dataset. Every label must be represented.
inline std::map<TaskLabel, std::vector<double>> reference_centroids(
    const Dataset& ds) {
  if (ds.empty()) raise(errc::empty_dataset, "reference_centroids of empty dataset");
  const std::size_t dim = ds.schema().size();
  std::array<std::vector<double>, kTaskCount> sums;
  std::array<std::size_t, kTaskCount> counts{};
  for (auto& s : sums) s.assign(dim, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto cls = static_cast<std::size_t>(ds[i].label);
    counts[cls]++;
    for (std::size_t d = 0; d < dim; ++d) sums[cls][d] += ds[i].frame.values[d];
  }
  std::map<TaskLabel, std::vector<double>> refs;
  for (std::size_t cls = 0; cls < kTaskCount; ++cls) {
    if (counts[cls] == 0)
      raise(errc::missing_label,
            "no samples labeled " + to_string(static_cast<TaskLabel>(cls)));
    for (std::size_t d = 0; d < dim; ++d)
      sums[cls][d] /= static_cast<double>(counts[cls]);
    refs.emplace(static_cast<TaskLabel>(cls), std::move(sums[cls]));
  }
  return refs;
}

// ---------------------------------------------------------------------------
// assignment problem

// e[i][j]: error between the reference centroid of the i-th label and
// sensory cluster j. Rows follow TaskLabel order.
struct CostMatrix {
  std::vector<TaskLabel> labels;       // row order
  std::vector<std::vector<double>> e;  // square, finite, >= 0

  std::size_t size() const { return e.size(); }
};

// L2 distance between each reference mean and each cluster centroid,
// optionally restricted to a subset of dimensions.
inline CostMatrix cost_matrix(
    const std::map<TaskLabel, std::vector<double>>& refs,
    const ClusterModel& clusters,
    const std::vector<std::size_t>& dims = {}) {
  if (refs.size() != clusters.k())
    raise(errc::dimension_mismatch, "label count does not match cluster count");
  CostMatrix m;
  for (const auto& [label, ref] : refs) {
    m.labels.push_back(label);
    std::vector<double> row;
    for (const auto& c : clusters.centroids) {
      if (ref.size() != c.size())
        raise(errc::dimension_mismatch, "reference/centroid width mismatch");
      double s = 0.0;
      if (dims.empty()) {
        s = detail::sq_dist(ref, c);
      } else {
        for (auto d : dims) {
          if (d >= ref.size())
            raise(errc::dimension_mismatch, "cost dimension out of range");
          const double diff = ref[d] - c[d];
          s += diff * diff;
        }
      }
      row.push_back(std::sqrt(s));
    }
    m.e.push_back(std::move(row));
  }
  return m;
}

struct AssignmentSolution {
  std::vector<std::size_t> x;  // label row -> cluster column, a bijection
  double total_error = 0.0;    // sum of e[i][x[i]] in row order
};

namespace detail {

// Exhaustive search in lexicographic permutation order; the first optimum
// encountered wins, giving the lexicographically smallest tie-break.
inline AssignmentSolution assign_enumerate(const std::vector<std::vector<double>>& e) {
  const std::size_t n = e.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best_perm;
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += e[i][perm[i]];
    if (total < best) {
      best = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {std::move(best_perm), best};
}

// Jonker-Volgenant shortest augmenting path (O(n^3)); used above the
// enumeration cutoff where k! is no longer cheap. Ties follow scan order
// rather than the lexicographic rule, which only matters for exactly tied
// optima.
inline AssignmentSolution assign_hungarian(const std::vector<std::vector<double>>& e) {
  const std::size_t n = e.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> way(n + 1, 0), match(n + 1, n);  // match[col] = row

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    std::size_t j0 = n;  // virtual start column
    match[n] = i;
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = e[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != n);
    do {  // augment along the path
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != n);
  }

  AssignmentSolution sol;
  sol.x.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) sol.x[match[j]] = j;
  sol.total_error = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.total_error += e[i][sol.x[i]];
  return sol;
}

}  // namespace detail

// Exact minimum-cost bijection label -> cluster (the Eq. 1-4 optimum).
// Enumeration up to 8x8 guarantees the lexicographically smallest optimal
// permutation; larger instances use the Jonker-Volgenant method.
inline AssignmentSolution solve_assignment(const CostMatrix& m) {
  const std::size_t n = m.e.size();
  if (n == 0) raise(errc::non_square, "empty cost matrix");
  for (const auto& row : m.e) {
    if (row.size() != n) raise(errc::non_square, "cost matrix is not square");
    for (double c : row)
      if (!std::isfinite(c)) raise(errc::non_finite, "cost matrix entry not finite");
  }
  return n <= 8 ? detail::assign_enumerate(m.e) : detail::assign_hungarian(m.e);
}

// ---------------------------------------------------------------------------
// pseudo-labeling

struct PseudoLabelBatch {
  std::vector<LabeledSample> samples;  // provenance = PseudoLabeled
  double total_error = 0.0;            // solved assignment objective
  std::optional<double> error_rate;    // disagreement vs. ground truth if known
};

struct LabelerParams {
  std::size_t k = kTaskCount;
  std::size_t restarts = 5;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::vector<ChannelId> channels;  // cost-matrix subset; empty = all

  void validate() const {
    if (k == 0) raise(errc::bad_config, "labeler.k must be positive");
    if (restarts == 0) raise(errc::bad_config, "labeler.restarts must be positive");
    if (max_iter == 0) raise(errc::bad_config, "labeler.max_iter must be positive");
    if (!(tol >= 0.0)) raise(errc::bad_config, "labeler.tol must be >= 0");
  }
};

// Cluster the snapshot, match clusters to the labeled reference centroids by
// solving the assignment problem, and emit one pseudo-labeled sample per
// frame. `truth` (if given) fills error_rate for test-mode evaluation.
inline PseudoLabelBatch pseudo_label(
    const std::vector<SensorFrame>& snapshot, const ChannelSchema& schema,
    const std::map<TaskLabel, std::vector<double>>& refs, std::uint64_t seed,
    const LabelerParams& params = {},
    const std::vector<TaskLabel>* truth = nullptr) {
  params.validate();
  if (snapshot.size() < params.k)
    raise(errc::too_few_points, "snapshot smaller than cluster count");
  if (truth && truth->size() != snapshot.size())
    raise(errc::length_mismatch, "ground truth length does not match snapshot");

  std::vector<std::vector<double>> points;
  points.reserve(snapshot.size());
  for (const auto& f : snapshot) points.push_back(channel_vector(f, schema));

  ClusterModel model =
      kmeans(points, params.k, seed, params.max_iter, params.tol, params.restarts);

  std::vector<std::size_t> dims;
  for (const auto& ch : params.channels) {
    const auto idx = schema.index_of(ch);
    if (!idx) raise(errc::missing_channel, ch);
    dims.push_back(*idx);
  }
  const CostMatrix costs = cost_matrix(refs, model, dims);
  const AssignmentSolution sol = solve_assignment(costs);

  // invert: cluster index -> task label
  std::vector<TaskLabel> cluster_label(params.k, TaskLabel::ScionCutting);
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    cluster_label[sol.x[i]] = costs.labels[i];

  PseudoLabelBatch batch;
  batch.total_error = sol.total_error;
  batch.samples.reserve(snapshot.size());
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const TaskLabel label = cluster_label[model.assignments[i]];
    batch.samples.push_back(
        LabeledSample{snapshot[i], label, Provenance::PseudoLabeled});
    if (truth) disagreements += (label != (*truth)[i]);
  }
  if (truth)
    batch.error_rate =
        static_cast<double>(disagreements) / static_cast<double>(snapshot.size());
  return batch;
}

}  // namespace tasksense
