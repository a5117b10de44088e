#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "tasksense/labeler.hpp"
#include "tasksense/simgen.hpp"

using namespace tasksense;

namespace {

using Points = std::vector<std::vector<double>>;

Points points_1d(std::initializer_list<double> xs) {
  Points p;
  for (double x : xs) p.push_back({x});
  return p;
}

// Per-task channel means over {RING3.Z, INDEX1.Z, INDEX2.Z, MIDDLE1.X,
// LITTLE2.Z}; the ground truth every recovery test measures against.
const std::map<TaskLabel, std::vector<double>> kTableCentroids = {
    {TaskLabel::ScionCutting, {1.167, 0.430, 0.634, -2.062, 1.093}},
    {TaskLabel::RootstockCutting, {3.293, 2.059, 2.816, 0.480, 2.723}},
    {TaskLabel::RootstockClipping, {3.612, 2.400, 3.400, -0.355, 2.805}},
    {TaskLabel::Joining, {2.800, 2.022, 2.822, -0.820, 2.133}}};

double l2(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Exhaustive assignment oracle: scan permutations in lexicographic order,
// keep the first strict improvement, so ties resolve to the smallest
// permutation exactly as the contract requires.
AssignmentSolution brute_force(const std::vector<std::vector<double>>& e) {
  std::vector<std::size_t> perm(e.size());
  std::iota(perm.begin(), perm.end(), 0);
  AssignmentSolution best;
  best.total_error = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) total += e[i][perm[i]];
    if (total < best.total_error) best = {perm, total};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::vector<double>> random_matrix(std::size_t n,
                                               detail::Rng& rng) {
  std::vector<std::vector<double>> e(n, std::vector<double>(n));
  for (auto& row : e)
    for (double& c : row) c = rng.u01() * 10.0;
  return e;
}

// cost_matrix + solve_assignment + per-point lookup: the label each frame
// would receive from a given clustering.
std::vector<TaskLabel> labels_through_assignment(
    const ClusterModel& model,
    const std::map<TaskLabel, std::vector<double>>& refs) {
  const CostMatrix costs = cost_matrix(refs, model);
  const AssignmentSolution sol = solve_assignment(costs);
  std::vector<TaskLabel> cluster_label(model.k(), TaskLabel::ScionCutting);
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    cluster_label[sol.x[i]] = costs.labels[i];
  std::vector<TaskLabel> out;
  out.reserve(model.assignments.size());
  for (std::size_t a : model.assignments) out.push_back(cluster_label[a]);
  return out;
}

}  // namespace

TEST_CASE("kmeans recovers the two-group 1-D optimum", "[labeler]") {
  const auto model = kmeans(points_1d({0.0, 1.0, 9.0, 10.0}), 2, 42);

  REQUIRE(model.k() == 2);
  std::vector<double> cs = {model.centroids[0][0], model.centroids[1][0]};
  std::sort(cs.begin(), cs.end());
  CHECK(cs[0] == 0.5);
  CHECK(cs[1] == 9.5);
  CHECK(model.inertia == 1.0);  // 4 points, each 0.5 from its centroid

  // points 0,1 share a cluster; 9,10 share the other
  CHECK(model.assignments[0] == model.assignments[1]);
  CHECK(model.assignments[2] == model.assignments[3]);
  CHECK(model.assignments[0] != model.assignments[2]);
}

TEST_CASE("kmeans with k points yields zero inertia", "[labeler]") {
  const Points pts = {{0.0, 0.0}, {5.0, 1.0}, {-3.0, 4.0}};
  const auto model = kmeans(pts, 3, 1);

  CHECK(model.inertia == 0.0);
  // each point is its own centroid
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(model.centroids[model.assignments[i]] == pts[i]);
}

TEST_CASE("kmeans input validation", "[labeler]") {
  const auto pts = points_1d({1.0, 2.0});
  CHECK_THROWS_MATCHES(
      kmeans(pts, 0, 1), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::bad_config; }));
  CHECK_THROWS_MATCHES(
      kmeans(pts, 3, 1), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::too_few_points; }));
  CHECK_THROWS_MATCHES(
      kmeans({{1.0}, {1.0, 2.0}}, 1, 1), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::dimension_mismatch; }));
  // one distinct value cannot seed two clusters
  CHECK_THROWS_MATCHES(
      kmeans(points_1d({3.0, 3.0, 3.0, 3.0}), 2, 1), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::degenerate_clusters; }));
}

TEST_CASE("kmeans recovers Table 1 centroids from a tight mixture",
          "[labeler]") {
  const auto schema = default_schema();
  auto profiles = default_profiles();

  Points pts;
  std::uint64_t seed = 7;
  for (auto& [label, profile] : profiles) {
    profile.channel_sigma = 0.1;
    for (const auto& s : gen_frames(profile, schema, 2000, seed++))
      pts.push_back(s.frame.values);
  }

  const auto model = kmeans(pts, 4, 7);
  REQUIRE(model.k() == 4);

  // every table column is matched by exactly one recovered centroid
  std::vector<char> used(4, 0);
  for (const auto& [label, ref] : kTableCentroids) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double d = l2(ref, model.centroids[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    INFO("label " << to_string(label) << " nearest centroid " << best_j
                  << " at L2 " << best);
    CHECK(best <= 0.05);
    CHECK_FALSE(used[best_j]);
    used[best_j] = 1;
  }
}

TEST_CASE("kmeans inertia is consistent with nearest-centroid assignments",
          "[labeler]") {
  detail::Rng rng(3);
  Points pts;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 40; ++i)
      pts.push_back({c * 5.0 + rng.gaussian(), c * 2.0 + rng.gaussian()});

  const auto model = kmeans(pts, 3, 9);
  double inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // assignment points at the nearest centroid (lowest index on ties)
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < model.k(); ++j) {
      const double d = l2(pts[i], model.centroids[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    CHECK(model.assignments[i] == best_j);
    inertia += best * best;
  }
  CHECK(model.inertia == Catch::Approx(inertia).epsilon(1e-9));
}

TEST_CASE("Lloyd iterations never increase inertia", "[labeler][properties]") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    detail::Rng rng(seed * 1234567 + 1);
    Points pts;
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 50; ++i)
        pts.push_back({(c % 2) * 6.0 + rng.gaussian(),
                       (c / 2) * 6.0 + rng.gaussian()});

    const auto model = kmeans(pts, 4, seed, 100, 0.0, 1);
    REQUIRE_FALSE(model.inertia_history.empty());
    for (std::size_t t = 0; t + 1 < model.inertia_history.size(); ++t) {
      const double a = model.inertia_history[t];
      const double b = model.inertia_history[t + 1];
      INFO("seed " << seed << " iteration " << t);
      CHECK(b <= a + 1e-9 * (1.0 + std::abs(a)));
    }
    // restarts keep the best of independent runs, never something worse
    const auto multi = kmeans(pts, 4, seed, 100, 0.0, 5);
    CHECK(multi.inertia <= model.inertia);
  }
}

TEST_CASE("reference centroids", "[labeler]") {
  ChannelSchema schema({"a", "b"});

  SECTION("one sample per label reproduces the sample") {
    Dataset ds(schema, 8);
    for (std::size_t c = 0; c < kTaskCount; ++c)
      ds.push(LabeledSample{{Timestamp(c), {double(c), double(c) + 10.0}},
                            static_cast<TaskLabel>(c),
                            Provenance::Historical});
    const auto refs = reference_centroids(ds);
    REQUIRE(refs.size() == kTaskCount);
    for (std::size_t c = 0; c < kTaskCount; ++c) {
      const auto& v = refs.at(static_cast<TaskLabel>(c));
      CHECK(v == std::vector<double>{double(c), double(c) + 10.0});
    }
  }

  SECTION("means average per label") {
    Dataset ds(schema, 16);
    for (std::size_t c = 0; c < kTaskCount; ++c) {
      ds.push(LabeledSample{{Timestamp(2 * c), {0.0, double(c)}},
                            static_cast<TaskLabel>(c), Provenance::Historical});
      ds.push(LabeledSample{{Timestamp(2 * c + 1), {4.0, double(c)}},
                            static_cast<TaskLabel>(c), Provenance::Historical});
    }
    const auto refs = reference_centroids(ds);
    for (std::size_t c = 0; c < kTaskCount; ++c)
      CHECK(refs.at(static_cast<TaskLabel>(c)) ==
            std::vector<double>{2.0, double(c)});
  }

  SECTION("a label with no samples is an error") {
    Dataset ds(schema, 8);
    ds.push(LabeledSample{{0, {1.0, 2.0}}, TaskLabel::ScionCutting,
                          Provenance::Historical});
    CHECK_THROWS_MATCHES(
        reference_centroids(ds), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == errc::missing_label; }));
  }

  SECTION("empty dataset is an error") {
    Dataset ds(schema, 8);
    CHECK_THROWS_AS(reference_centroids(ds), Error);
  }

  SECTION("large seeded mixture lands on the Table 1 columns") {
    const auto sim_schema = default_schema();
    Dataset ds(sim_schema, 20000);
    std::uint64_t seed = 7;
    for (const auto& [label, profile] : default_profiles())
      for (const auto& s : gen_frames(profile, sim_schema, 5000, seed++))
        ds.push(s);

    const auto refs = reference_centroids(ds);
    for (const auto& [label, expect] : kTableCentroids) {
      const auto& got = refs.at(label);
      for (std::size_t d = 0; d < expect.size(); ++d) {
        INFO(to_string(label) << " channel " << sim_schema.name(d));
        CHECK(std::abs(got[d] - expect[d]) <= 0.02);
      }
    }
  }
}

TEST_CASE("cost matrix geometry", "[labeler]") {
  SECTION("refs equal to centroids give diagonal zeros") {
    ClusterModel m;
    m.centroids = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}, {3.0, 5.0}};
    std::map<TaskLabel, std::vector<double>> refs;
    for (std::size_t c = 0; c < kTaskCount; ++c)
      refs[static_cast<TaskLabel>(c)] = m.centroids[c];

    const auto costs = cost_matrix(refs, m);
    REQUIRE(costs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(costs.e[i][i] == 0.0);
      CHECK(costs.labels[i] == static_cast<TaskLabel>(i));
      for (std::size_t j = 0; j < 4; ++j)
        if (j != i) CHECK(costs.e[i][j] > 0.0);
    }
  }

  SECTION("1-D refs {0, 10} against swapped centroids") {
    ClusterModel m;
    m.centroids = {{10.0}, {0.0}};
    const std::map<TaskLabel, std::vector<double>> refs = {
        {TaskLabel::ScionCutting, {0.0}}, {TaskLabel::RootstockCutting, {10.0}}};
    const auto costs = cost_matrix(refs, m);
    CHECK(costs.e == std::vector<std::vector<double>>{{10.0, 0.0}, {0.0, 10.0}});
  }

  SECTION("Table 1 columns under a known shuffle zero out on the shuffle") {
    // cluster j holds the centroid of label perm[j]
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    ClusterModel m;
    m.centroids.resize(4);
    for (std::size_t j = 0; j < 4; ++j)
      m.centroids[j] =
          kTableCentroids.at(static_cast<TaskLabel>(perm[j]));

    const auto costs = cost_matrix(kTableCentroids, m);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        if (perm[j] == i)
          CHECK(costs.e[i][j] == 0.0);
        else
          CHECK(costs.e[i][j] > 0.0);
      }
  }

  SECTION("restricting dimensions drops the excluded channels") {
    ClusterModel m;
    m.centroids = {{0.0, 100.0}, {3.0, -50.0}};
    const std::map<TaskLabel, std::vector<double>> refs = {
        {TaskLabel::ScionCutting, {0.0, 0.0}},
        {TaskLabel::RootstockCutting, {3.0, 0.0}}};
    const auto costs = cost_matrix(refs, m, {0});
    CHECK(costs.e[0][0] == 0.0);  // channel 1 ignored entirely
    CHECK(costs.e[0][1] == 3.0);
    CHECK(costs.e[1][0] == 3.0);
    CHECK(costs.e[1][1] == 0.0);
  }

  SECTION("shape errors") {
    ClusterModel m;
    m.centroids = {{0.0}, {1.0}};
    const std::map<TaskLabel, std::vector<double>> one_ref = {
        {TaskLabel::ScionCutting, {0.0}}};
    CHECK_THROWS_MATCHES(
        cost_matrix(one_ref, m), Error,
        Catch::Matchers::Predicate<Error>([](const Error& e) {
          return e.code() == errc::dimension_mismatch;
        }));

    const std::map<TaskLabel, std::vector<double>> wide_refs = {
        {TaskLabel::ScionCutting, {0.0, 1.0}},
        {TaskLabel::RootstockCutting, {1.0, 2.0}}};
    CHECK_THROWS_AS(cost_matrix(wide_refs, m), Error);
  }
}

TEST_CASE("solve_assignment on hand-checked matrices", "[labeler]") {
  SECTION("zero diagonal picks the identity") {
    CostMatrix m;
    m.labels = {TaskLabel::ScionCutting, TaskLabel::RootstockCutting,
                TaskLabel::RootstockClipping};
    m.e = {{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 0.0}};
    const auto sol = solve_assignment(m);
    CHECK(sol.x == std::vector<std::size_t>{0, 1, 2});
    CHECK(sol.total_error == 0.0);
  }

  SECTION("anti-diagonal zeros force the swap") {
    CostMatrix m;
    m.labels = {TaskLabel::ScionCutting, TaskLabel::RootstockCutting};
    m.e = {{10.0, 0.0}, {0.0, 10.0}};
    const auto sol = solve_assignment(m);
    CHECK(sol.x == std::vector<std::size_t>{1, 0});
    CHECK(sol.total_error == 0.0);
  }

  SECTION("all-equal costs resolve to the lexicographically smallest") {
    CostMatrix m;
    m.labels = {TaskLabel::ScionCutting, TaskLabel::RootstockCutting,
                TaskLabel::RootstockClipping};
    m.e = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    const auto sol = solve_assignment(m);
    CHECK(sol.x == std::vector<std::size_t>{0, 1, 2});
    CHECK(sol.total_error == 3.0);
  }

  SECTION("malformed matrices") {
    CostMatrix m;
    m.e = {{1.0, 2.0}, {3.0}};
    CHECK_THROWS_MATCHES(
        solve_assignment(m), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == errc::non_square; }));

    m.e = {{1.0, std::numeric_limits<double>::quiet_NaN()}, {1.0, 1.0}};
    CHECK_THROWS_MATCHES(
        solve_assignment(m), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == errc::non_finite; }));

    m.e = {};
    CHECK_THROWS_AS(solve_assignment(m), Error);
  }
}

TEST_CASE("solve_assignment matches the enumeration oracle exactly",
          "[labeler][properties]") {
  detail::Rng rng(11);
  for (int round = 0; round < 100; ++round) {
    for (std::size_t n : {std::size_t(4), std::size_t(6)}) {
      CostMatrix m;
      m.e = random_matrix(n, rng);
      const auto expect = brute_force(m.e);
      const auto got = solve_assignment(m);
      INFO("round " << round << " n " << n);
      CHECK(got.total_error == expect.total_error);  // zero tolerance
      CHECK(got.x == expect.x);
    }
  }
}

TEST_CASE("large assignment instances agree with enumeration",
          "[labeler][properties]") {
  // n > 8 leaves the enumeration path; the augmenting-path solver must land
  // on the same optimum (unique for continuous random costs).
  detail::Rng rng(23);
  for (int round = 0; round < 5; ++round) {
    CostMatrix m;
    m.e = random_matrix(9, rng);
    const auto expect = brute_force(m.e);
    const auto got = solve_assignment(m);
    INFO("round " << round);
    CHECK(got.total_error == Catch::Approx(expect.total_error).margin(1e-9));
    CHECK(got.x == expect.x);
  }
}

TEST_CASE("relabeling cluster indices leaves frame labels unchanged",
          "[labeler][properties]") {
  detail::Rng rng(5);
  ClusterModel model;
  model.centroids = {{0.0, 0.0}, {4.0, 1.0}, {1.0, 5.0}, {6.0, 6.0}};
  for (int i = 0; i < 40; ++i)
    model.assignments.push_back(rng.index(4));

  std::map<TaskLabel, std::vector<double>> refs;
  for (std::size_t c = 0; c < kTaskCount; ++c)
    refs[static_cast<TaskLabel>(c)] = {rng.u01() * 6.0, rng.u01() * 6.0};

  const auto base = labels_through_assignment(model, refs);

  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  ClusterModel permuted;
  permuted.centroids.resize(4);
  for (std::size_t j = 0; j < 4; ++j)
    permuted.centroids[perm[j]] = model.centroids[j];
  for (std::size_t a : model.assignments)
    permuted.assignments.push_back(perm[a]);

  CHECK(labels_through_assignment(permuted, refs) == base);
}

TEST_CASE("uniform scaling preserves the chosen permutation",
          "[labeler][properties]") {
  detail::Rng rng(17);

  SECTION("assignment argmin is scale-invariant") {
    for (int round = 0; round < 20; ++round) {
      CostMatrix m;
      m.e = random_matrix(5, rng);
      CostMatrix scaled = m;
      for (auto& row : scaled.e)
        for (double& c : row) c *= 2.0;  // exact in binary floating point

      const auto base = solve_assignment(m);
      const auto doubled = solve_assignment(scaled);
      CHECK(doubled.x == base.x);
      CHECK(doubled.total_error == 2.0 * base.total_error);
    }
  }

  SECTION("kmeans scales exactly under a power-of-two stretch") {
    Points pts;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 30; ++i)
        pts.push_back({c * 4.0 + rng.gaussian(), -c + rng.gaussian()});
    Points stretched = pts;
    for (auto& p : stretched)
      for (double& v : p) v *= 2.0;

    // tol=0 pins the iteration count so both runs walk identical paths
    const auto base = kmeans(pts, 3, 31, 40, 0.0, 2);
    const auto big = kmeans(stretched, 3, 31, 40, 0.0, 2);

    CHECK(big.assignments == base.assignments);
    CHECK(big.inertia == 4.0 * base.inertia);
    for (std::size_t j = 0; j < base.k(); ++j)
      for (std::size_t d = 0; d < base.centroids[j].size(); ++d)
        CHECK(big.centroids[j][d] == 2.0 * base.centroids[j][d]);
  }
}

TEST_CASE("pseudo_label on the zero-distance fixture", "[labeler]") {
  const auto schema = default_schema();
  std::vector<SensorFrame> snapshot;
  std::vector<TaskLabel> truth;
  Timestamp ts = 0;
  for (const auto& [label, centroid] : kTableCentroids) {
    snapshot.push_back({ts, centroid});
    ts += 2;
    truth.push_back(label);
  }

  const auto batch = pseudo_label(snapshot, schema, kTableCentroids, 99, {},
                                  &truth);
  REQUIRE(batch.samples.size() == snapshot.size());
  CHECK(batch.total_error == 0.0);
  REQUIRE(batch.error_rate.has_value());
  CHECK(*batch.error_rate == 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(batch.samples[i].label == truth[i]);
    CHECK(batch.samples[i].provenance == Provenance::PseudoLabeled);
    CHECK(batch.samples[i].frame.values == snapshot[i].values);
  }
}

TEST_CASE("pseudo_label degenerate snapshots fail loudly", "[labeler]") {
  const auto schema = default_schema();
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};

  std::vector<SensorFrame> repeated;
  for (Timestamp t = 0; t < 16; ++t) repeated.push_back({t, v});
  CHECK_THROWS_MATCHES(
      pseudo_label(repeated, schema, kTableCentroids, 1), Error,
      Catch::Matchers::Predicate<Error>([](const Error& e) {
        return e.code() == errc::degenerate_clusters ||
               e.code() == errc::too_few_points;
      }));

  std::vector<SensorFrame> tiny = {{0, v}, {1, v}, {2, v}};
  CHECK_THROWS_MATCHES(
      pseudo_label(tiny, schema, kTableCentroids, 1), Error,
      Catch::Matchers::Predicate<Error>([](const Error& e) {
        return e.code() == errc::too_few_points;
      }));

  // ground-truth vector of the wrong length
  std::vector<SensorFrame> snapshot;
  Timestamp ts = 0;
  for (const auto& [label, centroid] : kTableCentroids)
    snapshot.push_back({ts++, centroid});
  std::vector<TaskLabel> short_truth = {TaskLabel::ScionCutting};
  CHECK_THROWS_MATCHES(
      pseudo_label(snapshot, schema, kTableCentroids, 1, {}, &short_truth),
      Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
        return e.code() == errc::length_mismatch;
      }));

  // unknown channel in the cost-matrix subset
  LabelerParams params;
  params.channels = {"THUMB9.W"};
  CHECK_THROWS_MATCHES(
      pseudo_label(snapshot, schema, kTableCentroids, 1, params), Error,
      Catch::Matchers::Predicate<Error>([](const Error& e) {
        return e.code() == errc::missing_channel;
      }));
}

TEST_CASE("pseudo_label error rate on the seeded mixture", "[labeler]") {
  const auto schema = default_schema();
  std::vector<SensorFrame> snapshot;
  std::vector<TaskLabel> truth;
  std::uint64_t seed = 7;
  for (const auto& [label, profile] : default_profiles()) {
    for (const auto& s : gen_frames(profile, schema, 500, seed++)) {
      snapshot.push_back(s.frame);
      truth.push_back(s.label);
    }
  }

  const auto batch =
      pseudo_label(snapshot, schema, kTableCentroids, 7, {}, &truth);
  REQUIRE(batch.error_rate.has_value());
  INFO("error rate " << *batch.error_rate);
  CHECK(*batch.error_rate <= 0.10);
  CHECK(batch.total_error > 0.0);
  CHECK(batch.samples.size() == snapshot.size());
  for (const auto& s : batch.samples)
    CHECK(s.provenance == Provenance::PseudoLabeled);
}

TEST_CASE("labeler params validation", "[labeler]") {
  LabelerParams p;
  p.k = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.restarts = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.tol = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  CHECK_NOTHROW(p.validate());
}
