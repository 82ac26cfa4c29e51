#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "flexkit/clustering.hpp"
#include "flexkit/error.hpp"
#include "oracles.hpp"

using namespace flexkit;

namespace {

using Rows = std::vector<std::vector<double>>;

PointSet to_points(const Rows& rows) {
  PointSet p(rows.front().size());
  for (const auto& r : rows) p.push_back(r);
  return p;
}

Rows blobs(std::mt19937_64& rng, std::size_t dims, std::size_t n, double spread) {
  std::uniform_int_distribution<int> centre_count(1, 4);
  std::uniform_real_distribution<double> centre(0.0, 5000.0);
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_real_distribution<double> uniform(0.0, 5000.0);
  Rows centres(static_cast<std::size_t>(centre_count(rng)));
  for (auto& c : centres) {
    c.resize(dims);
    for (auto& v : c) v = centre(rng);
  }
  Rows out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(dims);
    if (i % 10 == 9) {
      for (auto& v : p) v = uniform(rng);
    } else {
      const auto& c = centres[i % centres.size()];
      for (std::size_t d = 0; d < dims; ++d) p[d] = c[d] + noise(rng);
    }
    // coarse rounding creates exact ties and boundary distances
    for (auto& v : p) v = std::round(v / 10.0) * 10.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Dbscan, TwoSeparatedBlobs) {
  Rows rows;
  for (int i = 0; i < 10; ++i) rows.push_back({100.0 + (i % 3) - 1.0});
  for (int i = 0; i < 10; ++i) rows.push_back({2000.0 + (i % 3) - 1.0});
  const auto a = dbscan(to_points(rows), {50.0, 5});
  EXPECT_EQ(a.cluster_count(), 2u);
  EXPECT_EQ(a.noise_count(), 0u);
  EXPECT_EQ(a.clusters[0].size, 10u);
  EXPECT_NEAR(a.clusters[0].mean, 100.0, 1.0);
}

TEST(Dbscan, SinglePointIsNoise) {
  const auto a = dbscan(PointSet::from_values(std::vector<double>{42.0}), {500.0, 5});
  EXPECT_EQ(a.labels, std::vector<int>{kNoise});
  EXPECT_EQ(a.cluster_count(), 0u);
}

TEST(Dbscan, InclusiveEpsilonCountsSelf) {
  // three points exactly eps apart: each centre sees itself and two others
  const auto a = dbscan(PointSet::from_values(std::vector<double>{0.0, 500.0, 1000.0}), {500.0, 3});
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0}));
}

TEST(Dbscan, NeighbourAtRoundedWindowEdge) {
  // 0.31 - 0.3 rounds above 0.01 although |0.31 - 0.01| <= 0.3
  const auto a = dbscan(PointSet::from_values(std::vector<double>{0.01, 0.31}), {0.3, 2});
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0}));
}

TEST(Dbscan, SharedBorderPointStaysWithFirstCluster) {
  // 0.0 borders the cores -0.95 and 0.95 but has only three neighbours
  const auto a =
      dbscan(PointSet::from_values(std::vector<double>{-1.8, -1.7, -0.95, 0.0, 0.95, 1.7, 1.8}), {1.0, 4});
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0, 0, 1, 1, 1}));
  // the later cluster ends up below min_points; relabelling would do the same to the first
  EXPECT_EQ(a.clusters[1].size, 3u);
}

TEST(Dbscan, InvalidParameters) {
  const auto p = PointSet::from_values(std::vector<double>{1.0, 2.0});
  EXPECT_THROW(dbscan(p, {0.0, 5}), Error);
  EXPECT_THROW(dbscan(p, {1.0, 1}), Error);
}

TEST(Dbscan, MatchesTextbookOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dims = trial % 2 + 1;
    const Rows rows = blobs(rng, dims, 20 + static_cast<std::size_t>(trial) * 4, 150.0);
    for (DbscanParams params : {DbscanParams{500.0, 5}, DbscanParams{200.0, 3}, DbscanParams{100.0, 2}}) {
      const auto got = dbscan(to_points(rows), params);
      const auto want = oracle::textbook_dbscan(rows, params.epsilon, params.min_points, oracle::lexicographic_order(rows));
      ASSERT_TRUE(oracle::same_partition(got.labels, want)) << "trial " << trial << " eps " << params.epsilon;
    }
  }
}

TEST(Dbscan, PermutationInvariant) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Rows rows = blobs(rng, trial % 2 + 1, 100, 200.0);
    const auto base = dbscan(to_points(rows), {400.0, 5});
    std::vector<std::size_t> perm(rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Rows shuffled;
    for (auto i : perm) shuffled.push_back(rows[i]);
    const auto moved = dbscan(to_points(shuffled), {400.0, 5});
    std::vector<int> back(rows.size());
    for (std::size_t j = 0; j < perm.size(); ++j) back[perm[j]] = moved.labels[j];
    EXPECT_EQ(back, base.labels);  // lexicographic visiting makes even the IDs stable
  }
}

TEST(Dbscan, NonNoiseClustersReachMinPoints) {
  std::mt19937_64 rng(12);
  const Rows rows = blobs(rng, 1, 150, 300.0);
  const auto a = dbscan(to_points(rows), {300.0, 5});
  for (const auto& c : a.clusters) EXPECT_GE(c.size, 5u);
  EXPECT_EQ(a.labels.size(), rows.size());
}

TEST(TuneEpsilon, UniformGrid) {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(7.5 * i);
  EXPECT_NEAR(tune_epsilon(PointSet::from_values(v), 1), 7.5, 1e-9);
}

TEST(TuneEpsilon, TwoScaleMatchesChordOracle) {
  std::vector<double> v;
  for (int i = 0; i < 60; ++i) v.push_back(i * 1.0);
  for (int i = 1; i <= 15; ++i) v.push_back(59.0 + i * 100.0);
  const auto points = PointSet::from_values(v);
  for (std::size_t k : {1u, 3u, 5u}) {
    Rows rows;
    for (double x : v) rows.push_back({x});
    const double want = oracle::chord_elbow(oracle::kth_distances(rows, k));
    const double got = tune_epsilon(points, k);
    EXPECT_DOUBLE_EQ(got, want);
    if (k == 1) {
      EXPECT_GT(got, 1.0 - 1e-12);
      EXPECT_LT(got, 100.0);
    }
  }
}

TEST(TuneEpsilon, TooFewPoints) {
  try {
    tune_epsilon(PointSet::from_values(std::vector<double>{1, 2, 3}), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(Silhouette, PointMasses) {
  std::vector<double> v(10, 0.0);
  v.insert(v.end(), 10, 1000.0);
  const auto p = PointSet::from_values(v);
  EXPECT_GT(silhouette(p, dbscan(p, {50.0, 3})), 0.99);
}

TEST(Silhouette, SingleClusterUndefined) {
  const auto p = PointSet::from_values(std::vector<double>(8, 3.0));
  try {
    silhouette(p, dbscan(p, {1.0, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedScore);
  }
}

TEST(Silhouette, MatchesDirectFormula) {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> lab(-1, 3);
  for (std::size_t dims : {1u, 2u, 3u}) {
    Rows rows(60, std::vector<double>(dims));
    for (auto& r : rows)
      for (auto& x : r) x = u(rng);
    ClusterAssignment a;
    for (std::size_t i = 0; i < 60; ++i) a.labels.push_back(i < 4 ? static_cast<int>(i) : lab(rng));
    a.clusters = cluster_stats(to_points(rows), a.labels);
    EXPECT_NEAR(silhouette(to_points(rows), a), oracle::silhouette(rows, a.labels), 1e-9);
  }
}

TEST(Silhouette, TranslationAndScaleInvariant) {
  std::mt19937_64 rng(61);
  Rows rows = blobs(rng, 2, 80, 100.0);
  const auto a = dbscan(to_points(rows), {300.0, 4});
  if (a.cluster_count() < 2) GTEST_SKIP() << "fixture produced one cluster";
  const double base = silhouette(to_points(rows), a);
  for (auto& r : rows)
    for (auto& x : r) x = 3.5 * x + 1234.0;
  ClusterAssignment moved = a;
  moved.clusters = cluster_stats(to_points(rows), moved.labels);
  EXPECT_NEAR(silhouette(to_points(rows), moved), base, 1e-9);
}
