#include <gtest/gtest.h>

#include <random>
#include <set>

#include "flexkit/forest.hpp"

using namespace flexkit;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

/// Cooling thermostat: ON iff indoor > set + 0.5.
Data thermostat(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> indoor(20.0, 30.0), set(22.0, 27.0), outdoor(20.0, 38.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = indoor(rng), s = set(rng), o = outdoor(rng);
    const double row[] = {t, s, t - s, static_cast<double>(i % 2), o};
    d.x.append_row(row);
    d.y.push_back(t > s + 0.5 ? 1 : 0);
  }
  return d;
}

}  // namespace

TEST(Rng, ReproducibleAndBounded) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next();
    EXPECT_EQ(va, b.next());
    EXPECT_NE(va, c.next());
  }
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = a.below(10);
    ASSERT_LT(v, 10u);
    seen.insert(v);
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(DecisionTree, ManualTree) {
  DecisionTree t({{0, 1.5, 1, 2, 0}, {-1, 0, -1, -1, 0}, {-1, 0, -1, -1, 1}});
  const double lo[] = {1.5}, hi[] = {1.6};
  EXPECT_EQ(t.predict(lo), 0);  // <= threshold goes left
  EXPECT_EQ(t.predict(hi), 1);
  EXPECT_EQ(t.depth(), 1u);
}

TEST(RandomForest, SeparableThermostat) {
  const auto train = thermostat(1, 2000), test = thermostat(2, 1000);
  const auto forest = RandomForest::train(train.x, train.y, {});
  std::vector<int> pred;
  for (std::size_t r = 0; r < test.x.rows(); ++r) pred.push_back(forest.predict(test.x.row(r)));
  EXPECT_GE(classification_metrics(test.y, pred).accuracy, 0.99);
  EXPECT_EQ(forest.trees().size(), 100u);
  for (const auto& t : forest.trees()) EXPECT_LE(t.depth(), 12u);
}

TEST(RandomForest, SameSeedBitIdentical) {
  const auto d = thermostat(4, 500);
  ForestParams p;
  p.n_trees = 25;
  p.seed = 99;
  EXPECT_EQ(RandomForest::train(d.x, d.y, p), RandomForest::train(d.x, d.y, p));
  ForestParams q = p;
  q.seed = 100;
  EXPECT_NE(RandomForest::train(d.x, d.y, p), RandomForest::train(d.x, d.y, q));
}

TEST(RandomForest, VoteIsMajorityWithTieToZero) {
  DecisionTree zero({{-1, 0, -1, -1, 0}}), one({{-1, 0, -1, -1, 1}});
  const double x[] = {0.0};
  EXPECT_EQ(RandomForest({}, 1, {zero, one}).predict(x), 0);
  EXPECT_EQ(RandomForest({}, 1, {zero, one, one}).predict(x), 1);
  EXPECT_DOUBLE_EQ(RandomForest({}, 1, {zero, one, one, one}).vote_fraction(x), 0.75);
}

TEST(ClassificationMetrics, HandCounts) {
  // tp=3 fp=1 fn=2 tn=4
  const std::vector<int> truth{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const std::vector<int> pred{1, 1, 1, 0, 0, 1, 0, 0, 0, 0};
  const auto m = classification_metrics(truth, pred);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 0.75 * 0.6 / (0.75 + 0.6));
  EXPECT_EQ(m.rows, 10u);
}
