#include "flexkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "flexkit/error.hpp"

namespace flexkit {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    x = splitmix64(x);
    s = x;
  }
}

std::uint64_t Rng::next() noexcept {
  const auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % n;
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int DecisionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) return 0;
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left
                                                                                                       : nodes_[i].right);
  }
  return nodes_[i].label;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {  // children always follow parents
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

namespace {

double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const ForestParams& params, std::size_t max_features,
              std::uint64_t seed)
      : x_(x), y_(y), params_(params), max_features_(max_features), rng_(seed) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += static_cast<std::size_t>(y_[r] == 1);
    nodes_[static_cast<std::size_t>(index)].label = 2 * pos > rows.size() ? 1 : 0;

    if (depth >= params_.max_depth || rows.size() < params_.min_samples_split || pos == 0 || pos == rows.size()) {
      return index;
    }
    const Split split = best_split(rows, pos);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t pos_total) {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t i = 0; i < max_features_; ++i) {  // partial Fisher-Yates
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(features[i], features[j]);
    }

    const std::size_t n = rows.size();
    Split best;
    best.impurity = gini(pos_total, n);
    std::vector<std::pair<double, int>> column(n);
    for (std::size_t fi = 0; fi < max_features_; ++fi) {
      const std::size_t f = features[fi];
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<std::size_t>(column[i].second == 1);
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) continue;
        const double impurity = (static_cast<double>(nl) * gini(left_pos, nl) +
                                 static_cast<double>(nr) * gini(pos_total - left_pos, nr)) /
                                static_cast<double>(n);
        if (impurity < best.impurity - 1e-15) {
          best.impurity = impurity;
          best.feature = static_cast<int>(f);
          best.threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  const ForestParams& params_;
  std::size_t max_features_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RandomForest RandomForest::train(const Matrix& features, std::span<const int> labels, const ForestParams& params) {
  if (features.rows() == 0 || features.rows() != labels.size()) {
    throw Error(ErrorCode::InvalidParameters, "feature rows and labels must be non-empty and aligned");
  }
  if (params.n_trees == 0 || params.max_depth == 0) {
    throw Error(ErrorCode::InvalidParameters, "n_trees and max_depth must be positive");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorCode::InvalidParameters, "labels must be 0 or 1");
  }
  const std::size_t d = features.cols();
  std::size_t max_features = params.max_features.value_or(
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))))));
  max_features = std::clamp<std::size_t>(max_features, 1, d);

  const std::size_t n = features.rows();
  std::vector<DecisionTree> trees;
  trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = splitmix64(params.seed ^ splitmix64(t + 1));
    Rng sampler(tree_seed);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(sampler.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeBuilder builder(features, labels, params, max_features, sampler.next());
    trees.push_back(builder.build(std::move(rows)));
  }
  return RandomForest(params, d, std::move(trees));
}

double RandomForest::vote_fraction(std::span<const double> x) const {
  if (trees_.empty()) return 0.0;
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += static_cast<std::size_t>(t.predict(x) == 1);
  return static_cast<double>(ones) / static_cast<double>(trees_.size());
}

int RandomForest::predict(std::span<const double> x) const {
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += static_cast<std::size_t>(t.predict(x) == 1);
  return 2 * ones > trees_.size() ? 1 : 0;
}

ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted) {
  ClassificationMetrics m;
  m.rows = std::min(truth.size(), predicted.size());
  if (m.rows == 0) return m;
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    correct += static_cast<std::size_t>(truth[i] == predicted[i]);
    tp += static_cast<std::size_t>(truth[i] == 1 && predicted[i] == 1);
    fp += static_cast<std::size_t>(truth[i] == 0 && predicted[i] == 1);
    fn += static_cast<std::size_t>(truth[i] == 1 && predicted[i] == 0);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.rows);
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

}  // namespace flexkit
