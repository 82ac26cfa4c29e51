#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flexkit/matrix.hpp"

namespace flexkit {

/// SplitMix64 step; used to derive independent per-tree seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Small deterministic generator (xoshiro256**). Unlike the standard
/// distributions its bounded draws are identical on every platform, which
/// keeps trained forests bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;
  std::uint64_t next() noexcept;
  /// Uniform in [0, n) without modulo bias; n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  /// Features tried per split; defaults to floor(sqrt(d)), at least 1.
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 42;
  bool bootstrap = true;

  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // taken when x[feature] <= threshold
  int right = -1;
  int label = 0;   // majority class at this node

  bool operator==(const TreeNode&) const = default;
};

/// Binary CART classifier with Gini impurity.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  int predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(ForestParams params, std::size_t n_features, std::vector<DecisionTree> trees)
      : params_(params), n_features_(n_features), trees_(std::move(trees)) {}

  /// Fits on rows of `features` with 0/1 `labels`. Trees are grown on
  /// bootstrap samples, trying `max_features` random features per node.
  static RandomForest train(const Matrix& features, std::span<const int> labels, const ForestParams& params);

  /// Majority vote; an exact tie predicts 0.
  int predict(std::span<const double> x) const;
  /// Share of trees voting 1.
  double vote_fraction(std::span<const double> x) const;

  const ForestParams& params() const noexcept { return params_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  bool operator==(const RandomForest&) const = default;

 private:
  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<DecisionTree> trees_;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // positive class = 1
  std::size_t rows = 0;

  bool operator==(const ClassificationMetrics&) const = default;
};

ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted);

}  // namespace flexkit
