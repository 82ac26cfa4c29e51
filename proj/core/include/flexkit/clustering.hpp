#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flexkit {

/// Points of equal dimension stored row-major.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dims) : dims_(dims) {}
  PointSet(std::size_t dims, std::vector<double> coords);

  static PointSet from_values(std::span<const double> values);

  std::size_t dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_ == 0 ? 0 : coords_.size() / dims_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * dims_, dims_}; }
  void push_back(std::span<const double> point);

  double distance(std::size_t a, std::size_t b) const;

 private:
  std::size_t dims_ = 1;
  std::vector<double> coords_;
};

struct DbscanParams {
  double epsilon = 500.0;  // neighbourhood radius, same unit as the coordinates
  std::size_t min_points = 5;

  bool operator==(const DbscanParams&) const = default;
};

inline constexpr int kNoise = -1;

struct ClusterStats {
  std::size_t size = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct ClusterAssignment {
  std::vector<int> labels;            // kNoise or 0..cluster_count-1
  std::vector<ClusterStats> clusters;  // indexed by label; stats on the last coordinate

  std::size_t cluster_count() const noexcept { return clusters.size(); }
  std::size_t noise_count() const noexcept;
};

/// Density clustering with Euclidean distance.
///
/// A point is core when at least `min_points` points, itself included, lie
/// within `epsilon` (inclusive). Points are visited in ascending
/// lexicographic (coordinates, original index) order, so cluster IDs and
/// the cluster that claims a shared border point do not depend on the
/// input order. Throws `InvalidParameters` for epsilon <= 0, min_points < 2
/// or non-finite coordinates.
ClusterAssignment dbscan(const PointSet& points, const DbscanParams& params);

/// Recomputes `clusters` from `labels`.
std::vector<ClusterStats> cluster_stats(const PointSet& points, std::span<const int> labels);

/// Distance from each point to its k-th nearest other point.
std::vector<double> k_distances(const PointSet& points, std::size_t k);

/// Elbow of the descending k-distance curve.
///
/// Both axes are scaled to [0, 1] and the point farthest from the chord
/// joining the first and last points is returned (first index on ties).
/// A flat curve returns its constant value. Throws `TooFewPoints` below
/// k + 1 points.
double tune_epsilon(const PointSet& points, std::size_t k);

/// Mean silhouette over non-noise points. Singleton clusters score 0.
/// Throws `UndefinedScore` with fewer than two clusters.
double silhouette(const PointSet& points, const ClusterAssignment& assignment);

}  // namespace flexkit
