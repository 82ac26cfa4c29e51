#include "flexkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flexkit/error.hpp"

namespace flexkit {

PointSet::PointSet(std::size_t dims, std::vector<double> coords) : dims_(dims), coords_(std::move(coords)) {
  if (dims_ == 0 || coords_.size() % dims_ != 0) {
    throw Error(ErrorCode::InvalidParameters, "coordinate count is not a multiple of the dimension");
  }
}

PointSet PointSet::from_values(std::span<const double> values) {
  return PointSet(1, std::vector<double>(values.begin(), values.end()));
}

void PointSet::push_back(std::span<const double> point) {
  if (point.size() != dims_) throw Error(ErrorCode::InvalidParameters, "point dimension mismatch");
  coords_.insert(coords_.end(), point.begin(), point.end());
}

double PointSet::distance(std::size_t a, std::size_t b) const {
  const auto pa = (*this)[a];
  const auto pb = (*this)[b];
  double acc = 0.0;
  for (std::size_t d = 0; d < dims_; ++d) acc += (pa[d] - pb[d]) * (pa[d] - pb[d]);
  return std::sqrt(acc);
}

std::size_t ClusterAssignment::noise_count() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

namespace {

constexpr int kUnvisited = -2;

// Neighbourhood queries over points sorted by their first coordinate: only
// the window |x0 - y0| <= eps can contain neighbours.
class SortedIndex {
 public:
  SortedIndex(const PointSet& points, double eps) : points_(points), eps_(eps) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto pa = points[a];
      const auto pb = points[b];
      for (std::size_t d = 0; d < pa.size(); ++d) {
        if (pa[d] != pb[d]) return pa[d] < pb[d];
      }
      return a < b;
    });
    first_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) first_[i] = points[order_[i]][0];
  }

  const std::vector<std::size_t>& order() const { return order_; }

  void neighbours(std::size_t p, std::vector<std::size_t>& out) const {
    out.clear();
    const double x = points_[p][0];
    // x - eps rounds, so widen the window a little; the distance test decides.
    const double slack = 1e-9 * (std::abs(x) + eps_);
    auto lo = std::lower_bound(first_.begin(), first_.end(), x - eps_ - slack);
    auto hi = std::upper_bound(first_.begin(), first_.end(), x + eps_ + slack);
    for (auto it = lo; it != hi; ++it) {
      const std::size_t q = order_[static_cast<std::size_t>(it - first_.begin())];
      if (points_.distance(p, q) <= eps_) out.push_back(q);
    }
  }

 private:
  const PointSet& points_;
  double eps_;
  std::vector<std::size_t> order_;
  std::vector<double> first_;
};

}  // namespace

std::vector<ClusterStats> cluster_stats(const PointSet& points, std::span<const int> labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  std::vector<ClusterStats> stats(static_cast<std::size_t>(max_label + 1));
  const std::size_t value_dim = points.dims() - 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& s = stats[static_cast<std::size_t>(labels[i])];
    const double v = points[i][value_dim];
    if (s.size == 0) {
      s.min = s.max = v;
    } else {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    s.mean += v;
    ++s.size;
  }
  for (auto& s : stats) {
    if (s.size > 0) s.mean /= static_cast<double>(s.size);
  }
  return stats;
}

ClusterAssignment dbscan(const PointSet& points, const DbscanParams& params) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw Error(ErrorCode::InvalidParameters, "epsilon must be positive");
  }
  if (params.min_points < 2) throw Error(ErrorCode::InvalidParameters, "min_points must be at least 2");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double c : points[i]) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidParameters, "non-finite coordinate");
    }
  }

  ClusterAssignment out;
  out.labels.assign(points.size(), kUnvisited);
  if (points.empty()) return out;

  const SortedIndex index(points, params.epsilon);
  std::vector<std::size_t> hood, queue;
  int next_label = 0;
  for (std::size_t p : index.order()) {
    if (out.labels[p] != kUnvisited) continue;
    index.neighbours(p, hood);
    if (hood.size() < params.min_points) {
      out.labels[p] = kNoise;
      continue;
    }
    const int label = next_label++;
    out.labels[p] = label;
    queue.assign(hood.begin(), hood.end());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t q = queue[qi];
      if (out.labels[q] == kNoise) out.labels[q] = label;  // border point
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = label;
      index.neighbours(q, hood);
      if (hood.size() < params.min_points) continue;
      for (std::size_t r : hood) {
        if (out.labels[r] == kUnvisited || out.labels[r] == kNoise) queue.push_back(r);
      }
    }
  }
  out.clusters = cluster_stats(points, out.labels);
  return out;
}

std::vector<double> k_distances(const PointSet& points, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidParameters, "k must be at least 1");
  if (points.size() < k + 1) throw Error(ErrorCode::TooFewPoints, "need at least k + 1 points");
  std::vector<double> out(points.size());
  std::vector<double> d;
  for (std::size_t i = 0; i < points.size(); ++i) {
    d.clear();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) d.push_back(points.distance(i, j));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    out[i] = d[k - 1];
  }
  return out;
}

double tune_epsilon(const PointSet& points, std::size_t k) {
  auto curve = k_distances(points, k);
  std::sort(curve.begin(), curve.end(), std::greater<>());
  const double hi = curve.front();
  const double lo = curve.back();
  if (curve.size() < 3 || !(hi > lo)) return curve.front();

  // Chord from (0, 1) to (1, 0) in normalized coordinates: x + y - 1 = 0.
  const double n = static_cast<double>(curve.size() - 1);
  std::size_t best = 0;
  double best_dist = -1.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double x = static_cast<double>(i) / n;
    const double y = (curve[i] - lo) / (hi - lo);
    const double dist = std::abs(x + y - 1.0) / std::sqrt(2.0);
    if (dist > best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return curve[best];
}

double silhouette(const PointSet& points, const ClusterAssignment& assignment) {
  const auto& labels = assignment.labels;
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  const auto k = static_cast<std::size_t>(max_label + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels) {
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  }
  const auto populated = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (populated < 2) throw Error(ErrorCode::UndefinedScore, "silhouette needs at least two clusters");

  double total = 0.0;
  std::size_t counted = 0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j == i || labels[j] < 0) continue;
      sums[static_cast<std::size_t>(labels[j])] += points.distance(i, j);
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    ++counted;
    if (sizes[own] <= 1) continue;  // singleton contributes 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(counted);
}

}  // namespace flexkit
