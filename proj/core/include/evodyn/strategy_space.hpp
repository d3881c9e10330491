#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace evodyn {

// One heritable trait vector, e.g. q = (q1, q2) with q1 an intrinsic birth
// rate and q2 an intrinsic mortality rate.
struct StrategyPoint {
  std::vector<double> coords;
};

bool operator==(const StrategyPoint& a, const StrategyPoint& b);

enum class MetricKind { euclidean, custom_table };

// Finite discretization of a compact trait space: an ordered list of distinct
// points inside an axis-aligned box, with a metric. Immutable after
// construction; share read-only via SpacePtr.
class StrategySpace {
 public:
  StrategySpace(std::vector<StrategyPoint> points,
                std::vector<std::array<double, 2>> bounds,
                MetricKind metric = MetricKind::euclidean,
                std::vector<std::vector<double>> distance_table = {},
                std::string id = {});

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_[0].coords.size(); }
  const StrategyPoint& point(std::size_t i) const;
  const std::vector<StrategyPoint>& points() const { return points_; }
  double distance(std::size_t i, std::size_t j) const;
  MetricKind metric_kind() const { return metric_; }
  const std::vector<std::array<double, 2>>& bounds() const { return bounds_; }
  // Diagonal of the bounding box; upper bound for any euclidean distance.
  double box_diameter() const;
  const std::string& id() const { return id_; }

 private:
  std::vector<StrategyPoint> points_;
  std::vector<std::array<double, 2>> bounds_;
  MetricKind metric_;
  std::vector<std::vector<double>> table_;
  std::string id_;
};

using SpacePtr = std::shared_ptr<const StrategySpace>;

// Regular lattice over `bounds` with `resolution[a]` points per axis
// (endpoints included; a single-point axis sits at the lower bound).
// Ordering is row-major with the last axis fastest. Points failing `mask`
// are dropped; an empty result is an error.
SpacePtr make_grid(const std::vector<std::array<double, 2>>& bounds,
                   const std::vector<int>& resolution,
                   const std::function<bool(const StrategyPoint&)>& mask = nullptr);

// Explicit finite space; ordering preserved, duplicates rejected.
SpacePtr make_finite(std::vector<StrategyPoint> points, std::string id = {});

// Finite space with a caller-supplied distance table (symmetric, zero
// diagonal, positive off-diagonal).
SpacePtr make_finite_with_metric(std::vector<StrategyPoint> points,
                                 std::vector<std::vector<double>> distance_table,
                                 std::string id = {});

}  // namespace evodyn
