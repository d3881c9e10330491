#include "evodyn/strategy_space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evodyn {

bool operator==(const StrategyPoint& a, const StrategyPoint& b) {
  return a.coords == b.coords;
}

namespace {

double euclidean(const StrategyPoint& a, const StrategyPoint& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.coords.size(); ++k) {
    const double d = a.coords[k] - b.coords[k];
    s += d * d;
  }
  return std::sqrt(s);
}

std::string synth_id(const std::string& tag, std::size_t n, std::size_t d) {
  std::ostringstream os;
  os << tag << "(n=" << n << ",dim=" << d << ")";
  return os.str();
}

}  // namespace

StrategySpace::StrategySpace(std::vector<StrategyPoint> points,
                             std::vector<std::array<double, 2>> bounds,
                             MetricKind metric,
                             std::vector<std::vector<double>> distance_table,
                             std::string id)
    : points_(std::move(points)),
      bounds_(std::move(bounds)),
      metric_(metric),
      table_(std::move(distance_table)),
      id_(std::move(id)) {
  if (points_.empty()) throw std::invalid_argument("empty strategy space");
  const std::size_t d = points_[0].coords.size();
  if (d == 0) throw std::invalid_argument("strategy points need at least one coordinate");
  if (bounds_.size() != d) throw std::invalid_argument("bounds dimension mismatch");
  for (const auto& p : points_) {
    if (p.coords.size() != d) throw std::invalid_argument("mixed point dimensions");
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(p.coords[k])) throw std::invalid_argument("non-finite strategy coordinate");
      if (p.coords[k] < bounds_[k][0] - 1e-12 || p.coords[k] > bounds_[k][1] + 1e-12)
        throw std::invalid_argument("strategy point outside bounds");
    }
  }
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      if (points_[i] == points_[j]) throw std::invalid_argument("duplicate strategy point");
  if (metric_ == MetricKind::custom_table) {
    const std::size_t n = points_.size();
    if (table_.size() != n) throw std::invalid_argument("distance table size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (table_[i].size() != n) throw std::invalid_argument("distance table not square");
      if (table_[i][i] != 0.0) throw std::invalid_argument("distance table diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(table_[i][j]) || table_[i][j] < 0.0)
          throw std::invalid_argument("distance table entries must be finite and nonnegative");
        if (table_[i][j] != table_[j][i]) throw std::invalid_argument("distance table not symmetric");
        if (i != j && table_[i][j] == 0.0)
          throw std::invalid_argument("distinct points at distance zero");
      }
    }
  }
  if (id_.empty()) id_ = synth_id("space", points_.size(), d);
}

const StrategyPoint& StrategySpace::point(std::size_t i) const {
  if (i >= points_.size()) throw std::out_of_range("point index out of range");
  return points_[i];
}

double StrategySpace::distance(std::size_t i, std::size_t j) const {
  if (i >= points_.size() || j >= points_.size())
    throw std::out_of_range("point index out of range");
  if (metric_ == MetricKind::custom_table) return table_[i][j];
  return euclidean(points_[i], points_[j]);
}

double StrategySpace::box_diameter() const {
  double s = 0.0;
  for (const auto& b : bounds_) {
    const double w = b[1] - b[0];
    s += w * w;
  }
  return std::sqrt(s);
}

SpacePtr make_grid(const std::vector<std::array<double, 2>>& bounds,
                   const std::vector<int>& resolution,
                   const std::function<bool(const StrategyPoint&)>& mask) {
  if (bounds.empty()) throw std::invalid_argument("grid needs at least one axis");
  if (resolution.size() != bounds.size())
    throw std::invalid_argument("resolution size must match bounds");
  for (std::size_t a = 0; a < bounds.size(); ++a) {
    if (resolution[a] < 1) throw std::invalid_argument("resolution must be >= 1 per axis");
    if (!(bounds[a][0] <= bounds[a][1])) throw std::invalid_argument("invalid axis bounds");
  }

  const std::size_t d = bounds.size();
  std::vector<StrategyPoint> pts;
  std::vector<int> idx(d, 0);
  for (;;) {
    StrategyPoint p;
    p.coords.resize(d);
    for (std::size_t a = 0; a < d; ++a) {
      const int res = resolution[a];
      if (res == 1) {
        p.coords[a] = bounds[a][0];
      } else if (idx[a] == res - 1) {
        p.coords[a] = bounds[a][1];  // hit the upper endpoint exactly
      } else {
        p.coords[a] = bounds[a][0] + idx[a] * (bounds[a][1] - bounds[a][0]) / (res - 1);
      }
    }
    if (!mask || mask(p)) pts.push_back(std::move(p));
    // advance row-major counter, last axis fastest
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++idx[a] < resolution[a]) break;
      idx[a] = 0;
      if (a == 0) {
        if (pts.empty()) throw std::invalid_argument("empty strategy space");
        std::ostringstream os;
        os << "grid(";
        for (std::size_t k = 0; k < d; ++k)
          os << (k ? "x" : "") << resolution[k];
        os << ",n=" << pts.size() << ")";
        return std::make_shared<StrategySpace>(std::move(pts), bounds,
                                               MetricKind::euclidean,
                                               std::vector<std::vector<double>>{}, os.str());
      }
    }
  }
}

namespace {

std::vector<std::array<double, 2>> hull_bounds(const std::vector<StrategyPoint>& pts) {
  if (pts.empty()) throw std::invalid_argument("empty strategy space");
  const std::size_t d = pts[0].coords.size();
  std::vector<std::array<double, 2>> b(d);
  for (std::size_t k = 0; k < d; ++k) b[k] = {pts[0].coords[k], pts[0].coords[k]};
  for (const auto& p : pts) {
    if (p.coords.size() != d) throw std::invalid_argument("mixed point dimensions");
    for (std::size_t k = 0; k < d; ++k) {
      b[k][0] = std::min(b[k][0], p.coords[k]);
      b[k][1] = std::max(b[k][1], p.coords[k]);
    }
  }
  return b;
}

}  // namespace

SpacePtr make_finite(std::vector<StrategyPoint> points, std::string id) {
  auto bounds = hull_bounds(points);
  if (id.empty()) id = synth_id("finite", points.size(), bounds.size());
  return std::make_shared<StrategySpace>(std::move(points), std::move(bounds),
                                         MetricKind::euclidean,
                                         std::vector<std::vector<double>>{}, std::move(id));
}

SpacePtr make_finite_with_metric(std::vector<StrategyPoint> points,
                                 std::vector<std::vector<double>> distance_table,
                                 std::string id) {
  auto bounds = hull_bounds(points);
  if (id.empty()) id = synth_id("finite", points.size(), bounds.size());
  return std::make_shared<StrategySpace>(std::move(points), std::move(bounds),
                                         MetricKind::custom_table,
                                         std::move(distance_table), std::move(id));
}

}  // namespace evodyn
