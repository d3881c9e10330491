#include "evodyn/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "evodyn/flat_metric.hpp"

namespace evodyn {

std::vector<std::vector<std::size_t>> Partition::classes() const {
  std::vector<std::vector<std::size_t>> out(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
  return out;
}

double Partition::max_class_diameter() const {
  double best = 0.0;
  for (const auto& members : classes())
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        best = std::max(best, source->distance(members[a], members[b]));
  return best;
}

bool Partition::is_bottom() const { return num_classes == labels.size(); }

namespace {

std::size_t nearest_member(const StrategySpace& space, const std::vector<std::size_t>& members,
                           const std::vector<double>& target) {
  std::size_t best = members.front();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      const double d = space.point(i).coords[k] - target[k];
      d2 += d * d;
    }
    if (d2 < best_d2) {  // ties keep the lowest index: members are ascending
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

std::vector<double> member_centroid(const StrategySpace& space,
                                    const std::vector<std::size_t>& members) {
  std::vector<double> c(space.dim(), 0.0);
  for (std::size_t i : members)
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += space.point(i).coords[k];
  for (double& x : c) x /= static_cast<double>(members.size());
  return c;
}

SpacePtr representative_space(const SpacePtr& source, const std::vector<std::size_t>& reps,
                              const std::string& suffix) {
  std::vector<StrategyPoint> pts;
  pts.reserve(reps.size());
  for (std::size_t r : reps) pts.push_back(source->point(r));
  return std::make_shared<StrategySpace>(std::move(pts), source->bounds(),
                                         MetricKind::euclidean,
                                         std::vector<std::vector<double>>{},
                                         source->id() + suffix);
}

}  // namespace

Partition partition_bottom(const SpacePtr& space) {
  Partition p;
  p.source = space;
  p.kind = PartitionKind::bottom;
  p.num_classes = space->size();
  p.labels.resize(space->size());
  std::iota(p.labels.begin(), p.labels.end(), std::size_t{0});
  p.representatives = p.labels;
  // relabeled copy of the source, metric included
  std::vector<std::vector<double>> table;
  if (space->metric_kind() == MetricKind::custom_table) {
    table.resize(space->size(), std::vector<double>(space->size()));
    for (std::size_t i = 0; i < space->size(); ++i)
      for (std::size_t j = 0; j < space->size(); ++j) table[i][j] = space->distance(i, j);
  }
  p.quotient = std::make_shared<StrategySpace>(space->points(), space->bounds(),
                                               space->metric_kind(), std::move(table),
                                               space->id() + "/bottom");
  return p;
}

Partition partition_top(const SpacePtr& space) {
  Partition p;
  p.source = space;
  p.kind = PartitionKind::top;
  p.num_classes = 1;
  p.labels.assign(space->size(), 0);
  std::vector<std::size_t> all(space->size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  p.representatives = {nearest_member(*space, all, member_centroid(*space, all))};
  p.quotient = representative_space(space, p.representatives, "/top");
  return p;
}

Partition partition_r_level_sets(const SpacePtr& space, const VitalRates& v, double bin_tol) {
  if (v.size() != space->size())
    throw std::invalid_argument("vital rates do not match the strategy space");
  if (bin_tol < 0.0) throw std::invalid_argument("bin tolerance must be >= 0");
  const std::size_t n = space->size();
  std::vector<double> r0(n);
  for (std::size_t q = 0; q < n; ++q) r0[q] = v.reproductive_number(0.0, q);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r0[a] < r0[b]; });

  Partition p;
  p.source = space;
  p.kind = PartitionKind::r_level_sets;
  p.bin_tol = bin_tol;
  p.labels.assign(n, 0);
  std::size_t cls = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      const double gap = r0[order[k]] - r0[order[k - 1]];
      if (gap > bin_tol * std::max(1.0, std::abs(r0[order[k]]))) ++cls;
    }
    p.labels[order[k]] = cls;
  }
  p.num_classes = cls + 1;

  const auto members = p.classes();
  p.class_values.resize(p.num_classes);
  p.representatives.resize(p.num_classes);
  std::vector<StrategyPoint> qpts(p.num_classes);
  for (std::size_t c = 0; c < p.num_classes; ++c) {
    double mean = 0.0;
    for (std::size_t i : members[c]) mean += r0[i];
    mean /= static_cast<double>(members[c].size());
    p.class_values[c] = mean;
    std::size_t best = members[c].front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : members[c]) {
      const double d = std::abs(r0[i] - mean);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    p.representatives[c] = best;
    qpts[c].coords = {mean};
  }
  const double lo = p.class_values.front(), hi = p.class_values.back();
  p.quotient = std::make_shared<StrategySpace>(
      std::move(qpts), std::vector<std::array<double, 2>>{{lo, hi}}, MetricKind::euclidean,
      std::vector<std::vector<double>>{}, space->id() + "/R");
  return p;
}

Partition partition_dyadic(const SpacePtr& space, int level) {
  if (level < 1) throw std::invalid_argument("dyadic level must be >= 1");
  const std::size_t d = space->dim();
  const auto& bounds = space->bounds();

  // Aligned power-of-two lattice, fine enough that cell diameter < 1/level.
  int m = 0;
  while ((1L << m) <= static_cast<double>(level) * space->box_diameter() && m < 30) ++m;
  if (static_cast<std::size_t>(m) * d > 62)
    throw std::invalid_argument("dyadic level too fine for this dimension");
  const double cells = static_cast<double>(1L << m);

  std::vector<long> flat(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) {
    long id = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const double len = bounds[a][1] - bounds[a][0];
      double t = len > 0.0 ? (space->point(i).coords[a] - bounds[a][0]) / len : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      long idx = static_cast<long>(std::floor(t * cells));  // exact power-of-two scaling
      idx = std::min(idx, (1L << m) - 1);
      id = id * (1L << m) + idx;
    }
    flat[i] = id;
  }

  std::vector<long> cell_ids = flat;
  std::sort(cell_ids.begin(), cell_ids.end());
  cell_ids.erase(std::unique(cell_ids.begin(), cell_ids.end()), cell_ids.end());

  Partition p;
  p.source = space;
  p.kind = PartitionKind::dyadic;
  p.level = level;
  p.num_classes = cell_ids.size();
  p.labels.resize(space->size());
  for (std::size_t i = 0; i < space->size(); ++i)
    p.labels[i] = static_cast<std::size_t>(
        std::lower_bound(cell_ids.begin(), cell_ids.end(), flat[i]) - cell_ids.begin());

  const auto members = p.classes();
  p.representatives.resize(p.num_classes);
  for (std::size_t c = 0; c < p.num_classes; ++c) {
    // centroid of the cell, decoded from its flattened index
    std::vector<double> centroid(d);
    long id = cell_ids[c];
    for (std::size_t a = d; a-- > 0;) {
      const long idx = id % (1L << m);
      id /= (1L << m);
      const double len = bounds[a][1] - bounds[a][0];
      centroid[a] = bounds[a][0] + (static_cast<double>(idx) + 0.5) * len / cells;
    }
    p.representatives[c] = nearest_member(*space, members[c], centroid);
  }
  p.quotient = representative_space(space, p.representatives,
                                    "/dyadic" + std::to_string(level));
  return p;
}

Partition partition_custom(const SpacePtr& space, std::vector<std::size_t> labels,
                           std::vector<std::size_t> representatives) {
  if (labels.size() != space->size())
    throw std::invalid_argument("every source point needs a label");
  const std::size_t n_cls = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<bool> seen(n_cls, false);
  for (std::size_t l : labels) seen[l] = true;
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::invalid_argument("class ids must be contiguous and nonempty");

  Partition p;
  p.source = space;
  p.kind = PartitionKind::custom;
  p.labels = std::move(labels);
  p.num_classes = n_cls;
  p.canonical_metric = false;
  const auto members = p.classes();
  if (!representatives.empty()) {
    if (representatives.size() != n_cls)
      throw std::invalid_argument("one representative per class required");
    for (std::size_t c = 0; c < n_cls; ++c)
      if (p.labels[representatives[c]] != c)
        throw std::invalid_argument("representative must belong to its class");
    p.representatives = std::move(representatives);
  } else {
    p.representatives.resize(n_cls);
    for (std::size_t c = 0; c < n_cls; ++c)
      p.representatives[c] = nearest_member(*space, members[c], member_centroid(*space, members[c]));
  }
  p.quotient = representative_space(space, p.representatives, "/custom");
  return p;
}

bool refines(const Partition& p1, const Partition& p2) {
  if (p1.source != p2.source) throw std::invalid_argument("partitions of different spaces");
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> image(p1.num_classes, kUnset);
  for (std::size_t i = 0; i < p1.labels.size(); ++i) {
    std::size_t& slot = image[p1.labels[i]];
    if (slot == kUnset)
      slot = p2.labels[i];
    else if (slot != p2.labels[i])
      return false;
  }
  return true;
}

std::vector<std::size_t> quotient_map(const Partition& p1, const Partition& p2) {
  if (!refines(p1, p2))
    throw std::invalid_argument("quotient map requires a refinement");
  std::vector<std::size_t> map(p1.num_classes);
  for (std::size_t i = 0; i < p1.labels.size(); ++i) map[p1.labels[i]] = p2.labels[i];
  return map;
}

AtomicMeasure project(const AtomicMeasure& mu, const Partition& p) {
  if (mu.space() != p.source)
    throw std::invalid_argument("measure is not on the partition's source space");
  return mu.pushforward(p.labels, p.quotient);
}

std::vector<Partition> refine_sequence(const SpacePtr& space, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  std::vector<Partition> seq;
  seq.reserve(depth);
  for (int i = 1; i <= depth; ++i) seq.push_back(partition_dyadic(space, i));
  return seq;
}

AtomicMeasure approximate(const AtomicMeasure& mu, const Partition& p) {
  if (mu.space() != p.source)
    throw std::invalid_argument("measure is not on the partition's source space");
  std::vector<double> class_mass(p.num_classes, 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) class_mass[p.labels[i]] += mu.weights()[i];
  std::vector<double> w(mu.size(), 0.0);
  for (std::size_t c = 0; c < p.num_classes; ++c) w[p.representatives[c]] += class_mass[c];
  return AtomicMeasure(mu.space(), std::move(w));
}

std::optional<AtomicMeasure> mod_limit(const Trajectory& traj, const Partition& p,
                                       double tail_fraction, double tol) {
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    throw std::invalid_argument("tail fraction must lie in (0, 1]");
  const std::size_t n = traj.states.size();
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  std::vector<AtomicMeasure> tail;
  tail.reserve(count);
  for (std::size_t k = n - count; k < n; ++k) tail.push_back(project(traj.states[k], p));
  for (std::size_t a = 0; a < tail.size(); ++a)
    for (std::size_t b = a + 1; b < tail.size(); ++b)
      if (flat_distance(tail[a], tail[b]) >= tol) return std::nullopt;
  return tail.back();
}

}  // namespace evodyn
