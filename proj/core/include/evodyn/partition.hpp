#pragma once

#include <optional>
#include <vector>

#include "evodyn/dynamics.hpp"
#include "evodyn/measure.hpp"
#include "evodyn/strategy_space.hpp"
#include "evodyn/vitals.hpp"

namespace evodyn {

enum class PartitionKind { bottom, top, r_level_sets, dyadic, custom };

// Labeled partition of a strategy space together with its quotient space.
// The quotient's points are the classes: for r_level_sets a class is placed
// at its inherent-fitness value (so quotient distance is the fitness gap);
// otherwise at a representative source point.
struct Partition {
  SpacePtr source;
  PartitionKind kind = PartitionKind::custom;
  std::vector<std::size_t> labels;           // source point -> class id
  std::size_t num_classes = 0;
  std::vector<std::size_t> representatives;  // class id -> source point index
  std::vector<double> class_values;          // r_level_sets only: fitness per class
  SpacePtr quotient;
  double bin_tol = 0.0;
  int level = 0;
  // False for custom partitions, where no canonical quotient metric exists
  // and representative-point distance is used as a stand-in.
  bool canonical_metric = true;

  std::vector<std::vector<std::size_t>> classes() const;
  double max_class_diameter() const;
  bool is_bottom() const;
  bool is_top() const { return num_classes == 1; }
};

Partition partition_bottom(const SpacePtr& space);
Partition partition_top(const SpacePtr& space);

// Classes are tolerance clusters of the sorted inherent reproductive numbers
// R(0, .): a new class starts where the gap exceeds bin_tol (relative).
Partition partition_r_level_sets(const SpacePtr& space, const VitalRates& v,
                                 double bin_tol = 1e-9);

// Tiles the bounding box with an aligned power-of-two lattice fine enough
// that every cell has diameter < 1/level; nonempty cells become classes and
// each is represented by the member nearest the cell centroid. Levels nest:
// partition_dyadic(space, i+1) refines partition_dyadic(space, i).
Partition partition_dyadic(const SpacePtr& space, int level);

Partition partition_custom(const SpacePtr& space, std::vector<std::size_t> labels,
                           std::vector<std::size_t> representatives = {});

// True when p1 is finer than (or equal to) p2: every p2 class is a union of
// p1 classes.
bool refines(const Partition& p1, const Partition& p2);

// The induced map of class ids for p1 finer than p2; throws otherwise.
std::vector<std::size_t> quotient_map(const Partition& p1, const Partition& p2);

// Pushforward of mu onto the quotient space (fiber sums over the classes).
AtomicMeasure project(const AtomicMeasure& mu, const Partition& p);

// Nested dyadic partitions for levels 1..depth.
std::vector<Partition> refine_sequence(const SpacePtr& space, int depth);

// Atomic approximation on the source space: each class's mass placed at its
// representative point. Within flat distance (max class diameter) * |mu| of mu.
AtomicMeasure approximate(const AtomicMeasure& mu, const Partition& p);

// Projects the trajectory tail onto the quotient; if the projected tail is
// Cauchy in flat distance (max pairwise distance < tol) returns the final
// projection as the detected limit, else nullopt. A limit detector, not a
// convergence proof.
std::optional<AtomicMeasure> mod_limit(const Trajectory& traj, const Partition& p,
                                       double tail_fraction = 0.2, double tol = 1e-4);

}  // namespace evodyn
