#pragma once

#include <functional>
#include <span>
#include <vector>

#include "evodyn/strategy_space.hpp"

namespace evodyn {

// Finite signed Borel measure on a StrategySpace, stored as one weight per
// support point. Immutable value type: every operation returns a new measure.
class AtomicMeasure {
 public:
  AtomicMeasure(SpacePtr space, std::vector<double> weights);

  static AtomicMeasure zero(SpacePtr space);
  static AtomicMeasure dirac(SpacePtr space, std::size_t i, double mass = 1.0);
  static AtomicMeasure uniform(SpacePtr space, double total_mass);

  const SpacePtr& space() const { return space_; }
  const std::vector<double>& weights() const { return w_; }
  double weight(std::size_t i) const;
  std::size_t size() const { return w_.size(); }

  // mu(Q)
  double total_mass() const;
  // sum of |w_i|
  double total_variation() const;
  bool in_positive_cone(double tol = 0.0) const;

  // Integral of f against the measure: sum f(q_i) w_i.
  double integrate(const std::function<double(const StrategyPoint&)>& f) const;
  double integrate_values(std::span<const double> values) const;

  // Weights zeroed outside E; restrict(E) + restrict(not E) == *this.
  AtomicMeasure restrict(const std::function<bool(std::size_t)>& in_set) const;

  // Pushforward along a total point map into `target` (the * functor):
  // target weight at y is the fiber sum over {i : phi[i] == y}.
  AtomicMeasure pushforward(const std::vector<std::size_t>& phi, const SpacePtr& target) const;

  // Copy with weights in [-tol, 0) snapped to 0.
  AtomicMeasure clipped_nonnegative(double tol) const;

 private:
  SpacePtr space_;
  std::vector<double> w_;
};

// a*mu + b*nu on a shared space.
AtomicMeasure linear_combine(double a, const AtomicMeasure& mu, double b, const AtomicMeasure& nu);

bool same_space(const AtomicMeasure& mu, const AtomicMeasure& nu);

}  // namespace evodyn
