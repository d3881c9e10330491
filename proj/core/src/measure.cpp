#include "evodyn/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace evodyn {

AtomicMeasure::AtomicMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), w_(std::move(weights)) {
  if (!space_) throw std::invalid_argument("measure needs a space");
  if (w_.size() != space_->size())
    throw std::invalid_argument("weight count must match space size");
  for (double w : w_)
    if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
}

AtomicMeasure AtomicMeasure::zero(SpacePtr space) {
  std::vector<double> w(space->size(), 0.0);
  return AtomicMeasure(std::move(space), std::move(w));
}

AtomicMeasure AtomicMeasure::dirac(SpacePtr space, std::size_t i, double mass) {
  std::vector<double> w(space->size(), 0.0);
  if (i >= w.size()) throw std::out_of_range("dirac index out of range");
  w[i] = mass;
  return AtomicMeasure(std::move(space), std::move(w));
}

AtomicMeasure AtomicMeasure::uniform(SpacePtr space, double total_mass) {
  std::vector<double> w(space->size(), total_mass / static_cast<double>(space->size()));
  return AtomicMeasure(std::move(space), std::move(w));
}

double AtomicMeasure::weight(std::size_t i) const {
  if (i >= w_.size()) throw std::out_of_range("weight index out of range");
  return w_[i];
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (double w : w_) s += w;
  return s;
}

double AtomicMeasure::total_variation() const {
  double s = 0.0;
  for (double w : w_) s += std::abs(w);
  return s;
}

bool AtomicMeasure::in_positive_cone(double tol) const {
  for (double w : w_)
    if (w < -tol) return false;
  return true;
}

double AtomicMeasure::integrate(const std::function<double(const StrategyPoint&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const double v = f(space_->point(i));
    if (!std::isfinite(v)) throw std::domain_error("integrand not finite on support");
    s += v * w_[i];
  }
  return s;
}

double AtomicMeasure::integrate_values(std::span<const double> values) const {
  if (values.size() != w_.size())
    throw std::invalid_argument("value count must match space size");
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::domain_error("integrand not finite on support");
    s += values[i] * w_[i];
  }
  return s;
}

AtomicMeasure AtomicMeasure::restrict(const std::function<bool(std::size_t)>& in_set) const {
  std::vector<double> w(w_.size(), 0.0);
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (in_set(i)) w[i] = w_[i];
  return AtomicMeasure(space_, std::move(w));
}

AtomicMeasure AtomicMeasure::pushforward(const std::vector<std::size_t>& phi,
                                         const SpacePtr& target) const {
  if (phi.size() != w_.size())
    throw std::invalid_argument("point map must be total on the source");
  if (!target) throw std::invalid_argument("pushforward needs a target space");
  std::vector<double> w(target->size(), 0.0);
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (phi[i] >= w.size()) throw std::out_of_range("point map target out of range");
    w[phi[i]] += w_[i];
  }
  return AtomicMeasure(target, std::move(w));
}

AtomicMeasure AtomicMeasure::clipped_nonnegative(double tol) const {
  std::vector<double> w = w_;
  for (double& x : w)
    if (x < 0.0 && x >= -tol) x = 0.0;
  return AtomicMeasure(space_, std::move(w));
}

AtomicMeasure linear_combine(double a, const AtomicMeasure& mu, double b, const AtomicMeasure& nu) {
  if (!same_space(mu, nu)) throw std::invalid_argument("measures on different spaces");
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = a * mu.weights()[i] + b * nu.weights()[i];
  return AtomicMeasure(mu.space(), std::move(w));
}

bool same_space(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  return mu.space() == nu.space();
}

}  // namespace evodyn
