#include "evodyn/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace evodyn {

MutationKernel::MutationKernel(std::vector<std::vector<double>> rows, KernelKind kind)
    : rows_(std::move(rows)), kind_(kind) {
  const std::size_t n = rows_.size();
  if (n == 0) throw std::invalid_argument("mutation kernel needs at least one strategy");
  identity_ = true;
  for (std::size_t j = 0; j < n; ++j) {
    if (rows_[j].size() != n) throw std::invalid_argument("mutation kernel must be square");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = rows_[j][i];
      if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("mutation kernel entries must be finite and >= 0");
      sum += p;
      if (p != (i == j ? 1.0 : 0.0)) identity_ = false;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("mutation kernel rows must sum to 1");
  }
}

MutationKernel MutationKernel::pure_selection(std::size_t n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) rows[j][j] = 1.0;
  return MutationKernel(std::move(rows), KernelKind::pure_selection);
}

MutationKernel MutationKernel::epsilon_uniform(std::size_t n, double eps) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (eps == 0.0) return pure_selection(n);
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, eps / static_cast<double>(n)));
  for (std::size_t j = 0; j < n; ++j) rows[j][j] += 1.0 - eps;
  return MutationKernel(std::move(rows), KernelKind::epsilon_uniform);
}

MutationKernel MutationKernel::gaussian(const StrategySpace& space, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian kernel width must be > 0");
  const std::size_t n = space.size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = space.distance(j, i);
      rows[j][i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += rows[j][i];
    }
    for (std::size_t i = 0; i < n; ++i) rows[j][i] /= sum;
  }
  return MutationKernel(std::move(rows), KernelKind::gaussian);
}

MutationKernel MutationKernel::custom(std::vector<std::vector<double>> rows) {
  return MutationKernel(std::move(rows), KernelKind::custom);
}

double MutationKernel::set_mass(std::size_t parent, const std::vector<std::size_t>& E) const {
  if (parent >= rows_.size()) throw std::out_of_range("kernel row out of range");
  double s = 0.0;
  for (std::size_t i : E) {
    if (i >= rows_.size()) throw std::out_of_range("kernel column out of range");
    s += rows_[parent][i];
  }
  return s;
}

}  // namespace evodyn
