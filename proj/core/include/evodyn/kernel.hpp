#pragma once

#include <vector>

#include "evodyn/strategy_space.hpp"

namespace evodyn {

enum class KernelKind { pure_selection, epsilon_uniform, gaussian, custom };

// Row-stochastic mutation kernel: rows()[j][i] is the probability mass that
// offspring of strategy j place on strategy i. Pure selection is the
// identity matrix (every strategy breeds true).
class MutationKernel {
 public:
  static MutationKernel pure_selection(std::size_t n);
  // (1 - eps) I + (eps / n) * ones
  static MutationKernel epsilon_uniform(std::size_t n, double eps);
  // row j proportional to exp(-d(q_j, q_i)^2 / (2 sigma^2)), normalized
  static MutationKernel gaussian(const StrategySpace& space, double sigma);
  // validates row sums (1 within 1e-12) and nonnegativity
  static MutationKernel custom(std::vector<std::vector<double>> rows);

  MutationKernel() = default;

  std::size_t size() const { return rows_.size(); }
  KernelKind kind() const { return kind_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  double offspring_mass(std::size_t parent, std::size_t child) const {
    return rows_[parent][child];
  }
  // gamma(q_parent)(E) for an index set E
  double set_mass(std::size_t parent, const std::vector<std::size_t>& E) const;
  bool is_identity() const { return identity_; }

 private:
  std::vector<std::vector<double>> rows_;
  KernelKind kind_ = KernelKind::pure_selection;
  bool identity_ = true;

  MutationKernel(std::vector<std::vector<double>> rows, KernelKind kind);
};

}  // namespace evodyn
