#pragma once

#include <limits>
#include <string>
#include <vector>

#include "evodyn/strategy_space.hpp"

namespace evodyn {

// Sentinel for an unbounded carrying capacity.
inline constexpr double kUnboundedCapacity = std::numeric_limits<double>::infinity();

enum class VitalFamily { logistic, ricker, beverton_holt, tabulated };

// Per-strategy birth rate f1(X,q) and mortality rate f2(X,q), parameterized
// by total population X. Built-in families:
//   logistic:      f1 = b(q),                 f2 = d(q) + c(q) X
//   ricker:        f1 = b(q) exp(-a(q) X),    f2 = d(q)
//   beverton_holt: f1 = b(q) / (1 + a(q) X),  f2 = d(q)
//   tabulated:     linear interpolation in X of per-point tables
// f1 is expected nonnegative and nonincreasing in X, f2 positive and
// nondecreasing; check_assumptions verifies this on a sample grid.
class VitalRates {
 public:
  static VitalRates logistic(std::vector<double> b, std::vector<double> d,
                             std::vector<double> c, double x_max = 0.0);
  static VitalRates ricker(std::vector<double> b, std::vector<double> d,
                           std::vector<double> a, double x_max = 0.0);
  static VitalRates beverton_holt(std::vector<double> b, std::vector<double> d,
                                  std::vector<double> a, double x_max = 0.0);
  // Tables indexed [x_knot][point]. Monotonicity is not enforced here so a
  // violating table can still be constructed and reported by
  // check_assumptions; the scenario loader rejects such tables up front.
  static VitalRates tabulated(std::vector<double> x_knots,
                              std::vector<std::vector<double>> f1,
                              std::vector<std::vector<double>> f2, double x_max = 0.0);

  VitalRates() = default;  // empty placeholder; size() == 0

  VitalFamily family() const { return family_; }
  std::size_t size() const { return n_; }
  double x_max() const { return x_max_; }

  double birth(double X, std::size_t q) const;   // f1(X, q)
  double death(double X, std::size_t q) const;   // f2(X, q)
  double birth_dX(double X, std::size_t q) const;
  double death_dX(double X, std::size_t q) const;

  // R(X, q) = f1(X,q) / f2(X,q); throws if f2 vanishes.
  double reproductive_number(double X, std::size_t q) const;

  // K(q): 0 when R(0,q) < 1, otherwise the root of R(., q) = 1 located by
  // bisection on [0, x_max] to absolute tolerance 1e-10;
  // kUnboundedCapacity when R(x_max, q) > 1.
  double carrying_capacity(std::size_t q) const;

  // min_q f2(0, q)
  double min_inherent_mortality() const;

 private:
  VitalFamily family_ = VitalFamily::logistic;
  std::size_t n_ = 0;
  std::vector<double> b_, d_, coef_;
  std::vector<double> x_knots_;
  std::vector<std::vector<double>> tab_f1_, tab_f2_;
  double x_max_ = 0.0;

  VitalRates(VitalFamily family, std::vector<double> b, std::vector<double> d,
             std::vector<double> coef, double x_max);
  double default_x_max() const;
  double interp(const std::vector<std::vector<double>>& tab, double X, std::size_t q) const;
  double interp_slope(const std::vector<std::vector<double>>& tab, double X, std::size_t q) const;
};

// Inherent reproductive numbers, carrying capacities, and the fittest /
// weakest strategy classes. Ties are resolved with a relative tolerance band
// so that numerically equal fitness values form one class.
struct FitnessReport {
  std::vector<double> R0;
  std::vector<double> K;
  std::vector<std::size_t> fittest;  // argmax of R0 within the tie band
  std::vector<std::size_t> weakest;  // argmin of R0 within the tie band
  double K_Q = 0.0;                  // capacity of the fittest class
  double k_q = 0.0;                  // capacity of the weakest class
  bool capacity_unbounded = false;   // K_Q hit the sentinel
};

FitnessReport fitness_report(const VitalRates& v, const StrategySpace& space,
                             double tie_tol = 1e-12);

struct AssumptionCheck {
  bool pass = true;
  std::string note;
};

struct AssumptionReport {
  AssumptionCheck a1;  // f1 nonnegative, nonincreasing in X
  AssumptionCheck a2;  // f2 positive, nondecreasing in X; varpi > 0
  AssumptionCheck a3;  // finite capacity of the fittest class
  AssumptionCheck a4;  // population size does not reorder fitness
  AssumptionCheck a5;  // unique root of R = 1 (strict crossing)
  AssumptionCheck a6;  // d/dX (f1 - f2) < 0 at (K_Q, fittest)
  double varpi = 0.0;  // min_q f2(0, q)
  bool plateau = false;  // R stays ~1 past the root (flat tabulated data)
  bool all_pass() const {
    return a1.pass && a2.pass && a3.pass && a4.pass && a5.pass && a6.pass;
  }
};

AssumptionReport check_assumptions(const VitalRates& v, const StrategySpace& space,
                                   const std::vector<double>& x_grid,
                                   double tie_tol = 1e-12);

// Evenly spaced sample grid on [0, x_max] for assumption checks.
std::vector<double> default_x_grid(const VitalRates& v, std::size_t count = 25);

}  // namespace evodyn
