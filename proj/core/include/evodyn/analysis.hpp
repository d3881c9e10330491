#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "evodyn/dynamics.hpp"
#include "evodyn/errors.hpp"
#include "evodyn/kernel.hpp"
#include "evodyn/measure.hpp"
#include "evodyn/vitals.hpp"

namespace evodyn {

// Checks the total-mass envelope min{k_q, X(0)} <= X(t) <= max{X(0), K_Q}
// along a trajectory and estimates liminf/limsup of X(t) from the tail.
struct PermanenceReport {
  double k_q = 0.0;
  double K_Q = 0.0;
  bool envelope_ok = true;
  double liminf_est = 0.0;  // tail minimum of X(t)
  double limsup_est = 0.0;  // tail maximum of X(t)
  bool permanent = false;   // k_q > 0 and the envelope held
};

PermanenceReport permanence_check(const Trajectory& traj, const VitalRates& v,
                                  double tail_fraction = 0.2, double tie_tol = 1e-12);

// True when inf_{q in E} R(eps, q) * gamma(q)(E) > 1: enough offspring of the
// strong trait set stay inside it for the population to persist above eps.
bool persistence_condition(const VitalRates& v, const MutationKernel& gamma,
                           const std::vector<std::size_t>& E, double eps);

// lambda_R: long-term fitness of q_hat when q sits at its own equilibrium,
// R(K(q), q_hat) - 1. Requires K(q) finite.
double relative_fitness(const VitalRates& v, std::size_t q, std::size_t q_hat);

// q's class is an ESS when every class outside it has negative relative
// fitness at q's equilibrium.
bool is_ess(const VitalRates& v, const StrategySpace& space, std::size_t q,
            double tie_tol = 1e-12);

struct CssReport {
  bool hypothesis_ok = false;     // initial support meets the fittest class
  double distance_to_target = 0.0;  // flat distance on the fitness quotient
  bool converged = false;
  double K_Q = 0.0;
  std::size_t target_class = 0;
};

// Projects the trajectory's final state onto the fitness quotient and
// measures its flat distance to K_Q * delta at the fittest class.
CssReport css_diagnostic(const Trajectory& traj, const VitalRates& v,
                         double tie_tol = 1e-12, double tol = 1e-3);

struct EquilibriumResult {
  AtomicMeasure state;
  double residual = 0.0;  // total variation of the vector field at state
  std::vector<std::complex<double>> eigenvalues;
  bool stable = false;  // all eigenvalue real parts < 0
  int newton_iters = 0;
  bool converged = false;
  bool in_cone = false;  // state nonnegative within 1e-9
};

class NewtonError : public NumericalError {
 public:
  NewtonError(const std::string& message, EquilibriumResult best)
      : NumericalError(message), best_(std::move(best)) {}
  const EquilibriumResult& best() const { return best_; }

 private:
  EquilibriumResult best_;
};

// Damped Newton on the stationarity map. Converged when the residual drops
// to 1e-10; throws NewtonError carrying the best iterate after 100
// iterations without convergence. Eigenvalues are those of the Jacobian at
// the solution.
EquilibriumResult find_equilibrium(const VitalRates& v, const MutationKernel& gamma,
                                   const AtomicMeasure& guess);

// Spectrum of the linearization at the pure-selection equilibrium K_Q
// delta_Q, valid when the fittest strategy is unique:
// { f(K_Q, q_hat) : q_hat != Q } united with { f_X(K_Q, Q) }, f = f1 - f2.
std::vector<double> analytic_spectrum_pure_selection(const VitalRates& v,
                                                     const StrategySpace& space,
                                                     double tie_tol = 1e-12);

struct ContinuationEntry {
  double eps = 0.0;
  EquilibriumResult equilibrium;
  double distance_to_limit = 0.0;  // Euclidean distance to the eps = 0 equilibrium
};

struct ContinuationResult {
  std::vector<ContinuationEntry> entries;
  bool completed = true;
  double failed_eps = 0.0;
  std::string failure;
};

// Follows the equilibrium branch along a decreasing list of mutation
// strengths, warm-starting Newton from the previous solution (the first from
// the pure-selection equilibrium K_Q delta_Q). Newton failure truncates the
// list and records the failing eps.
ContinuationResult continuation(const VitalRates& v, const SpacePtr& space,
                                const std::function<MutationKernel(double)>& kernel_family,
                                const std::vector<double>& eps_list);

}  // namespace evodyn
