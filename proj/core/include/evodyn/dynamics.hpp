#pragma once

#include <vector>

#include "evodyn/kernel.hpp"
#include "evodyn/measure.hpp"
#include "evodyn/vitals.hpp"

namespace evodyn {

struct SolverStats {
  long steps = 0;
  long rejected = 0;
  double max_error = 0.0;  // largest embedded error estimate (rk45 only)
};

// Time-ordered snapshots of one run; states share the strategy space.
struct Trajectory {
  std::vector<double> times;
  std::vector<AtomicMeasure> states;
  SolverStats stats;

  std::size_t size() const { return times.size(); }
  const AtomicMeasure& final_state() const { return states.back(); }
  std::vector<double> masses() const;
};

struct OdeOptions {
  enum class Method { rk4, rk45 };
  Method method = Method::rk4;
  double step = 0.01;    // rk4 step size
  double tol = 1e-8;     // rk45 relative tolerance
  int record_every = 1;  // keep every k-th accepted step (plus t=0 and t=T)
};

// Right-hand side of the replicator-mutator system on atomic measures:
//   component i:  sum_j f1(X, q_j) gamma[j][i] w_j  -  f2(X, q_i) w_i
// with X the total mass. With the identity kernel this reduces to pure
// selection, (f1 - f2) w_i componentwise.
AtomicMeasure vector_field(const AtomicMeasure& mu, const MutationKernel& gamma,
                           const VitalRates& v);

// d/dt of the total mass: integral of f1 - f2 against mu. Independent of the
// kernel because its rows sum to one.
double mass_rate(const AtomicMeasure& mu, const VitalRates& v);

// Total variation norm of the vector field; zero at equilibria.
double steady_state_residual(const AtomicMeasure& mu, const MutationKernel& gamma,
                             const VitalRates& v);

// Integrates forward from u over [0, t_final]. Weights that drift slightly
// negative (>= -1e-9) are snapped to zero at record points; a weight below
// -1e-9 rejects the step and halves h. Throws NumericalError when the step
// size underflows 1e-12.
Trajectory integrate_ode(const AtomicMeasure& u, const MutationKernel& gamma,
                         const VitalRates& v, double t_final, const OdeOptions& opts = {});

}  // namespace evodyn
