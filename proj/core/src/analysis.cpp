#include "evodyn/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evodyn/flat_metric.hpp"
#include "evodyn/partition.hpp"

namespace evodyn {

PermanenceReport permanence_check(const Trajectory& traj, const VitalRates& v,
                                  double tail_fraction, double tie_tol) {
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    throw std::invalid_argument("tail fraction must lie in (0, 1]");
  const FitnessReport fit = fitness_report(v, *traj.states.front().space(), tie_tol);

  PermanenceReport rep;
  rep.k_q = fit.k_q;
  rep.K_Q = fit.K_Q;

  const std::vector<double> mass = traj.masses();
  const double x0 = mass.front();
  const double lower = std::min(rep.k_q, x0);
  const double upper = std::isinf(rep.K_Q) ? rep.K_Q : std::max(x0, rep.K_Q);
  for (double x : mass) {
    if (x < lower - 1e-6 || x > upper + 1e-6) {
      rep.envelope_ok = false;
      break;
    }
  }

  const std::size_t n = mass.size();
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  rep.liminf_est = *std::min_element(mass.end() - count, mass.end());
  rep.limsup_est = *std::max_element(mass.end() - count, mass.end());
  rep.permanent = rep.k_q > 0.0 && rep.envelope_ok;
  return rep;
}

bool persistence_condition(const VitalRates& v, const MutationKernel& gamma,
                           const std::vector<std::size_t>& E, double eps) {
  if (E.empty()) throw std::invalid_argument("persistence condition needs a nonempty set");
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t q : E)
    worst = std::min(worst, v.reproductive_number(eps, q) * gamma.set_mass(q, E));
  return worst > 1.0;
}

double relative_fitness(const VitalRates& v, std::size_t q, std::size_t q_hat) {
  const double K = v.carrying_capacity(q);
  if (std::isinf(K))
    throw std::domain_error("relative fitness undefined: unbounded carrying capacity");
  return v.reproductive_number(K, q_hat) - 1.0;
}

bool is_ess(const VitalRates& v, const StrategySpace& space, std::size_t q, double tie_tol) {
  const FitnessReport fit = fitness_report(v, space, tie_tol);
  const double rq = fit.R0[q];
  const double band = tie_tol * std::max(1.0, std::abs(rq));
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (std::abs(fit.R0[j] - rq) <= band) continue;  // same fitness class
    if (relative_fitness(v, q, j) >= 0.0) return false;
  }
  return true;
}

CssReport css_diagnostic(const Trajectory& traj, const VitalRates& v, double tie_tol,
                         double tol) {
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  const SpacePtr space = traj.states.front().space();
  const FitnessReport fit = fitness_report(v, *space, tie_tol);

  CssReport rep;
  rep.K_Q = fit.K_Q;
  const AtomicMeasure& u = traj.states.front();
  for (std::size_t q : fit.fittest) {
    if (u.weights()[q] > 0.0) {
      rep.hypothesis_ok = true;
      break;
    }
  }

  const Partition part = partition_r_level_sets(space, v, std::max(tie_tol, 1e-9));
  const std::size_t arg_max = static_cast<std::size_t>(
      std::max_element(fit.R0.begin(), fit.R0.end()) - fit.R0.begin());
  rep.target_class = part.labels[arg_max];
  const AtomicMeasure target = AtomicMeasure::dirac(part.quotient, rep.target_class, fit.K_Q);
  rep.distance_to_target = flat_distance(project(traj.final_state(), part), target);
  rep.converged = rep.hypothesis_ok && rep.distance_to_target < tol;
  return rep;
}

namespace {

Eigen::VectorXd field_vec(const std::vector<double>& x, const MutationKernel& gamma,
                          const VitalRates& v, const SpacePtr& space) {
  AtomicMeasure mu(space, x);
  const AtomicMeasure f = vector_field(mu, gamma, v);
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<Eigen::Index>(i)] = f.weights()[i];
  return out;
}

// d/dx_j of component i of the stationarity map. For the closed-form
// families the X-derivatives are analytic; tabulated rates fall back to
// forward differences of the field itself, stepped into the positive cone.
Eigen::MatrixXd jacobian(const std::vector<double>& x, const MutationKernel& gamma,
                         const VitalRates& v, const SpacePtr& space) {
  const std::size_t n = x.size();
  Eigen::MatrixXd J(n, n);
  if (v.family() == VitalFamily::tabulated) {
    const Eigen::VectorXd f0 = field_vec(x, gamma, v, space);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      std::vector<double> xp = x;
      xp[j] += h;
      const Eigen::VectorXd fp = field_vec(xp, gamma, v, space);
      for (std::size_t i = 0; i < n; ++i)
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (fp[static_cast<Eigen::Index>(i)] - f0[static_cast<Eigen::Index>(i)]) / h;
    }
    return J;
  }

  double X = 0.0;
  for (double w : x) X += w;
  X = std::max(X, 0.0);
  std::vector<double> f1(n), f2(n), f1x(n), f2x(n);
  for (std::size_t q = 0; q < n; ++q) {
    f1[q] = v.birth(X, q);
    f2[q] = v.death(X, q);
    f1x[q] = v.birth_dX(X, q);
    f2x[q] = v.death_dX(X, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double drift = 0.0;  // sum_k f1_X(X, q_k) gamma[k][i] x_k
    for (std::size_t k = 0; k < n; ++k) drift += f1x[k] * gamma.rows()[k][i] * x[k];
    for (std::size_t j = 0; j < n; ++j) {
      double val = gamma.rows()[j][i] * f1[j] + drift - f2x[i] * x[i];
      if (i == j) val -= f2[i];
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = val;
    }
  }
  return J;
}

std::vector<std::complex<double>> spectrum(const Eigen::MatrixXd& J) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
  std::vector<std::complex<double>> eig(static_cast<std::size_t>(J.rows()));
  for (Eigen::Index i = 0; i < J.rows(); ++i) eig[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return eig;
}

EquilibriumResult make_result(const SpacePtr& space, const std::vector<double>& x,
                              const MutationKernel& gamma, const VitalRates& v,
                              int iters, bool converged) {
  AtomicMeasure state(space, x);
  EquilibriumResult res{state, steady_state_residual(state, gamma, v), {}, false, iters,
                        converged, state.in_positive_cone(1e-9)};
  if (converged) {
    res.eigenvalues = spectrum(jacobian(x, gamma, v, space));
    res.stable = std::all_of(res.eigenvalues.begin(), res.eigenvalues.end(),
                             [](const std::complex<double>& z) { return z.real() < 0.0; });
  }
  return res;
}

}  // namespace

EquilibriumResult find_equilibrium(const VitalRates& v, const MutationKernel& gamma,
                                   const AtomicMeasure& guess) {
  if (gamma.size() != guess.size() || v.size() != guess.size())
    throw std::invalid_argument("kernel, vital rates and guess must share one space");
  const SpacePtr space = guess.space();
  const std::size_t n = guess.size();

  auto residual_of = [&](const std::vector<double>& w) {
    for (double y : w)
      if (!std::isfinite(y)) return std::numeric_limits<double>::infinity();
    return field_vec(w, gamma, v, space).lpNorm<1>();
  };

  std::vector<double> x = guess.weights();
  double residual = residual_of(x);
  std::vector<double> best_x = x;
  double best_residual = residual;

  constexpr double kTol = 1e-10;
  int polish_left = 3;  // past the gate, keep stepping only while it helps
  for (int iter = 0; iter < 100; ++iter) {
    const bool converged = residual <= kTol;
    if (converged && (residual == 0.0 || polish_left-- <= 0))
      return make_result(space, x, gamma, v, iter, true);

    const Eigen::VectorXd F = field_vec(x, gamma, v, space);
    const Eigen::MatrixXd J = jacobian(x, gamma, v, space);
    const Eigen::VectorXd step = J.partialPivLu().solve(-F);
    if (!step.allFinite()) {
      if (converged) return make_result(space, x, gamma, v, iter, true);
      throw NewtonError("singular Jacobian in equilibrium search",
                        make_result(space, best_x, gamma, v, iter, false));
    }

    double lambda = 1.0;
    std::vector<double> trial(n);
    double trial_residual = residual;
    for (int halving = 0; halving <= 30; ++halving) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = x[i] + lambda * step[static_cast<Eigen::Index>(i)];
      trial_residual = residual_of(trial);
      if (trial_residual < residual) break;
      lambda *= 0.5;
    }
    if (trial_residual >= residual) {
      if (converged) return make_result(space, x, gamma, v, iter, true);
      if (!std::isfinite(trial_residual))
        throw NewtonError("Newton step diverged",
                          make_result(space, best_x, gamma, v, iter, false));
    }
    x = trial;
    residual = trial_residual;
    if (residual < best_residual) {
      best_residual = residual;
      best_x = x;
    }
  }
  if (residual <= kTol) return make_result(space, x, gamma, v, 100, true);
  throw NewtonError("Newton did not converge within 100 iterations",
                    make_result(space, best_x, gamma, v, 100, false));
}

std::vector<double> analytic_spectrum_pure_selection(const VitalRates& v,
                                                     const StrategySpace& space,
                                                     double tie_tol) {
  const FitnessReport fit = fitness_report(v, space, tie_tol);
  if (fit.fittest.size() != 1)
    throw std::invalid_argument("spectrum formula requires a unique fittest strategy");
  if (fit.capacity_unbounded)
    throw std::domain_error("spectrum undefined: unbounded carrying capacity");
  const std::size_t Q = fit.fittest.front();
  const double K = fit.K_Q;

  std::vector<double> eig;
  eig.reserve(space.size());
  for (std::size_t q = 0; q < space.size(); ++q) {
    if (q == Q) continue;
    eig.push_back(v.birth(K, q) - v.death(K, q));
  }
  eig.push_back(v.birth_dX(K, Q) - v.death_dX(K, Q));
  std::sort(eig.begin(), eig.end());
  return eig;
}

ContinuationResult continuation(const VitalRates& v, const SpacePtr& space,
                                const std::function<MutationKernel(double)>& kernel_family,
                                const std::vector<double>& eps_list) {
  for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
    if (!(eps_list[k] > eps_list[k + 1]))
      throw std::invalid_argument("epsilon list must be strictly decreasing");
  if (!eps_list.empty() && eps_list.back() < 0.0)
    throw std::invalid_argument("epsilon must be >= 0");

  const FitnessReport fit = fitness_report(v, *space);
  if (fit.capacity_unbounded)
    throw std::domain_error("continuation undefined: unbounded carrying capacity");
  // Pure-selection reference equilibrium: total mass K_Q on the fittest
  // class, spread uniformly when that class is not a single strategy.
  std::vector<double> ref(space->size(), 0.0);
  for (std::size_t q : fit.fittest)
    ref[q] = fit.K_Q / static_cast<double>(fit.fittest.size());
  const AtomicMeasure limit(space, std::move(ref));

  ContinuationResult out;
  AtomicMeasure warm = limit;
  for (double eps : eps_list) {
    try {
      const MutationKernel gamma = kernel_family(eps);
      EquilibriumResult eq = find_equilibrium(v, gamma, warm);
      warm = eq.state;
      double dist2 = 0.0;
      for (std::size_t i = 0; i < limit.size(); ++i) {
        const double d = eq.state.weights()[i] - limit.weights()[i];
        dist2 += d * d;
      }
      out.entries.push_back({eps, std::move(eq), std::sqrt(dist2)});
    } catch (const NumericalError& err) {
      out.completed = false;
      out.failed_eps = eps;
      out.failure = err.what();
      break;
    }
  }
  return out;
}

}  // namespace evodyn
