#include "evodyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evodyn/errors.hpp"

namespace evodyn {

std::vector<double> Trajectory::masses() const {
  std::vector<double> m(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) m[k] = states[k].total_mass();
  return m;
}

namespace {

// Writes the replicator-mutator field of `w` into `out`.
void field_raw(const std::vector<double>& w, const MutationKernel& gamma,
               const VitalRates& v, std::vector<double>& out) {
  const std::size_t n = w.size();
  double X = 0.0;
  for (double x : w) X += x;
  X = std::max(X, 0.0);  // guard against transient round-off below zero

  out.assign(n, 0.0);
  if (gamma.is_identity()) {  // pure selection: (f1 - f2) w, componentwise
    for (std::size_t i = 0; i < n; ++i) {
      const double f = v.birth(X, i) - v.death(X, i);
      if (!std::isfinite(f)) throw NumericalError("non-finite vital rate");
      out[i] = f * w[i];
    }
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (w[j] == 0.0) continue;
    const double born = v.birth(X, j) * w[j];
    if (!std::isfinite(born)) throw NumericalError("non-finite vital rate");
    const auto& row = gamma.rows()[j];
    for (std::size_t i = 0; i < n; ++i) out[i] += born * row[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double f2 = v.death(X, i);
    if (!std::isfinite(f2)) throw NumericalError("non-finite vital rate");
    out[i] -= f2 * w[i];
  }
}

void check_shapes(const AtomicMeasure& mu, const MutationKernel& gamma, const VitalRates& v) {
  if (gamma.size() != mu.size() || v.size() != mu.size())
    throw std::invalid_argument("kernel, vital rates and measure must share one space");
}

double min_weight(const std::vector<double>& w) {
  double m = 0.0;
  for (double x : w) m = std::min(m, x);
  return m;
}

}  // namespace

AtomicMeasure vector_field(const AtomicMeasure& mu, const MutationKernel& gamma,
                           const VitalRates& v) {
  check_shapes(mu, gamma, v);
  std::vector<double> out;
  field_raw(mu.weights(), gamma, v, out);
  return AtomicMeasure(mu.space(), std::move(out));
}

double mass_rate(const AtomicMeasure& mu, const VitalRates& v) {
  if (v.size() != mu.size())
    throw std::invalid_argument("vital rates and measure must share one space");
  const double X = std::max(mu.total_mass(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += (v.birth(X, i) - v.death(X, i)) * mu.weights()[i];
  return s;
}

double steady_state_residual(const AtomicMeasure& mu, const MutationKernel& gamma,
                             const VitalRates& v) {
  return vector_field(mu, gamma, v).total_variation();
}

namespace {

struct StepResult {
  bool accepted = false;
  double error = 0.0;  // relative embedded estimate (rk45)
};

class Integrator {
 public:
  Integrator(const MutationKernel& gamma, const VitalRates& v, std::size_t n)
      : gamma_(gamma), v_(v), n_(n) {
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &cand_}) k->resize(n_);
  }

  StepResult rk4_step(const std::vector<double>& y, double h, std::vector<double>& out) {
    field_raw(y, gamma_, v_, k1_);
    axpy(y, h * 0.5, k1_, tmp_);
    field_raw(tmp_, gamma_, v_, k2_);
    axpy(y, h * 0.5, k2_, tmp_);
    field_raw(tmp_, gamma_, v_, k3_);
    axpy(y, h, k3_, tmp_);
    field_raw(tmp_, gamma_, v_, k4_);
    for (std::size_t i = 0; i < n_; ++i)
      out[i] = y[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    return {min_weight(out) >= -1e-9, 0.0};
  }

  // Dormand-Prince 5(4) embedded pair.
  StepResult rk45_step(const std::vector<double>& y, double h, double tol,
                       std::vector<double>& out) {
    field_raw(y, gamma_, v_, k1_);
    stage(y, h, {{1.0 / 5, &k1_}}, tmp_);
    field_raw(tmp_, gamma_, v_, k2_);
    stage(y, h, {{3.0 / 40, &k1_}, {9.0 / 40, &k2_}}, tmp_);
    field_raw(tmp_, gamma_, v_, k3_);
    stage(y, h, {{44.0 / 45, &k1_}, {-56.0 / 15, &k2_}, {32.0 / 9, &k3_}}, tmp_);
    field_raw(tmp_, gamma_, v_, k4_);
    stage(y, h,
          {{19372.0 / 6561, &k1_}, {-25360.0 / 2187, &k2_}, {64448.0 / 6561, &k3_},
           {-212.0 / 729, &k4_}},
          tmp_);
    field_raw(tmp_, gamma_, v_, k5_);
    stage(y, h,
          {{9017.0 / 3168, &k1_}, {-355.0 / 33, &k2_}, {46732.0 / 5247, &k3_},
           {49.0 / 176, &k4_}, {-5103.0 / 18656, &k5_}},
          tmp_);
    field_raw(tmp_, gamma_, v_, k6_);
    stage(y, h,
          {{35.0 / 384, &k1_}, {500.0 / 1113, &k3_}, {125.0 / 192, &k4_},
           {-2187.0 / 6784, &k5_}, {11.0 / 84, &k6_}},
          cand_);
    field_raw(cand_, gamma_, v_, k7_);

    // 5th-order candidate minus the embedded 4th-order solution
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
    static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
    static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
    static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
    static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
    static constexpr double e7 = -1.0 / 40;
    double err = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      err += std::abs(h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                           e6 * k6_[i] + e7 * k7_[i]));
      scale = std::max(scale, std::abs(y[i]));
    }
    const double rel = err / scale;
    out = cand_;
    const bool ok = rel <= tol && min_weight(out) >= -1e-9;
    return {ok, rel};
  }

 private:
  void axpy(const std::vector<double>& y, double a, const std::vector<double>& k,
            std::vector<double>& out) {
    for (std::size_t i = 0; i < n_; ++i) out[i] = y[i] + a * k[i];
  }

  void stage(const std::vector<double>& y, double h,
             std::initializer_list<std::pair<double, const std::vector<double>*>> terms,
             std::vector<double>& out) {
    out = y;
    for (const auto& [a, k] : terms)
      for (std::size_t i = 0; i < n_; ++i) out[i] += h * a * (*k)[i];
  }

  const MutationKernel& gamma_;
  const VitalRates& v_;
  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, cand_;
};

void clip_in_place(std::vector<double>& w) {
  for (double& x : w)
    if (x < 0.0 && x >= -1e-9) x = 0.0;
}

}  // namespace

Trajectory integrate_ode(const AtomicMeasure& u, const MutationKernel& gamma,
                         const VitalRates& v, double t_final, const OdeOptions& opts) {
  check_shapes(u, gamma, v);
  if (!(t_final > 0.0)) throw std::invalid_argument("final time must be > 0");
  if (!u.in_positive_cone()) throw std::invalid_argument("initial measure must be in the positive cone");
  if (opts.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  const bool rk4 = opts.method == OdeOptions::Method::rk4;
  if (rk4 && !(opts.step > 0.0)) throw std::invalid_argument("step size must be > 0");
  if (!rk4 && !(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  Trajectory traj;
  Integrator integ(gamma, v, u.size());
  std::vector<double> y = u.weights();
  std::vector<double> next(u.size());
  double t = 0.0;
  double h = rk4 ? opts.step : std::min(opts.step, t_final);
  traj.times.push_back(0.0);
  traj.states.push_back(u);

  long accepted_since_record = 0;
  while (t < t_final * (1.0 - 1e-14)) {
    const double h_try = std::min(h, t_final - t);
    StepResult r = rk4 ? integ.rk4_step(y, h_try, next)
                       : integ.rk45_step(y, h_try, opts.tol, next);
    if (!r.accepted) {
      ++traj.stats.rejected;
      if (!rk4 && r.error > opts.tol && min_weight(next) >= -1e-9) {
        const double shrink = std::max(0.2, 0.9 * std::pow(opts.tol / r.error, 0.2));
        h = h_try * shrink;
      } else {
        h = h_try * 0.5;  // cone violation
      }
      if (h < 1e-12) throw NumericalError("stiffness or invalid rates");
      continue;
    }
    y.swap(next);
    t += h_try;
    ++traj.stats.steps;
    ++accepted_since_record;
    if (rk4) {
      h = opts.step;  // restore the nominal step after any halvings
    } else {
      traj.stats.max_error = std::max(traj.stats.max_error, r.error);
      const double grow = r.error > 0.0
                              ? std::clamp(0.9 * std::pow(opts.tol / r.error, 0.2), 0.2, 5.0)
                              : 5.0;
      h = h_try * grow;
    }
    const bool last = t >= t_final * (1.0 - 1e-14);
    if (accepted_since_record >= opts.record_every || last) {
      accepted_since_record = 0;
      clip_in_place(y);
      traj.times.push_back(last ? t_final : t);
      traj.states.push_back(AtomicMeasure(u.space(), y));
    }
  }
  return traj;
}

}  // namespace evodyn
