#include "evodyn/vitals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evodyn {

namespace {

void require_sizes(const std::vector<double>& b, const std::vector<double>& d,
                   const std::vector<double>& coef) {
  if (b.empty()) throw std::invalid_argument("vital rates need at least one strategy");
  if (b.size() != d.size() || b.size() != coef.size())
    throw std::invalid_argument("vital rate parameter vectors must have equal length");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!std::isfinite(b[i]) || b[i] < 0.0) throw std::invalid_argument("birth rate must be finite and >= 0");
    if (!std::isfinite(d[i]) || d[i] <= 0.0) throw std::invalid_argument("mortality rate must be finite and > 0");
    if (!std::isfinite(coef[i]) || coef[i] < 0.0)
      throw std::invalid_argument("density coefficient must be finite and >= 0");
  }
}

}  // namespace

VitalRates::VitalRates(VitalFamily family, std::vector<double> b, std::vector<double> d,
                       std::vector<double> coef, double x_max)
    : family_(family), n_(b.size()), b_(std::move(b)), d_(std::move(d)),
      coef_(std::move(coef)), x_max_(x_max) {
  if (x_max_ <= 0.0) x_max_ = default_x_max();
}

VitalRates VitalRates::logistic(std::vector<double> b, std::vector<double> d,
                                std::vector<double> c, double x_max) {
  require_sizes(b, d, c);
  return VitalRates(VitalFamily::logistic, std::move(b), std::move(d), std::move(c), x_max);
}

VitalRates VitalRates::ricker(std::vector<double> b, std::vector<double> d,
                              std::vector<double> a, double x_max) {
  require_sizes(b, d, a);
  return VitalRates(VitalFamily::ricker, std::move(b), std::move(d), std::move(a), x_max);
}

VitalRates VitalRates::beverton_holt(std::vector<double> b, std::vector<double> d,
                                     std::vector<double> a, double x_max) {
  require_sizes(b, d, a);
  return VitalRates(VitalFamily::beverton_holt, std::move(b), std::move(d), std::move(a), x_max);
}

VitalRates VitalRates::tabulated(std::vector<double> x_knots,
                                 std::vector<std::vector<double>> f1,
                                 std::vector<std::vector<double>> f2, double x_max) {
  if (x_knots.size() < 2) throw std::invalid_argument("tabulated rates need at least two X knots");
  if (!std::is_sorted(x_knots.begin(), x_knots.end()))
    throw std::invalid_argument("tabulated X knots must be sorted");
  if (x_knots.front() != 0.0) throw std::invalid_argument("tabulated X knots must start at 0");
  if (f1.size() != x_knots.size() || f2.size() != x_knots.size())
    throw std::invalid_argument("tabulated rate rows must match the X knots");
  const std::size_t n = f1.front().size();
  if (n == 0) throw std::invalid_argument("vital rates need at least one strategy");
  for (std::size_t r = 0; r < x_knots.size(); ++r) {
    if (f1[r].size() != n || f2[r].size() != n)
      throw std::invalid_argument("tabulated rate rows must have equal length");
    for (std::size_t q = 0; q < n; ++q) {
      if (!std::isfinite(f1[r][q]) || f1[r][q] < 0.0)
        throw std::invalid_argument("tabulated f1 must be finite and >= 0");
      if (!std::isfinite(f2[r][q]) || f2[r][q] <= 0.0)
        throw std::invalid_argument("tabulated f2 must be finite and > 0");
    }
  }
  VitalRates v;
  v.family_ = VitalFamily::tabulated;
  v.n_ = n;
  v.x_knots_ = std::move(x_knots);
  v.tab_f1_ = std::move(f1);
  v.tab_f2_ = std::move(f2);
  v.x_max_ = x_max > 0.0 ? x_max : v.x_knots_.back();
  return v;
}

double VitalRates::default_x_max() const {
  // 10x the largest closed-form capacity, falling back to the b/d scale
  // where the family has no density dependence at a point.
  double scale = 1.0;
  for (std::size_t q = 0; q < n_; ++q) {
    double s;
    if (coef_[q] > 0.0) {
      switch (family_) {
        case VitalFamily::logistic: s = std::max(0.0, (b_[q] - d_[q]) / coef_[q]); break;
        case VitalFamily::ricker:
          s = b_[q] > d_[q] ? std::log(b_[q] / d_[q]) / coef_[q] : 0.0;
          break;
        case VitalFamily::beverton_holt:
          s = std::max(0.0, (b_[q] - d_[q]) / (d_[q] * coef_[q]));
          break;
        default: s = 0.0; break;
      }
      s = std::max(s, b_[q] / d_[q]);
    } else {
      s = b_[q] / d_[q];
    }
    scale = std::max(scale, s);
  }
  return 10.0 * scale;
}

double VitalRates::interp(const std::vector<std::vector<double>>& tab, double X,
                          std::size_t q) const {
  if (X <= x_knots_.front()) return tab.front()[q];
  if (X >= x_knots_.back()) return tab.back()[q];
  const auto it = std::upper_bound(x_knots_.begin(), x_knots_.end(), X);
  const std::size_t hi = static_cast<std::size_t>(it - x_knots_.begin());
  const std::size_t lo = hi - 1;
  const double t = (X - x_knots_[lo]) / (x_knots_[hi] - x_knots_[lo]);
  return (1.0 - t) * tab[lo][q] + t * tab[hi][q];
}

double VitalRates::interp_slope(const std::vector<std::vector<double>>& tab, double X,
                                std::size_t q) const {
  if (X <= x_knots_.front() || X >= x_knots_.back()) return 0.0;
  const auto it = std::upper_bound(x_knots_.begin(), x_knots_.end(), X);
  const std::size_t hi = static_cast<std::size_t>(it - x_knots_.begin());
  const std::size_t lo = hi - 1;
  return (tab[hi][q] - tab[lo][q]) / (x_knots_[hi] - x_knots_[lo]);
}

double VitalRates::birth(double X, std::size_t q) const {
  if (q >= n_) throw std::out_of_range("strategy index out of range");
  switch (family_) {
    case VitalFamily::logistic: return b_[q];
    case VitalFamily::ricker: return b_[q] * std::exp(-coef_[q] * X);
    case VitalFamily::beverton_holt: return b_[q] / (1.0 + coef_[q] * X);
    case VitalFamily::tabulated: return interp(tab_f1_, X, q);
  }
  return 0.0;
}

double VitalRates::death(double X, std::size_t q) const {
  if (q >= n_) throw std::out_of_range("strategy index out of range");
  switch (family_) {
    case VitalFamily::logistic: return d_[q] + coef_[q] * X;
    case VitalFamily::ricker:
    case VitalFamily::beverton_holt: return d_[q];
    case VitalFamily::tabulated: return interp(tab_f2_, X, q);
  }
  return 0.0;
}

double VitalRates::birth_dX(double X, std::size_t q) const {
  if (q >= n_) throw std::out_of_range("strategy index out of range");
  switch (family_) {
    case VitalFamily::logistic: return 0.0;
    case VitalFamily::ricker: return -coef_[q] * b_[q] * std::exp(-coef_[q] * X);
    case VitalFamily::beverton_holt: {
      const double u = 1.0 + coef_[q] * X;
      return -b_[q] * coef_[q] / (u * u);
    }
    case VitalFamily::tabulated: return interp_slope(tab_f1_, X, q);
  }
  return 0.0;
}

double VitalRates::death_dX(double X, std::size_t q) const {
  if (q >= n_) throw std::out_of_range("strategy index out of range");
  switch (family_) {
    case VitalFamily::logistic: return coef_[q];
    case VitalFamily::ricker:
    case VitalFamily::beverton_holt: return 0.0;
    case VitalFamily::tabulated: return interp_slope(tab_f2_, X, q);
  }
  return 0.0;
}

double VitalRates::reproductive_number(double X, std::size_t q) const {
  if (X < 0.0) throw std::invalid_argument("population size must be >= 0");
  const double f2 = death(X, q);
  if (f2 <= 0.0) throw std::domain_error("mortality vanished: A2 violated");
  return birth(X, q) / f2;
}

double VitalRates::carrying_capacity(std::size_t q) const {
  if (reproductive_number(0.0, q) < 1.0) return 0.0;
  if (reproductive_number(x_max_, q) > 1.0) return kUnboundedCapacity;
  double lo = 0.0, hi = x_max_;
  // invariant: R(lo) >= 1 >= R(hi)
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (reproductive_number(mid, q) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double VitalRates::min_inherent_mortality() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < n_; ++q) m = std::min(m, death(0.0, q));
  return m;
}

FitnessReport fitness_report(const VitalRates& v, const StrategySpace& space, double tie_tol) {
  if (tie_tol < 0.0) throw std::invalid_argument("tie tolerance must be >= 0");
  if (v.size() != space.size())
    throw std::invalid_argument("vital rates do not match the strategy space");
  FitnessReport rep;
  const std::size_t n = v.size();
  rep.R0.resize(n);
  rep.K.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    rep.R0[q] = v.reproductive_number(0.0, q);
    rep.K[q] = v.carrying_capacity(q);
  }
  const double max_r = *std::max_element(rep.R0.begin(), rep.R0.end());
  const double min_r = *std::min_element(rep.R0.begin(), rep.R0.end());
  const double band_hi = tie_tol * std::max(1.0, std::abs(max_r));
  const double band_lo = tie_tol * std::max(1.0, std::abs(min_r));
  for (std::size_t q = 0; q < n; ++q) {
    if (rep.R0[q] >= max_r - band_hi) rep.fittest.push_back(q);
    if (rep.R0[q] <= min_r + band_lo) rep.weakest.push_back(q);
  }
  rep.K_Q = rep.K[rep.fittest.front()];
  rep.k_q = rep.K[rep.weakest.front()];
  rep.capacity_unbounded = std::isinf(rep.K_Q);
  return rep;
}

std::vector<double> default_x_grid(const VitalRates& v, std::size_t count) {
  if (count < 2) count = 2;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = v.x_max() * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

namespace {

int sign_of(double x, double tol) {
  if (x > tol) return 1;
  if (x < -tol) return -1;
  return 0;
}

}  // namespace

AssumptionReport check_assumptions(const VitalRates& v, const StrategySpace& space,
                                   const std::vector<double>& x_grid, double tie_tol) {
  if (x_grid.empty()) throw std::invalid_argument("assumption check needs a nonempty X grid");
  if (!std::is_sorted(x_grid.begin(), x_grid.end()))
    throw std::invalid_argument("X grid must be sorted");
  if (x_grid.front() < 0.0 || x_grid.back() > v.x_max() * (1.0 + 1e-12))
    throw std::invalid_argument("X grid must lie within [0, x_max]");

  AssumptionReport rep;
  const std::size_t n = v.size();

  // A1/A2: sampled sign and monotonicity of f1, f2.
  auto sampled_monotone = [&](auto&& rate, bool nonincreasing, bool strictly_positive,
                              const char* name) -> AssumptionCheck {
    for (std::size_t q = 0; q < n; ++q) {
      double prev = rate(x_grid.front(), q);
      if (strictly_positive ? prev <= 0.0 : prev < 0.0)
        return {false, std::string(name) + " has the wrong sign"};
      for (std::size_t k = 1; k < x_grid.size(); ++k) {
        const double cur = rate(x_grid[k], q);
        if (strictly_positive ? cur <= 0.0 : cur < 0.0)
          return {false, std::string(name) + " has the wrong sign"};
        const double slack = 1e-12 * std::max(1.0, std::abs(prev));
        const bool bad = nonincreasing ? cur > prev + slack : cur < prev - slack;
        if (bad) {
          std::ostringstream os;
          os << name << " is not " << (nonincreasing ? "nonincreasing" : "nondecreasing")
             << " in X at strategy " << q;
          return {false, os.str()};
        }
        prev = cur;
      }
    }
    return {true, {}};
  };
  rep.a1 = sampled_monotone([&](double X, std::size_t q) { return v.birth(X, q); },
                            /*nonincreasing=*/true, /*strictly_positive=*/false, "f1");
  rep.a2 = sampled_monotone([&](double X, std::size_t q) { return v.death(X, q); },
                            /*nonincreasing=*/false, /*strictly_positive=*/true, "f2");
  rep.varpi = v.min_inherent_mortality();
  if (rep.a2.pass && rep.varpi <= 0.0) rep.a2 = {false, "inherent mortality not positive"};

  const FitnessReport fit = fitness_report(v, space, tie_tol);

  // A3: finite capacity of the fittest class.
  if (fit.capacity_unbounded)
    rep.a3 = {false, "carrying capacity of the fittest class is unbounded"};

  // A4: the fitness ordering is the same at every sampled population size.
  for (std::size_t q = 0; q < n && rep.a4.pass; ++q) {
    for (std::size_t p = q + 1; p < n && rep.a4.pass; ++p) {
      const double r0 = fit.R0[q] - fit.R0[p];
      const int s0 = sign_of(r0, tie_tol * std::max(1.0, std::abs(fit.R0[q])));
      for (double X : x_grid) {
        const double rX = v.reproductive_number(X, q) - v.reproductive_number(X, p);
        const int sX = sign_of(rX, tie_tol * std::max(1.0, std::abs(v.reproductive_number(X, q))));
        if (sX != s0) {
          std::ostringstream os;
          os << "fitness order of strategies " << q << " and " << p << " flips at X=" << X;
          rep.a4 = {false, os.str()};
          break;
        }
      }
    }
  }

  // A5: R(., q) crosses 1 strictly at the root for the extremal classes.
  for (std::size_t which = 0; which < 2; ++which) {
    const std::size_t q = which == 0 ? fit.fittest.front() : fit.weakest.front();
    const double K = fit.K[q];
    if (!std::isfinite(K) || K <= 0.0) continue;
    const double h = 1e-6 * std::max(1.0, K);
    const double left = v.reproductive_number(std::max(0.0, K - h), q);
    const double right = v.reproductive_number(std::min(v.x_max(), K + h), q);
    if (std::abs(right - 1.0) < 1e-12) {
      rep.plateau = true;  // flat stretch of R == 1; inf picks the left edge
    }
    if (!(left >= 1.0) || right > 1.0 + 1e-9) {
      rep.a5 = {false, "R does not cross 1 strictly at the capacity root"};
    }
  }

  // A6: d/dX (f1 - f2) < 0 at (K_Q, fittest), by central difference.
  if (!fit.capacity_unbounded) {
    const std::size_t Q = fit.fittest.front();
    const double K = fit.K_Q;
    const double h = 1e-6 * std::max(1.0, K);
    const double fp = v.birth(K + h, Q) - v.death(K + h, Q);
    const double fm = v.birth(std::max(0.0, K - h), Q) - v.death(std::max(0.0, K - h), Q);
    const double slope = (fp - fm) / (K + h - std::max(0.0, K - h));
    if (!(slope < 0.0)) rep.a6 = {false, "f1 - f2 is not strictly decreasing in X at the fittest capacity"};
  } else {
    rep.a6 = {false, "not evaluable: fittest capacity unbounded"};
  }

  return rep;
}

}  // namespace evodyn
