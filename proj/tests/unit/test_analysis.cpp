#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evodyn/analysis.hpp"
#include "evodyn/flat_metric.hpp"

using namespace evodyn;

namespace {

SpacePtr pair_space() { return make_finite({{{2, 1}}, {{1.5, 1}}}); }

VitalRates pair_logistic() { return VitalRates::logistic({2, 1.5}, {1, 1}, {1, 1}); }

}  // namespace

TEST_CASE("permanence report on a single strategy") {
  auto s = make_finite({{{2, 1}}});
  auto v = VitalRates::logistic({2}, {1}, {1});
  OdeOptions opts;
  opts.record_every = 50;
  auto traj = integrate_ode(AtomicMeasure::dirac(s, 0, 0.1), MutationKernel::pure_selection(1),
                            v, 100.0, opts);
  auto rep = permanence_check(traj, v);
  CHECK(rep.k_q == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.K_Q == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.envelope_ok);
  CHECK(rep.liminf_est == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.limsup_est == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.permanent);
}

TEST_CASE("subcritical populations decay to zero") {
  auto s = make_finite({{{0.5, 1}}});
  auto v = VitalRates::logistic({0.5}, {1}, {1});
  OdeOptions opts;
  opts.record_every = 50;
  auto traj = integrate_ode(AtomicMeasure::dirac(s, 0, 0.1), MutationKernel::pure_selection(1),
                            v, 100.0, opts);
  auto rep = permanence_check(traj, v);
  CHECK(rep.K_Q == 0.0);
  CHECK(rep.k_q == 0.0);
  CHECK(rep.limsup_est < 1e-4);
  CHECK(rep.envelope_ok);
  CHECK_FALSE(rep.permanent);
}

TEST_CASE("zero initial data gives a degenerate but valid report") {
  auto s = pair_space();
  auto v = pair_logistic();
  auto traj = integrate_ode(AtomicMeasure::zero(s), MutationKernel::pure_selection(2), v, 1.0);
  auto rep = permanence_check(traj, v);
  CHECK(rep.envelope_ok);
  CHECK(rep.liminf_est == 0.0);
  CHECK(rep.limsup_est == 0.0);
}

TEST_CASE("persistence condition hand values") {
  auto v = pair_logistic();
  auto id = MutationKernel::pure_selection(2);
  SUBCASE("supercritical at eps = 0.5") {
    CHECK(persistence_condition(v, id, {0}, 0.5));  // R = 2/1.5 = 4/3 > 1
  }
  SUBCASE("subcritical at eps = 1.5") {
    CHECK_FALSE(persistence_condition(v, id, {0}, 1.5));  // R = 0.8 < 1
  }
  SUBCASE("offspring all leave the set") {
    auto leak = MutationKernel::custom({{0.0, 1.0}, {0.5, 0.5}});
    CHECK_FALSE(persistence_condition(v, leak, {0}, 0.5));
  }
  SUBCASE("empty set is an error") {
    CHECK_THROWS_AS(persistence_condition(v, id, {}, 0.5), std::invalid_argument);
  }
}

TEST_CASE("relative fitness values") {
  auto v = pair_logistic();
  CHECK(relative_fitness(v, 0, 0) == doctest::Approx(0.0));
  CHECK(relative_fitness(v, 0, 1) == doctest::Approx(-0.25));
  CHECK(relative_fitness(v, 1, 0) == doctest::Approx(1.0 / 3));
  auto unbounded = VitalRates::logistic({2, 1.5}, {1, 1}, {0, 0});
  CHECK_THROWS_AS(relative_fitness(unbounded, 0, 1), std::domain_error);
}

TEST_CASE("ess classification") {
  auto s = pair_space();
  auto v = pair_logistic();
  CHECK(is_ess(v, *s, 0));
  CHECK_FALSE(is_ess(v, *s, 1));
  auto same = VitalRates::logistic({2, 2}, {1, 1}, {1, 1});
  CHECK(is_ess(same, *s, 0));  // one class: vacuously an ESS
  CHECK(is_ess(same, *s, 1));
}

TEST_CASE("css diagnostic on the two-strategy game") {
  auto s = pair_space();
  auto v = pair_logistic();
  OdeOptions opts;
  opts.record_every = 500;
  SUBCASE("converges from a supported start") {
    auto traj = integrate_ode(AtomicMeasure(s, {0.1, 0.1}), MutationKernel::pure_selection(2), v,
                              200.0, opts);
    auto rep = css_diagnostic(traj, v, 1e-12, 1e-3);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.converged);
    CHECK(rep.distance_to_target < 1e-3);
    CHECK(rep.K_Q == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("flags a start supported off the fittest class") {
    auto traj = integrate_ode(AtomicMeasure(s, {0.0, 0.1}), MutationKernel::pure_selection(2), v,
                              10.0, opts);
    auto rep = css_diagnostic(traj, v, 1e-12, 1e-3);
    CHECK_FALSE(rep.hypothesis_ok);
    CHECK_FALSE(rep.converged);
  }
}

TEST_CASE("newton equilibrium for pure selection") {
  auto s = pair_space();
  auto v = pair_logistic();
  auto id = MutationKernel::pure_selection(2);
  SUBCASE("boundary equilibrium from a nearby guess") {
    auto eq = find_equilibrium(v, id, AtomicMeasure(s, {0.9, 0.1}));
    CHECK(eq.converged);
    CHECK(eq.residual < 1e-12);
    CHECK(eq.state.weights()[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(eq.state.weights()[1]) < 1e-9);
    CHECK(eq.in_cone);
    CHECK(eq.stable);
  }
  SUBCASE("zero guess converges to the trivial equilibrium") {
    auto eq = find_equilibrium(v, id, AtomicMeasure::zero(s));
    CHECK(eq.converged);
    CHECK(eq.residual == 0.0);
    CHECK(eq.state.total_variation() == 0.0);
  }
  SUBCASE("small mutation keeps a stable equilibrium near the boundary one") {
    auto eq = find_equilibrium(v, MutationKernel::epsilon_uniform(2, 0.01),
                               AtomicMeasure(s, {1.0, 0.0}));
    CHECK(eq.converged);
    CHECK(eq.residual <= 1e-10);
    CHECK(eq.stable);
    CHECK(eq.state.weights()[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(eq.state.weights()[1] < 0.05);
  }
}

TEST_CASE("equilibria are fixed points of the flow") {
  auto s = pair_space();
  auto v = pair_logistic();
  auto gamma = MutationKernel::epsilon_uniform(2, 0.05);
  auto eq = find_equilibrium(v, gamma, AtomicMeasure(s, {0.9, 0.05}));
  REQUIRE(eq.converged);
  REQUIRE(eq.in_cone);
  OdeOptions opts;
  opts.record_every = 1 << 20;
  auto traj = integrate_ode(eq.state.clipped_nonnegative(1e-9), gamma, v, 10.0, opts);
  CHECK(flat_distance(traj.final_state(), eq.state) < 1e-6);
}

TEST_CASE("analytic spectrum of the pure-selection linearization") {
  SUBCASE("two strategies") {
    auto v = pair_logistic();
    auto eig = analytic_spectrum_pure_selection(v, *pair_space());
    REQUIRE(eig.size() == 2);
    CHECK(eig[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("single strategy keeps only the mass direction") {
    auto s = make_finite({{{2, 1}}});
    auto v = VitalRates::logistic({2}, {1}, {1});
    auto eig = analytic_spectrum_pure_selection(v, *s);
    REQUIRE(eig.size() == 1);
    CHECK(eig[0] == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("a third strategy adds its invasion rate") {
    auto s = make_finite({{{2, 1}}, {{1.5, 1}}, {{1.2, 1}}});
    auto v = VitalRates::logistic({2, 1.5, 1.2}, {1, 1, 1}, {1, 1, 1});
    auto eig = analytic_spectrum_pure_selection(v, *s);
    REQUIRE(eig.size() == 3);
    CHECK(eig[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(eig[2] == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("tied fittest strategies are rejected") {
    auto v = VitalRates::logistic({2, 2}, {1, 1}, {1, 1});
    CHECK_THROWS_AS(analytic_spectrum_pure_selection(v, *pair_space()), std::invalid_argument);
  }
}

TEST_CASE("numerical spectrum agrees with the analytic multiset") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> b(1.2, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> bs = {b(rng), b(rng), b(rng), b(rng)};
    std::vector<StrategyPoint> pts;
    for (int i = 0; i < 4; ++i) pts.push_back({{static_cast<double>(i)}});
    auto s = make_finite(std::move(pts));
    auto v = VitalRates::logistic(bs, {1, 1, 1, 1}, {1, 1, 1, 1});
    const FitnessReport fit = fitness_report(v, *s, 0.0);
    if (fit.fittest.size() != 1) continue;

    auto analytic = analytic_spectrum_pure_selection(v, *s, 0.0);
    auto eq = find_equilibrium(v, MutationKernel::pure_selection(4),
                               AtomicMeasure::dirac(s, fit.fittest.front(), fit.K_Q));
    REQUIRE(eq.converged);
    REQUIRE(eq.eigenvalues.size() == analytic.size());
    std::vector<double> numeric;
    for (const auto& z : eq.eigenvalues) {
      CHECK(std::abs(z.imag()) < 1e-9);
      numeric.push_back(z.real());
    }
    std::sort(numeric.begin(), numeric.end());
    for (std::size_t k = 0; k < analytic.size(); ++k)
      CHECK(std::abs(numeric[k] - analytic[k]) < 1e-6);
  }
}

TEST_CASE("continuation follows the small-mutation branch") {
  std::vector<StrategyPoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({{2.0 - 0.2 * i}});
  auto s = make_finite(std::move(pts));
  auto v = VitalRates::logistic({2.0, 1.8, 1.6, 1.4, 1.2}, std::vector<double>(5, 1.0),
                                std::vector<double>(5, 1.0));
  auto family = [&](double eps) { return MutationKernel::epsilon_uniform(5, eps); };

  SUBCASE("distances shrink along decreasing epsilon") {
    auto res = continuation(v, s, family, {0.1, 0.01, 0.001});
    REQUIRE(res.completed);
    REQUIRE(res.entries.size() == 3);
    for (const auto& e : res.entries) {
      CHECK(e.equilibrium.converged);
      CHECK(e.equilibrium.residual <= 1e-10);
      CHECK(e.equilibrium.stable);
    }
    CHECK(res.entries[0].distance_to_limit > res.entries[1].distance_to_limit);
    CHECK(res.entries[1].distance_to_limit > res.entries[2].distance_to_limit);
  }
  SUBCASE("epsilon zero recovers the pure-selection equilibrium exactly") {
    auto res = continuation(v, s, family, {0.01, 0.0});
    REQUIRE(res.completed);
    REQUIRE(res.entries.size() == 2);
    CHECK(res.entries[1].distance_to_limit < 1e-9);
    CHECK(res.entries[1].equilibrium.state.weights()[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("a non-decreasing list is rejected") {
    CHECK_THROWS_AS(continuation(v, s, family, {0.01, 0.1}), std::invalid_argument);
  }
}

TEST_CASE("continuation with identical strategies stays at the uniform equilibrium") {
  auto s = make_finite({{{0.0}}, {{1.0}}, {{2.0}}});
  auto v = VitalRates::logistic({2, 2, 2}, {1, 1, 1}, {1, 1, 1});
  auto family = [&](double eps) { return MutationKernel::epsilon_uniform(3, eps); };
  auto res = continuation(v, s, family, {0.1, 0.01});
  REQUIRE(res.completed);
  for (const auto& e : res.entries) {
    CHECK(e.equilibrium.converged);
    CHECK(e.equilibrium.state.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(e.distance_to_limit < 1e-8);  // the uniform spread is already the equilibrium
    // the mass-direction eigenvalue stays at the analytic value f_X = -c K
    const double want = -1.0;
    bool found = false;
    for (const auto& z : e.equilibrium.eigenvalues)
      found = found || std::abs(z - std::complex<double>(want, 0.0)) < 1e-8;
    CHECK(found);
  }
}
