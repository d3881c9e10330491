#include <doctest.h>

#include <cmath>
#include <random>

#include "evodyn/flat_metric.hpp"
#include "evodyn/partition.hpp"

using namespace evodyn;

namespace {

SpacePtr unit_grid(int n) { return make_grid({{0.0, 1.0}}, {n}); }

AtomicMeasure dyadic_measure(std::mt19937& rng, const SpacePtr& s, bool nonnegative) {
  std::uniform_int_distribution<int> num(nonnegative ? 0 : -1024, 1024);
  std::vector<double> w(s->size());
  for (auto& x : w) x = num(rng) / 1024.0;  // exactly representable weights
  return AtomicMeasure(s, std::move(w));
}

}  // namespace

TEST_CASE("top and bottom partitions") {
  auto s = unit_grid(4);
  auto top = partition_top(s);
  CHECK(top.num_classes == 1);
  CHECK(top.is_top());
  auto bottom = partition_bottom(s);
  CHECK(bottom.num_classes == 4);
  CHECK(bottom.is_bottom());
  AtomicMeasure mu(s, {1, 2, 3, 4});
  CHECK(project(mu, top).weights() == std::vector<double>{10});
  CHECK(project(mu, bottom).weights() == mu.weights());
}

TEST_CASE("fitness level sets cluster equal values") {
  auto s = make_finite({{{0.0}}, {{1.0}}, {{2.0}}});
  auto v = VitalRates::logistic({2, 2, 1.5}, {1, 1, 1}, {1, 1, 1});
  auto p = partition_r_level_sets(s, v, 1e-9);
  REQUIRE(p.num_classes == 2);
  // classes ordered by ascending fitness: class 0 holds R0 = 1.5
  CHECK(p.labels == std::vector<std::size_t>{1, 1, 0});
  CHECK(p.quotient->distance(0, 1) == doctest::Approx(0.5));
  CHECK(p.class_values[0] == doctest::Approx(1.5));
  CHECK(p.class_values[1] == doctest::Approx(2.0));
}

TEST_CASE("refinement order") {
  auto s = make_finite({{{0.0}}, {{1.0}}, {{2.0}}});
  auto bottom = partition_bottom(s);
  auto top = partition_top(s);
  auto left = partition_custom(s, {0, 1, 1});   // {{0},{1,2}}
  auto right = partition_custom(s, {0, 0, 1});  // {{0,1},{2}}
  CHECK(refines(bottom, left));
  CHECK(refines(bottom, top));
  CHECK(refines(left, top));
  CHECK(refines(left, left));
  CHECK_FALSE(refines(left, right));
  CHECK_FALSE(refines(right, left));
  CHECK_FALSE(refines(top, bottom));
}

TEST_CASE("quotient maps") {
  auto s = make_finite({{{0.0}}, {{1.0}}, {{2.0}}});
  auto bottom = partition_bottom(s);
  auto top = partition_top(s);
  auto mid = partition_custom(s, {0, 0, 1});
  SUBCASE("bottom to top is constant") {
    CHECK(quotient_map(bottom, top) == std::vector<std::size_t>{0, 0, 0});
  }
  SUBCASE("identity") {
    CHECK(quotient_map(mid, mid) == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("containment") {
    CHECK(quotient_map(bottom, mid) == std::vector<std::size_t>{0, 0, 1});
  }
  SUBCASE("not a refinement") {
    CHECK_THROWS_AS(quotient_map(top, bottom), std::invalid_argument);
  }
  SUBCASE("composition law") {
    auto phi_bm = quotient_map(bottom, mid);
    auto phi_mt = quotient_map(mid, top);
    auto phi_bt = quotient_map(bottom, top);
    for (std::size_t c = 0; c < bottom.num_classes; ++c)
      CHECK(phi_mt[phi_bm[c]] == phi_bt[c]);
  }
}

TEST_CASE("projection by hand") {
  auto s = make_finite({{{0.0}}, {{1.0}}, {{2.0}}});
  auto p = partition_custom(s, {0, 0, 1});
  AtomicMeasure mu(s, {1, 2, 3});
  auto q = project(mu, p);
  CHECK(q.weights() == std::vector<double>{3, 3});
}

TEST_CASE("diagram commutes exactly on dyadic weights") {
  std::mt19937 rng(5150);
  auto s = unit_grid(16);
  std::uniform_int_distribution<std::size_t> lab(0, 4);
  for (int trial = 0; trial < 25; ++trial) {
    // random chain p1 finer than p2: p2 merges p1 classes
    std::vector<std::size_t> l1(16), merge(8);
    for (auto& l : l1) l = lab(rng) + (lab(rng) % 2) * 3;  // up to 8 classes, maybe sparse
    // compact labels
    {
      std::vector<long> remap(9, -1);
      std::size_t next = 0;
      for (auto& l : l1) {
        if (remap[l] < 0) remap[l] = static_cast<long>(next++);
        l = static_cast<std::size_t>(remap[l]);
      }
    }
    auto p1 = partition_custom(s, l1);
    for (auto& m : merge) m = lab(rng) % 2;
    std::vector<std::size_t> l2(16);
    for (std::size_t i = 0; i < 16; ++i) l2[i] = merge[l1[i] % merge.size()];
    {
      std::vector<long> remap(3, -1);
      std::size_t next = 0;
      for (auto& l : l2) {
        if (remap[l] < 0) remap[l] = static_cast<long>(next++);
        l = static_cast<std::size_t>(remap[l]);
      }
    }
    auto p2 = partition_custom(s, l2);
    REQUIRE(refines(p1, p2));
    auto mu = dyadic_measure(rng, s, false);
    auto via_p1 = project(mu, p1).pushforward(quotient_map(p1, p2), p2.quotient);
    auto direct = project(mu, p2);
    CHECK(via_p1.weights() == direct.weights());  // exact: dyadic sums are exact
  }
}

TEST_CASE("projection is linear and preserves the cone") {
  std::mt19937 rng(6021023);
  auto s = unit_grid(12);
  auto p = partition_dyadic(s, 2);
  for (int trial = 0; trial < 20; ++trial) {
    auto mu = dyadic_measure(rng, s, false);
    auto nu = dyadic_measure(rng, s, false);
    auto lhs = project(linear_combine(1.5, mu, -2.0, nu), p);
    auto rhs = linear_combine(1.5, project(mu, p), -2.0, project(nu, p));
    for (std::size_t c = 0; c < lhs.size(); ++c)
      CHECK(lhs.weights()[c] == doctest::Approx(rhs.weights()[c]).epsilon(1e-12));
    auto pos = dyadic_measure(rng, s, true);
    CHECK(project(pos, p).in_positive_cone());
  }
}

TEST_CASE("dyadic refine sequence nests with shrinking diameters") {
  auto s = unit_grid(64);
  auto seq = refine_sequence(s, 4);
  REQUIRE(seq.size() == 4);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].max_class_diameter() < 1.0 / static_cast<double>(i + 1));
    if (i + 1 < seq.size()) {
      CHECK(refines(seq[i + 1], seq[i]));
      CHECK(seq[i + 1].num_classes >= seq[i].num_classes);
    }
  }
}

TEST_CASE("approximation places class mass at representatives") {
  SUBCASE("bottom partition reproduces the measure") {
    auto s = unit_grid(5);
    AtomicMeasure mu(s, {0.1, 0.2, 0.3, 0.2, 0.2});
    CHECK(approximate(mu, partition_bottom(s)).weights() == mu.weights());
  }
  SUBCASE("top partition concentrates the total mass") {
    auto s = unit_grid(5);
    AtomicMeasure mu(s, {0.1, 0.2, 0.3, 0.2, 0.2});
    auto appr = approximate(mu, partition_top(s));
    CHECK(appr.total_mass() == doctest::Approx(1.0));
    CHECK(appr.weights()[partition_top(s).representatives[0]] == doctest::Approx(1.0));
  }
  SUBCASE("two-cell split of the quarter-uniform measure") {
    auto s = make_finite({{{0.0}}, {{1.0 / 3}}, {{2.0 / 3}}, {{1.0}}});
    AtomicMeasure mu(s, {0.25, 0.25, 0.25, 0.25});
    auto p = partition_custom(s, {0, 0, 1, 1}, {0, 3});  // cells [0,1/2), [1/2,1]
    auto appr = approximate(mu, p);
    CHECK(appr.weights() == std::vector<double>{0.5, 0.0, 0.0, 0.5});
    CHECK(flat_distance(appr, mu) <= 1.0 / 3 + 1e-12);
  }
}

TEST_CASE("approximation error is bounded by diameter times mass") {
  std::mt19937 rng(112358);
  auto s = unit_grid(64);
  for (int trial = 0; trial < 8; ++trial) {
    auto mu = dyadic_measure(rng, s, true);
    double prev_bound = std::numeric_limits<double>::infinity();
    for (int level = 1; level <= 5; ++level) {
      auto p = partition_dyadic(s, level);
      const double bound = p.max_class_diameter() * mu.total_variation();
      CHECK(flat_distance(approximate(mu, p), mu) <= bound + 1e-12);
      CHECK(bound <= prev_bound + 1e-15);
      prev_bound = bound;
    }
  }
}

TEST_CASE("mod limit detection") {
  auto s = make_finite({{{0.0}}, {{1.0}}});
  SUBCASE("constant trajectory returns its projection") {
    Trajectory traj;
    for (int k = 0; k < 10; ++k) {
      traj.times.push_back(k);
      traj.states.push_back(AtomicMeasure(s, {0.25, 0.75}));
    }
    auto lim = mod_limit(traj, partition_top(s), 0.5, 1e-9);
    REQUIRE(lim.has_value());
    CHECK(lim->weights() == std::vector<double>{1.0});
  }
  SUBCASE("oscillating trajectory has no limit") {
    Trajectory traj;
    for (int k = 0; k < 10; ++k) {
      traj.times.push_back(k);
      traj.states.push_back(AtomicMeasure(s, {k % 2 ? 1.0 : 0.5, 0.0}));
    }
    CHECK_FALSE(mod_limit(traj, partition_top(s), 0.5, 1e-3).has_value());
  }
}

TEST_CASE("pushforward along quotient maps is weak* stable") {
  // flat(push mu, push nu) <= max(1, Lip(phi)) * flat(mu, nu) with the
  // empirical Lipschitz bound of the class map
  std::mt19937 rng(7531);
  auto s = unit_grid(12);
  auto v = VitalRates::logistic({2.0, 1.9, 1.8, 1.7, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0, 0.9},
                                std::vector<double>(12, 1.0), std::vector<double>(12, 1.0));
  for (const Partition& p :
       {partition_r_level_sets(s, v, 1e-9), partition_dyadic(s, 2), partition_top(s)}) {
    double lip = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i)
      for (std::size_t j = i + 1; j < s->size(); ++j)
        lip = std::max(lip, p.quotient->distance(p.labels[i], p.labels[j]) / s->distance(i, j));
    const double bound = std::max(1.0, lip);
    for (int trial = 0; trial < 10; ++trial) {
      auto mu = dyadic_measure(rng, s, false);
      auto nu = dyadic_measure(rng, s, false);
      CHECK(flat_distance(project(mu, p), project(nu, p)) <=
            bound * flat_distance(mu, nu) + 1e-9);
    }
  }
}

TEST_CASE("weak-limit consistency on a converging run") {
  auto s = make_finite({{{2, 1}}, {{1.5, 1}}});
  auto v = VitalRates::logistic({2, 1.5}, {1, 1}, {1, 1});
  OdeOptions opts;
  opts.record_every = 200;
  auto traj = integrate_ode(AtomicMeasure(s, {0.1, 0.1}), MutationKernel::pure_selection(2), v,
                            150.0, opts);
  const AtomicMeasure& source_limit = traj.final_state();
  for (const Partition& p :
       {partition_bottom(s), partition_top(s), partition_r_level_sets(s, v, 1e-9)}) {
    auto lim = mod_limit(traj, p, 0.2, 1e-4);
    REQUIRE(lim.has_value());
    CHECK(flat_distance(*lim, project(source_limit, p)) <= 1e-4);
  }
}
