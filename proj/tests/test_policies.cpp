#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spnsched/errors.hpp"
#include "spnsched/policies.hpp"

using namespace spn;

namespace {

double cost(const Vec& q, const Vec& d) {
  double s = 0;
  for (std::size_t i = 0; i < q.size(); ++i) s += std::pow(std::max(q[i] - d[i], 0.0), 2);
  return s;
}

}  // namespace

TEST_CASE("MaxWeight picks the heaviest schedule, lowest index on ties") {
  const auto set = SchedulingSet::finite({{1, 0}, {0, 1}, {1, 1}});
  CHECK(maxweight_select(Vec{3, 1}, set).index == 2);
  const auto two = SchedulingSet::finite({{1, 0}, {0, 1}});
  const auto sel = maxweight_select(Vec{2, 2}, two);
  CHECK(sel.index == 0);
  CHECK(sel.tie);
  // At Q = 0 every schedule leaves the same residual: not a tie that matters.
  CHECK_FALSE(maxweight_select(Vec{0, 0}, two).tie);
}

TEST_CASE("LyapOpt enumeration") {
  const auto set = SchedulingSet::finite({{4, 0}, {2, 2}, {0, 3}});
  const auto sel = lyapopt_select(Vec{2, 2}, set);
  CHECK(sel.index == 1);
  CHECK(lookahead_cost(Vec{2, 2}, sel.schedule) == 0.0);
  CHECK(lookahead_cost(Vec{5, 1}, Vec{3, 2}) == 4.0);
  // MaxWeight ties (4,0) with (2,2) here and keeps the lower index.
  const auto mw = maxweight_select(Vec{2, 2}, set);
  CHECK(mw.index == 0);
  CHECK(mw.tie);
  CHECK(lyapopt_select(Vec{5, 0.5}, set).index == 0);
}

TEST_CASE("LyapOpt over the gap segment sits at the rate point") {
  const double b = 10.0 * std::sqrt(2.0);
  const auto seg = SchedulingSet::polytope({{b, 0}, {0, 1}});
  const Vec q{1.0, (b - 1) / b};
  const auto sel = lyapopt_select(q, seg);
  CHECK(lookahead_cost(q, sel.schedule) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Frank-Wolfe agrees with a fine grid on random segments") {
  Rng rng = make_stream(21, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec a{uniform01(rng) * 5, uniform01(rng) * 5};
    const Vec b{uniform01(rng) * 5, uniform01(rng) * 5};
    const Vec q{uniform01(rng) * 6, uniform01(rng) * 6};
    const auto sel = lyapopt_select(q, SchedulingSet::polytope({a, b}));
    double best = 1e300;
    const int grid = 100000;
    for (int k = 0; k <= grid; ++k) {
      const double th = double(k) / grid;
      best = std::min(best, cost(q, {th * a[0] + (1 - th) * b[0], th * a[1] + (1 - th) * b[1]}));
    }
    CHECK(lookahead_cost(q, sel.schedule) <= best + 1e-6);
  }
}

TEST_CASE("Frank-Wolfe over a three-dimensional polytope beats every vertex and random hull point") {
  Rng rng = make_stream(22, 0);
  const auto set = sample_integer_set(3, 30, 1, 10, rng);
  const auto poly = SchedulingSet::polytope(set.points());
  for (int trial = 0; trial < 30; ++trial) {
    const Vec q{uniform01(rng) * 15, uniform01(rng) * 15, uniform01(rng) * 15};
    const auto sel = lyapopt_select(q, poly);
    const double got = lookahead_cost(q, sel.schedule);
    for (const auto& v : set.points()) CHECK(got <= cost(q, v) + 1e-9);
    for (int k = 0; k < 200; ++k) {
      Vec x(3, 0.0);
      double total = 0;
      Vec w(set.size());
      for (auto& wi : w) total += (wi = -std::log(1 - uniform01(rng)));
      for (std::size_t j = 0; j < set.size(); ++j) {
        for (int i = 0; i < 3; ++i) x[i] += w[j] / total * set.points()[j][i];
      }
      CHECK(got <= cost(q, x) + 1e-9);
    }
  }
}

TEST_CASE("Frank-Wolfe reports non-convergence") {
  // Optimum (2, 2) is interior, so one iteration cannot certify it.
  const auto seg = SchedulingSet::polytope({{4, 0}, {0, 4}});
  PolicySpec tight = PolicySpec::lyapopt();
  tight.max_iterations = 1;
  tight.tolerance = 1e-300;
  CHECK_THROWS_AS(lyapopt_select(Vec{3, 3}, seg, tight), NumericError);
  try {
    lyapopt_select(Vec{3, 3}, seg, tight);
  } catch (const NumericError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.gap() > 0.0);
  }
  PolicySpec bad = PolicySpec::lyapopt();
  bad.tolerance = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("drift decomposition") {
  const auto dt = drift_terms(Vec{3, 1}, Vec{2, 0}, Vec{1, 1});
  CHECK(dt.first_order == doctest::Approx(2 * (3 * (1 - 2) + 1 * (1 - 0))));
  CHECK(dt.second_order == doctest::Approx(4 - 2));
  CHECK(dt.f_value == doctest::Approx(dt.first_order + dt.second_order));
}

TEST_SUITE("policy properties") {
  TEST_CASE("MaxWeight first-order drift is nonpositive for rates in the region") {
    Rng rng = make_stream(30, 0);
    const auto set = sample_integer_set(3, 20, 1, 10, rng);
    const CapacityRegion region(set);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec lambda = boundary_sample(region, rng);
      const Vec q{uniform01(rng) * 50, uniform01(rng) * 50, uniform01(rng) * 50};
      const auto d = maxweight_select(q, set).schedule;
      CHECK(drift_terms(q, d, lambda).first_order <= 1e-9);
    }
  }

  TEST_CASE("LyapOpt enumeration is the exact minimizer") {
    Rng rng = make_stream(31, 0);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 2 + trial % 3;
      const auto set = sample_integer_set(n, 5 + trial % 10, 0, 10, rng);
      Vec q(n);
      for (auto& v : q) v = double(uniform_int(rng, 0, 20));
      const auto sel = lyapopt_select(q, set);
      for (const auto& d : set.points()) CHECK(lookahead_cost(q, sel.schedule) <= cost(q, d));
    }
  }
}

TEST_CASE("policy objects") {
  const auto set = SchedulingSet::finite({{1, 0}, {0, 1}});
  auto fixed = make_policy(PolicySpec::fixed(1), set);
  const Vec q{4, 4};
  CHECK(fixed->decide({0, q, {}}) == Vec{0, 1});
  CHECK(fixed->stats().decisions == 1);
  CHECK_THROWS_AS(make_policy(PolicySpec::fixed(2), set), ConfigError);
  auto r1 = make_policy(PolicySpec::random_vertex(), set, 7);
  auto r2 = make_policy(PolicySpec::random_vertex(), set, 7);
  for (int k = 0; k < 20; ++k) CHECK(r1->decide({0, q, {}}) == r2->decide({0, q, {}}));
  CHECK(policy_name(PolicySpec::maxweight()) == "maxweight");
  CHECK(make_policy(PolicySpec::lyapopt(), set)->name() == "lyapopt");
}
