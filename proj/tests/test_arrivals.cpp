#include <doctest.h>

#include <cmath>

#include "spnsched/arrivals.hpp"
#include "spnsched/errors.hpp"
#include "spnsched/rng.hpp"

using namespace spn;

namespace {

struct Moments {
  Vec mean;
  Vec var;
};

Moments sample_moments(const ArrivalSpec& spec, std::size_t draws, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  const std::size_t n = spec.dim();
  Vec s(n, 0.0), s2(n, 0.0);
  Vec a(n);
  for (std::size_t k = 0; k < draws; ++k) {
    spec.sample(0, rng, a);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] += a[i];
      s2[i] += a[i] * a[i];
    }
  }
  Moments m{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    m.mean[i] = s[i] / double(draws);
    m.var[i] = s2[i] / double(draws) - m.mean[i] * m.mean[i];
  }
  return m;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = make_stream(1, 2, 3);
  Rng b = make_stream(1, 2, 3);
  Rng c = make_stream(1, 3, 3);
  Rng d = make_stream(1, 2, 4);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  Rng e = make_stream(5, 0);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(e);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto i = uniform_int(e, -2, 3);
    CHECK(i >= -2);
    CHECK(i <= 3);
  }
}

TEST_CASE("binomial sampler moments") {
  Rng rng = make_stream(9, 0);
  for (auto [m, p] : {std::pair<std::int64_t, double>{10, 0.3}, {50, 0.9}, {3, 0.5}}) {
    double s = 0, s2 = 0;
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) {
      const double x = double(binomial(rng, m, p));
      CHECK(x >= 0);
      CHECK(x <= double(m));
      s += x;
      s2 += x * x;
    }
    const double mean = s / draws;
    const double var = s2 / draws - mean * mean;
    const double mu = double(m) * p;
    const double v = mu * (1 - p);
    CHECK(std::fabs(mean - mu) < 5 * std::sqrt(v / draws));
    CHECK(var == doctest::Approx(v).epsilon(0.02));
  }
  CHECK(binomial(rng, 0, 0.5) == 0);
  CHECK(binomial(rng, 7, 1.0) == 7);
}

TEST_CASE("deterministic arrivals") {
  const ArrivalSpec c = constant_arrivals(Vec{1, 2});
  Rng rng = make_stream(0, 0);
  CHECK(c.sample(7, rng) == Vec{1, 2});
  CHECK_FALSE(c.is_random());
  CHECK_FALSE(c.horizon_limit().has_value());
  CHECK(c.variance_param(3) == 0.0);

  const ArrivalSpec seq(Deterministic{{{1, 0}, {0, 1}, {2, 2}}, Vec{0.5, 0.5}});
  CHECK(seq.mean(0) == Vec{0.5, 0.5});
  CHECK(seq.mean(1) == Vec{0, 1});
  CHECK(seq.horizon_limit() == 3);
  CHECK_THROWS_AS(seq.mean(3), ConfigError);

  CHECK_THROWS_AS(ArrivalSpec(Deterministic{{{1, -1}}, std::nullopt}), ConfigError);
  CHECK_THROWS_AS(ArrivalSpec(Deterministic{{{1, 1}, {1}}, std::nullopt}), ConfigError);
  CHECK_THROWS_AS(ArrivalSpec(DependentBinary{{1, 1}, 1.0}), ConfigError);
}

TEST_CASE("dependent binary: one shared coin") {
  const ArrivalSpec dep(DependentBinary{{0.5, 0.25}, 4.0});
  Rng rng = make_stream(3, 0);
  for (int k = 0; k < 500; ++k) {
    const auto a = dep.sample(0, rng);
    const bool up = a[0] > 0;
    CHECK((a[1] > 0) == up);
    if (up) {
      CHECK(a[0] == 2.0);
      CHECK(a[1] == 1.0);
    }
  }
  // Var = lambda^2 (K - 1).
  CHECK(dep.variance(0)[0] == doctest::Approx(0.75));
  CHECK(dep.variance_param(0) == doctest::Approx(std::sqrt((0.75 + 0.1875) / 2)));
  const auto m = sample_moments(dep, 200000, 4);
  CHECK(m.mean[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("independent binary: coins differ across queues") {
  const ArrivalSpec ind(IndependentBinary{{1, 1}, 2.0});
  Rng rng = make_stream(3, 0);
  int disagree = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto a = ind.sample(0, rng);
    disagree += (a[0] > 0) != (a[1] > 0);
  }
  CHECK(disagree > 400);
  CHECK(disagree < 600);
}

TEST_CASE("binomial calibration targets variance one") {
  std::vector<std::string> warnings;
  const auto spec = build_binomial_spec(Vec{5.3, 2.0, 0.4, 0.0}, 1.0, &warnings);
  const auto v = spec.variance(0);
  CHECK(spec.mean(0)[0] == doctest::Approx(5.3));
  // m = round(5.3^2 / 4.3) = 7; integer trials cannot hit the target exactly.
  CHECK(v[0] == doctest::Approx(5.3 * (1.0 - 5.3 / 7.0)));
  CHECK(v[1] == doctest::Approx(1.0));  // m = 4, p = 0.5
  CHECK(v[2] == doctest::Approx(1.0));  // scaled Bernoulli fallback
  CHECK(v[3] == 0.0);
  CHECK(warnings.size() == 1);
  const auto& laws = std::get<PerQueueLaws>(spec.variant()).laws;
  CHECK(laws[1].trials == 4);
  CHECK(laws[2].kind == QueueLaw::Kind::ScaledBernoulli);
  const auto m = sample_moments(spec, 200000, 6);
  CHECK(m.mean[0] == doctest::Approx(5.3).epsilon(0.01));
  CHECK(m.var[0] == doctest::Approx(v[0]).epsilon(0.03));
  CHECK(m.var[2] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.mean[3] == 0.0);
}

TEST_CASE("scaled Bernoulli spec") {
  const auto spec = build_scaled_bernoulli_spec(Vec{1.0, 0.9}, Vec{1.0, 1.0});
  CHECK(spec.mean(0)[1] == doctest::Approx(0.9));
  CHECK(spec.variance(0)[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_scaled_bernoulli_spec(Vec{0.0}, Vec{1.0}), ConfigError);
  const auto flat = build_scaled_bernoulli_spec(Vec{0.7}, Vec{0.0});
  Rng rng = make_stream(0, 0);
  CHECK(flat.sample(0, rng)[0] == doctest::Approx(0.7));
}

TEST_CASE("paper instances") {
  const auto t1 = build_thm1_instance(4, 2.0, 1.0);
  CHECK(t1.set.size() == 4);
  CHECK(capacity_param(t1.set) == doctest::Approx(2.0));
  CHECK(t1.arrivals.mean(0)[0] == doctest::Approx(1.0));
  CHECK(t1.arrivals.variance_param(0) == doctest::Approx(1.0));
  CHECK(std::holds_alternative<DependentBinary>(t1.arrivals.variant()));
  CHECK(std::holds_alternative<IndependentBinary>(build_thm2_instance(4, 2.0, 1.0).arrivals.variant()));
  CHECK_FALSE(build_thm1_instance(2, 1.0, 0.0).arrivals.is_random());

  const auto t5 = build_thm5_instance(10.0);
  const double b = 10.0 * std::sqrt(2.0);
  CHECK(t5.arrivals.mean(0)[1] == doctest::Approx((b - 1) / b));
  CHECK(t5.set.points()[0][0] == doctest::Approx(b));
  CHECK_THROWS_AS(build_thm5_instance(4.0), ConfigError);
  const auto eps = build_thm5_instance(10.0, 0.01);
  CHECK(eps.arrivals.mean(0)[1] == doctest::Approx((b - 1) / b - 0.01));
  CHECK(eps.arrivals.mean(1)[1] == doctest::Approx((b - 1) / b));

  const auto gap = build_gap_instance(10.0, 1.0);
  CHECK(gap.arrivals.variance_param(0) == doctest::Approx(1.0));
  CHECK(gap.arrivals.mean(0)[0] == doctest::Approx(1.0));
}
