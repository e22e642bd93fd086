#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "spnsched/config_io.hpp"
#include "spnsched/errors.hpp"
#include "spnsched/experiments.hpp"

using namespace spn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spnsched_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("seeds and digests") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t r = 0; r < 50; ++r) seen.insert(replication_seed(7, s, r));
  }
  CHECK(seen.size() == 200);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK_FALSE(version().empty());
}

TEST_CASE("pairwise sum and summaries") {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = double(i);
  CHECK(pairwise_sum(xs) == 499500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);

  std::vector<SeriesResult> reps(3);
  const double totals[3] = {1, 2, 6};
  for (int r = 0; r < 3; ++r) {
    reps[r].total = {0, totals[r]};
    reps[r].sum_squares = {0, totals[r] * totals[r]};
  }
  const auto s = summarize(reps, "p", "x");
  CHECK(s.mean_total[1] == doctest::Approx(3.0));
  CHECK(s.se_total[1] == doctest::Approx(std::sqrt(7.0 / 3.0)));
  CHECK(s.mean_sumsq[1] == doctest::Approx(41.0 / 3.0));
  CHECK(s.se_total[0] == 0.0);
  CHECK(summarize({reps[0]}, "p", "x").se_total[1] == 0.0);
}

TEST_CASE("parallel replications equal the serial reference") {
  const Instance inst = build_thm1_instance(3, 1.0, 1.0);
  const ReplicationConfig rc{120, 16, 42, 0, true};
  const auto serial = replicate_serial(inst.arrivals, inst.set, PolicySpec::lyapopt(), rc);
  for (int jobs : {1, 2, 4}) {
    const auto par = replicate_parallel(inst.arrivals, inst.set, PolicySpec::lyapopt(), rc, jobs);
    REQUIRE(par.size() == serial.size());
    for (std::size_t r = 0; r < par.size(); ++r) {
      CHECK(par[r].total == serial[r].total);
      CHECK(par[r].sum_squares == serial[r].sum_squares);
    }
  }
  CHECK_THROWS_AS(replicate_serial(inst.arrivals, inst.set, PolicySpec::lyapopt(), {10, 0, 1, 0, true}),
                  ConfigError);
}

TEST_CASE("worker exceptions surface from the lowest index") {
  for (bool serial : {true, false}) {
    try {
      for_each_index(20, {3, serial}, [](std::size_t i) {
        if (i == 7 || i == 13) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "fail 7");
    }
  }
  const Instance bad{constant_arrivals(Vec{2, 2}), SchedulingSet::finite({{1, 1}})};
  CHECK_THROWS_AS(replicate_parallel(bad.arrivals, bad.set, PolicySpec::maxweight(), {10, 2, 1, 0, true}, 2),
                  AssumptionError);
}

TEST_CASE("gap study with C = 0") {
  GapConfig cfg;
  cfg.T = 2000;
  cfg.replications = 2;
  const auto res = run_gap_study(cfg);
  const double level = 2.0 - 1.0 / (10.0 * std::sqrt(2.0));
  const auto& ly = res.stats[1].mean_total;
  for (std::size_t t = 1; t < ly.size(); ++t) CHECK(std::fabs(ly[t] - level) <= 1e-9);
  const auto& mw = res.stats[0].mean_total;
  for (std::size_t t = 16; t <= 353; ++t) CHECK(mw[t] >= std::pow(2.0, 0.25) * std::sqrt(10.0 * double(t)) / 3.0);
  CHECK(res.maxweight_ties == 0);
  CHECK(res.window.first == doctest::Approx(15.2182).epsilon(1e-4));
  CHECK(res.window.second == doctest::Approx(353.553).epsilon(1e-5));
  CHECK(res.claims.claim1);
  CHECK(res.claims.claim2);
  CHECK(res.stats[0].se_total.back() == 0.0);
}

TEST_CASE("gap study with noise") {
  GapConfig cfg;
  cfg.C = 1.0;
  cfg.T = 400;
  cfg.replications = 20;
  const auto res = run_gap_study(cfg);
  CHECK(res.stats[0].mean_total.back() > res.stats[1].mean_total.back());
  for (std::size_t t = 1; t <= 400; ++t) CHECK(res.stats[1].mean_total[t] <= res.lyapopt_upper[t] + 4 * res.stats[1].se_total[t]);
  CHECK_THROWS_AS(run_gap_study(GapConfig{4.0}), ConfigError);
}

TEST_CASE("Wilson interval") {
  const auto [lo, hi] = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
  const auto [a, b] = wilson_interval(10, 10);
  CHECK(b == doctest::Approx(1.0));
  CHECK(a < 1.0);
}

TEST_CASE("table1 study at small scale") {
  Table1Config cfg;
  cfg.n = 2;
  cfg.scenarios = 12;
  cfg.T = 100;
  cfg.replications = 4;
  const auto res = run_table1_study(cfg, {2, false});
  CHECK(res.set.size() == 20);
  REQUIRE(res.proportions.size() == 3);
  CHECK(res.proportions[0].count >= res.proportions[1].count);
  CHECK(res.proportions[1].count >= res.proportions[2].count);
  CHECK(res.degenerate == 0);
  const auto again = run_table1_study(cfg, {1, true});
  for (std::size_t s = 0; s < res.scenarios.size(); ++s) CHECK(*again.scenarios[s].ratio == *res.scenarios[s].ratio);
  CHECK_THROWS_AS(run_table1_study(Table1Config{1}), ConfigError);
}

TEST_CASE("a policy against itself has ratio 1") {
  Rng rng = make_stream(3, 0, kScenarioSalt);
  const auto set = sample_integer_set(3, 30, 1, 10, rng);
  const auto rate = boundary_sample(CapacityRegion(set), rng);
  const auto arrivals = build_binomial_spec(rate);
  const ReplicationConfig rc{200, 5, 9, 1, true};
  const auto a = summarize(replicate_serial(arrivals, set, PolicySpec::maxweight(), rc), "a", "");
  const auto b = summarize(replicate_parallel(arrivals, set, PolicySpec::maxweight(), rc, 2), "b", "");
  const double ratio = a.mean_total.back() / b.mean_total.back();
  CHECK(ratio == 1.0);
  CHECK(ratio <= 1.0);
}

TEST_CASE("trajectory study") {
  TrajectoryConfig cfg;
  const auto res = run_trajectory_study(cfg);
  REQUIRE(res.stats.size() == 2);
  // Pinned for the shipped seed.
  CHECK(res.stats[1].mean_sumsq.back() <= res.stats[0].mean_sumsq.back());
  CHECK(res.fits[0].points > 0);

  TrajectoryConfig zero;
  zero.n = 3;
  zero.T = 50;
  zero.replications = 3;
  zero.rate = Vec{0, 0, 0};
  const auto z = run_trajectory_study(zero);
  for (const auto& s : z.stats) {
    for (std::size_t t = 0; t <= 50; ++t) {
      CHECK(s.mean_total[t] == 0.0);
      CHECK(s.se_total[t] == 0.0);
      CHECK(s.mean_sumsq[t] == 0.0);
    }
  }
}

TEST_CASE("growth fit") {
  Vec m(1001);
  for (std::size_t t = 0; t < m.size(); ++t) m[t] = 3.0 * std::sqrt(double(t));
  const auto f = fit_growth(m);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fit_growth(Vec(10, 0.0)).points == 0);
}

TEST_CASE("CLT check") {
  // T = 2: one slot, two coins with K = 3 and lambda = 1/sqrt2.
  const double lam = 1.0 / std::sqrt(2.0);
  const double two_outcome = 4 * lam / 9 + 4 * (3 * lam - 2 * lam) / 9;
  CHECK(clt_exact(2, 1, 1, 2) == doctest::Approx(two_outcome).epsilon(1e-12));
  CHECK(clt_exact(2, 1, 1, 2) == doctest::Approx(0.62853936105470891058).epsilon(1e-12));
  CHECK(clt_exact(2, 1, 0, 50) == 0.0);

  CltConfig cfg;
  cfg.T_list = {2, 50};
  cfg.replications = 4000;
  const auto res = run_clt_check(cfg);
  CHECK(res.coefficient == doctest::Approx(std::sqrt(2.0) / std::sqrt(2 * std::numbers::pi)));
  for (const auto& row : res.rows) CHECK(std::fabs(row.estimate - row.exact) <= 4.5 * row.se);

  CltConfig flat = cfg;
  flat.C = 0.0;
  flat.replications = 10;
  for (const auto& row : run_clt_check(flat).rows) CHECK(row.estimate == 0.0);
}

TEST_CASE("oracle sweep") {
  const auto sweep = verify_oracle();
  CHECK(sweep.cases == 240);
  CHECK(sweep.mismatches == 0);
  CHECK(sweep.max_rel_error <= 1e-12);
  CHECK(sweep.identity_mismatches == 0);
  CHECK(sweep.identity_cases == 420);
}

TEST_CASE("pathwise audit on random finite sets") {
  Rng rng = make_stream(77, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const auto set = sample_integer_set(2 + trial % 3, 8, 0, 6, rng);
    const auto arrivals = build_binomial_spec(boundary_sample(CapacityRegion(set), rng));
    for (auto spec : {PolicySpec::maxweight(), PolicySpec::lyapopt(), PolicySpec::random_vertex(), PolicySpec::fixed(0)}) {
      const auto rep = pathwise_audit(arrivals, set, spec, 150, 100 + trial, spec.kind == PolicySpec::Kind::MaxWeight);
      CHECK(rep.slots == 150);
      CHECK(rep.lindley_violations == 0);
      CHECK(rep.drift_violations == 0);
    }
  }
}

TEST_CASE("study outputs are byte-identical across runs and thread counts") {
  GapConfig cfg;
  cfg.C = 1.0;
  cfg.T = 300;
  cfg.replications = 8;
  const auto d1 = scratch("gap1");
  const auto d2 = scratch("gap2");
  io::write_gap_outputs(d1, cfg, run_gap_study(cfg, {1, true}));
  io::write_gap_outputs(d2, cfg, run_gap_study(cfg, {3, false}));
  for (const char* f : {"stats.csv", "bounds.csv", "summary.json"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
  const auto stats = slurp(d1 / "stats.csv");
  CHECK(stats.rfind("# config_digest=", 0) == 0);
  CHECK(stats.find("t,policy,mean_total,se_total,mean_sumsq\n") != std::string::npos);
  const auto summary = io::read_json_file(d1 / "summary.json");
  CHECK(summary["config"]["T"] == 300);
  CHECK(summary["study"] == "gap");
  CHECK(stats.find(summary["config_digest"].get<std::string>()) != std::string::npos);
}
