#include <doctest.h>

#include <fstream>

#include "spnsched/config_io.hpp"
#include "spnsched/errors.hpp"

using namespace spn;
using nlohmann::json;

TEST_CASE("sets from JSON") {
  const auto s = io::parse_set(json::parse(R"({"n":2,"kind":"finite","elements":[[1,2],[3,0]]})"));
  CHECK(s.size() == 2);
  CHECK(s.kind() == SetKind::Finite);
  const auto p = io::parse_set(json::parse(R"({"kind":"polytope","vertices":[[1,0],[0,1]]})"));
  CHECK(p.kind() == SetKind::Polytope);
  CHECK(io::parse_set(io::to_json(s)).points() == s.points());
  CHECK_THROWS_AS(io::parse_set(json::parse(R"({"n":3,"kind":"finite","elements":[[1,2]]})")), ConfigError);
  CHECK_THROWS_AS(io::parse_set(json::parse(R"({"kind":"cube"})")), ConfigError);
  CHECK_THROWS_AS(io::parse_set(json::parse(R"({"kind":"finite","elements":[[1,"x"]]})")), ConfigError);
  CHECK_THROWS_AS(io::parse_set(json::parse(R"({"kind":"finite","elements":[[1]],"extra":1})")), ConfigError);
}

TEST_CASE("arrivals from JSON") {
  const auto det = io::parse_arrivals(json::parse(R"({"variant":"deterministic","rate":[1,0.5]})"));
  CHECK(det.mean(9) == Vec{1, 0.5});
  const auto dep = io::parse_arrivals(json::parse(R"({"variant":"dependent_binary","lambda":[1,1],"K":3})"));
  CHECK(std::holds_alternative<DependentBinary>(dep.variant()));
  const auto bin = io::parse_arrivals(json::parse(R"({"variant":"binomial","lambda":[4,2]})"));
  CHECK(bin.variance(0)[1] == doctest::Approx(1.0));
  const auto sb = io::parse_arrivals(json::parse(R"({"variant":"scaled_bernoulli","lambda":[1],"variance":[2]})"));
  CHECK(sb.variance(0)[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(io::parse_arrivals(json::parse(R"({"variant":"poisson","lambda":[1]})")), ConfigError);
  CHECK_THROWS_AS(io::parse_arrivals(json::parse(R"({"variant":"deterministic"})")), ConfigError);

  const auto dir = std::filesystem::temp_directory_path() / "spnsched_test_csv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "rows.csv");
    os << "a_1,a_2\n1,0\n0.5,0.25\n";
  }
  const auto seq = io::parse_arrivals(json::parse(R"({"variant":"deterministic","csv":"rows.csv"})"), dir);
  CHECK(seq.horizon_limit() == 2);
  CHECK(seq.mean(1) == Vec{0.5, 0.25});
  CHECK_THROWS_AS(io::read_rows_csv(dir / "missing.csv"), ConfigError);
}

TEST_CASE("policies from JSON") {
  CHECK(io::parse_policy(json("maxweight")).kind == PolicySpec::Kind::MaxWeight);
  const auto p = io::parse_policy(json::parse(R"({"variant":"lyapopt","max_iterations":50,"tolerance":1e-6})"));
  CHECK(p.max_iterations == 50);
  CHECK(p.tolerance == 1e-6);
  CHECK(io::parse_policy(json::parse(R"({"variant":"fixed","index":3})")).fixed_index == 3);
  CHECK_THROWS_AS(io::parse_policy(json("greedy")), ConfigError);
  CHECK_THROWS_AS(io::parse_policy(json::parse(R"({"variant":"lyapopt","tolerance":-1})")), ConfigError);
}

TEST_CASE("study configs round-trip") {
  Table1Config t;
  t.n = 4;
  t.seed = 9;
  Table1Config u;
  io::update_from_json(u, io::to_json(t));
  CHECK(u.n == 4);
  CHECK(u.seed == 9);
  CHECK(u.set_size == 40);
  GapConfig g;
  CHECK_THROWS_AS(io::update_from_json(g, json::parse(R"({"Bee":3})")), ConfigError);
  CHECK_THROWS_AS(io::update_from_json(g, json::parse(R"({"B":"x"})")), ConfigError);
}

TEST_CASE("bound JSON") {
  const auto j = io::to_json(lower_bound_simple(2, 1, 1, 11));
  CHECK(j["regime"] == "thm1-simple");
  CHECK(j["window"][1].is_null());
  CHECK(j["valid"] == true);
  CHECK_THROWS_AS(io::read_json_file("/nonexistent/x.json"), ConfigError);
}
