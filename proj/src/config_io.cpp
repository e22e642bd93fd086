#include "spnsched/config_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "spnsched/errors.hpp"

namespace spn::io {
namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + what);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + "." + key + ": " + e.what());
  }
}

template <class T>
void maybe(const json& j, const char* key, T& out, const std::string& what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

Vec get_vec(const json& j, const char* key, const std::string& what) { return get<Vec>(j, key, what); }

std::vector<Vec> get_rows(const json& j, const char* key, const std::string& what) {
  return get<std::vector<Vec>>(j, key, what);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

SchedulingSet parse_set(const json& j) {
  check_keys(j, {"n", "kind", "elements", "vertices"}, "set");
  const auto kind = get<std::string>(j, "kind", "set");
  SchedulingSet set = [&] {
    if (kind == "finite") return SchedulingSet::finite(get_rows(j, "elements", "set"));
    if (kind == "polytope") return SchedulingSet::polytope(get_rows(j, "vertices", "set"));
    throw ConfigError("set.kind must be 'finite' or 'polytope'");
  }();
  if (j.contains("n") && get<std::size_t>(j, "n", "set") != set.dim()) {
    throw ConfigError("set.n does not match the element length");
  }
  return set;
}

json to_json(const SchedulingSet& set) {
  const bool finite = set.kind() == SetKind::Finite;
  return {{"n", set.dim()}, {"kind", finite ? "finite" : "polytope"}, {finite ? "elements" : "vertices", set.points()}};
}

std::vector<Vec> read_rows_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open arrival CSV " + path.string());
  std::vector<Vec> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Vec row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("arrival CSV " + path.string() + " has no rows");
  return rows;
}

ArrivalSpec parse_arrivals(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("arrivals must be a JSON object");
  const auto variant = get<std::string>(j, "variant", "arrivals");
  if (variant == "deterministic") {
    check_keys(j, {"variant", "rows", "rate", "csv", "slot0"}, "arrivals");
    Deterministic d;
    const int sources = int(j.contains("rows")) + int(j.contains("rate")) + int(j.contains("csv"));
    if (sources != 1) throw ConfigError("deterministic arrivals need exactly one of rows, rate, csv");
    if (j.contains("rows")) d.rows = get_rows(j, "rows", "arrivals");
    if (j.contains("rate")) d.rows = {get_vec(j, "rate", "arrivals")};
    if (j.contains("csv")) {
      std::filesystem::path p = get<std::string>(j, "csv", "arrivals");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      d.rows = read_rows_csv(p);
    }
    if (j.contains("slot0")) d.slot0 = get_vec(j, "slot0", "arrivals");
    return ArrivalSpec(std::move(d));
  }
  if (variant == "dependent_binary" || variant == "independent_binary") {
    check_keys(j, {"variant", "lambda", "K"}, "arrivals");
    const Vec lambda = get_vec(j, "lambda", "arrivals");
    const double K = get<double>(j, "K", "arrivals");
    if (variant == "dependent_binary") return ArrivalSpec(DependentBinary{lambda, K});
    return ArrivalSpec(IndependentBinary{lambda, K});
  }
  if (variant == "binomial") {
    check_keys(j, {"variant", "lambda", "variance"}, "arrivals");
    double v = 1.0;
    maybe(j, "variance", v, "arrivals");
    return build_binomial_spec(get_vec(j, "lambda", "arrivals"), v);
  }
  if (variant == "scaled_bernoulli") {
    check_keys(j, {"variant", "lambda", "variance"}, "arrivals");
    return build_scaled_bernoulli_spec(get_vec(j, "lambda", "arrivals"), get_vec(j, "variance", "arrivals"));
  }
  throw ConfigError("unknown arrivals.variant '" + variant + "'");
}

PolicySpec parse_policy(const json& j) {
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    check_keys(j, {"variant", "index", "max_iterations", "tolerance"}, "policy");
    name = get<std::string>(j, "variant", "policy");
  }
  PolicySpec p;
  if (name == "maxweight") {
    p = PolicySpec::maxweight();
  } else if (name == "lyapopt") {
    p = PolicySpec::lyapopt();
  } else if (name == "random_vertex") {
    p = PolicySpec::random_vertex();
  } else if (name == "fixed") {
    p = PolicySpec::fixed(0);
  } else {
    throw ConfigError("unknown policy '" + name + "'");
  }
  if (j.is_object()) {
    maybe(j, "index", p.fixed_index, "policy");
    maybe(j, "max_iterations", p.max_iterations, "policy");
    maybe(j, "tolerance", p.tolerance, "policy");
  }
  p.validate();
  return p;
}

json to_json(const PolicySpec& p) {
  json j{{"variant", policy_name(p)}};
  if (p.kind == PolicySpec::Kind::FixedSchedule) j["index"] = p.fixed_index;
  if (p.kind == PolicySpec::Kind::LyapOpt) {
    j["max_iterations"] = p.max_iterations;
    j["tolerance"] = p.tolerance;
  }
  return j;
}

json to_json(const GapConfig& c) {
  return {{"B", c.B}, {"C", c.C}, {"T", c.T}, {"replications", c.replications}, {"seed", c.seed}, {"epsilon", c.epsilon}};
}

json to_json(const Table1Config& c) {
  return {{"n", c.n},
          {"scenarios", c.scenarios},
          {"T", c.T},
          {"replications", c.replications},
          {"seed", c.seed},
          {"set_size", c.set_size == 0 ? 10 * c.n : c.set_size},
          {"entry_lo", c.entry_lo},
          {"entry_hi", c.entry_hi},
          {"variance", c.variance}};
}

json to_json(const TrajectoryConfig& c) {
  json j{{"n", c.n},
         {"T", c.T},
         {"replications", c.replications},
         {"seed", c.seed},
         {"set_size", c.set_size == 0 ? 10 * c.n : c.set_size},
         {"variance", c.variance}};
  if (!c.rate.empty()) j["rate"] = c.rate;
  return j;
}

json to_json(const CltConfig& c) {
  return {{"n", c.n}, {"B", c.B}, {"C", c.C}, {"T_list", c.T_list}, {"replications", c.replications}, {"seed", c.seed}};
}

void update_from_json(GapConfig& c, const json& j) {
  check_keys(j, {"B", "C", "T", "replications", "seed", "epsilon"}, "gap config");
  maybe(j, "B", c.B, "gap");
  maybe(j, "C", c.C, "gap");
  maybe(j, "T", c.T, "gap");
  maybe(j, "replications", c.replications, "gap");
  maybe(j, "seed", c.seed, "gap");
  maybe(j, "epsilon", c.epsilon, "gap");
}

void update_from_json(Table1Config& c, const json& j) {
  check_keys(j, {"n", "scenarios", "T", "replications", "seed", "set_size", "entry_lo", "entry_hi", "variance"},
             "table1 config");
  maybe(j, "n", c.n, "table1");
  maybe(j, "scenarios", c.scenarios, "table1");
  maybe(j, "T", c.T, "table1");
  maybe(j, "replications", c.replications, "table1");
  maybe(j, "seed", c.seed, "table1");
  maybe(j, "set_size", c.set_size, "table1");
  maybe(j, "entry_lo", c.entry_lo, "table1");
  maybe(j, "entry_hi", c.entry_hi, "table1");
  maybe(j, "variance", c.variance, "table1");
}

void update_from_json(TrajectoryConfig& c, const json& j) {
  check_keys(j, {"n", "T", "replications", "seed", "set_size", "rate", "variance"}, "trajectories config");
  maybe(j, "n", c.n, "trajectories");
  maybe(j, "T", c.T, "trajectories");
  maybe(j, "replications", c.replications, "trajectories");
  maybe(j, "seed", c.seed, "trajectories");
  maybe(j, "set_size", c.set_size, "trajectories");
  maybe(j, "rate", c.rate, "trajectories");
  maybe(j, "variance", c.variance, "trajectories");
}

void update_from_json(CltConfig& c, const json& j) {
  check_keys(j, {"n", "B", "C", "T_list", "replications", "seed"}, "clt-check config");
  maybe(j, "n", c.n, "clt-check");
  maybe(j, "B", c.B, "clt-check");
  maybe(j, "C", c.C, "clt-check");
  maybe(j, "T_list", c.T_list, "clt-check");
  maybe(j, "replications", c.replications, "clt-check");
  maybe(j, "seed", c.seed, "clt-check");
}

json to_json(const BoundValue& b) {
  json j{{"value", b.value}, {"regime", b.regime}, {"valid", b.valid}};
  if (b.window) {
    const auto edge = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    j["window"] = json::array({edge(b.window->first), edge(b.window->second)});
  } else {
    j["window"] = nullptr;
  }
  return j;
}

json summary_header(const std::string& study, const json& config) {
  return {{"study", study},
          {"version", version()},
          {"seed", config.value("seed", std::uint64_t{0})},
          {"config", config},
          {"config_digest", fnv1a_hex(config.dump())}};
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

json write_gap_outputs(const std::filesystem::path& dir, const GapConfig& cfg, const GapResult& res) {
  std::filesystem::create_directories(dir);
  json s = summary_header("gap", to_json(cfg));
  const std::string digest = s["config_digest"];
  write_stats_csv(dir / "stats.csv", res.stats, digest);
  {
    auto os = open_out(dir / "bounds.csv");
    os << "# config_digest=" << digest << '\n';
    os << "t,maxweight_lower,maxweight_lower_valid,lyapopt_upper,maxweight_upper\n";
    for (std::size_t t = 0; t < res.lower_curve.size(); ++t) {
      os << t << ',' << format_real(res.lower_curve[t].value) << ',' << (res.lower_curve[t].valid ? 1 : 0) << ','
         << format_real(res.lyapopt_upper[t]) << ',' << format_real(res.maxweight_upper[t]) << '\n';
    }
  }
  // Does the MaxWeight mean stay above the bound at every integer slot of the window?
  const auto& mw = res.stats.at(0).mean_total;
  bool above = true;
  std::size_t checked = 0;
  for (std::size_t t = 1; t < mw.size(); ++t) {
    if (!res.lower_curve[t].valid) continue;
    ++checked;
    above = above && mw[t] >= res.lower_curve[t].value;
  }
  json crossings = json::array();
  for (const auto& tk : res.claims.times) crossings.push_back(tk ? json(*tk) : json(nullptr));
  s["b"] = res.b;
  s["window"] = {res.window.first, res.window.second};
  s["tie_counters"] = {{"maxweight", res.maxweight_ties}, {"lyapopt", res.lyapopt_ties}};
  s["claims"] = {{"claim1", res.claims.claim1}, {"claim2", res.claims.claim2}, {"crossing_times", crossings}};
  s["maxweight_above_lower_bound"] = {{"holds", above}, {"slots_checked", checked}};
  s["final_mean_total"] = {{"maxweight", mw.back()}, {"lyapopt", res.stats.at(1).mean_total.back()}};
  s["files"] = {"stats.csv", "bounds.csv"};
  write_json_file(dir / "summary.json", s);
  return s;
}

json write_table1_outputs(const std::filesystem::path& dir, const Table1Config& cfg, const Table1Result& res) {
  std::filesystem::create_directories(dir);
  json s = summary_header("table1", to_json(cfg));
  const std::string digest = s["config_digest"];
  write_stats_csv(dir / "stats.csv", res.stats, digest);
  {
    auto os = open_out(dir / "scenarios.csv");
    os << "# config_digest=" << digest << '\n';
    os << "scenario";
    for (std::size_t i = 1; i <= cfg.n; ++i) os << ",lambda_" << i;
    os << ",lyapopt_mean,maxweight_mean,ratio\n";
    for (std::size_t k = 0; k < res.scenarios.size(); ++k) {
      const auto& sc = res.scenarios[k];
      os << k;
      for (double x : sc.rate) os << ',' << format_real(x);
      os << ',' << format_real(sc.lyapopt_mean) << ',' << format_real(sc.maxweight_mean) << ','
         << (sc.ratio ? format_real(*sc.ratio) : "") << '\n';
    }
  }
  json props = json::array();
  for (const auto& p : res.proportions) {
    props.push_back({{"threshold", p.threshold},
                     {"count", p.count},
                     {"fraction", p.fraction},
                     {"wilson95", {p.ci_low, p.ci_high}}});
  }
  s["proportions"] = props;
  s["scenarios_run"] = res.scenarios.size();
  s["degenerate"] = {{"count", res.degenerate},
                     {"rule", "scenarios whose MaxWeight mean total at T is below 1e-9 are dropped from the fractions"}};
  s["ratio"] = "mean LyapOpt total at T / mean MaxWeight total at T, common random numbers";
  s["set"] = to_json(res.set);
  s["calibration_warnings"] = res.warnings;
  s["files"] = {"stats.csv", "scenarios.csv"};
  write_json_file(dir / "summary.json", s);
  return s;
}

json write_trajectory_outputs(const std::filesystem::path& dir, const TrajectoryConfig& cfg,
                              const TrajectoryResult& res) {
  std::filesystem::create_directories(dir);
  json s = summary_header("trajectories", to_json(cfg));
  write_stats_csv(dir / "stats.csv", res.stats, s["config_digest"]);
  json fits = json::object();
  json finals = json::object();
  for (std::size_t k = 0; k < res.stats.size(); ++k) {
    fits[res.stats[k].policy] = {
        {"slope", res.fits[k].slope}, {"intercept", res.fits[k].intercept}, {"points", res.fits[k].points}};
    finals[res.stats[k].policy] = {{"mean_total", res.stats[k].mean_total.back()},
                                   {"mean_sumsq", res.stats[k].mean_sumsq.back()}};
  }
  s["rate"] = res.rate;
  s["set"] = to_json(res.set);
  s["growth_fit"] = fits;
  s["final"] = finals;
  s["calibration_warnings"] = res.warnings;
  s["files"] = {"stats.csv"};
  write_json_file(dir / "summary.json", s);
  return s;
}

json write_clt_outputs(const std::filesystem::path& dir, const CltConfig& cfg, const CltResult& res) {
  std::filesystem::create_directories(dir);
  json s = summary_header("clt-check", to_json(cfg));
  {
    auto os = open_out(dir / "clt.csv");
    os << "# config_digest=" << s["config_digest"].get<std::string>() << '\n';
    os << "T,estimate,se,exact,coefficient\n";
    for (const auto& r : res.rows) {
      os << r.T << ',' << format_real(r.estimate) << ',' << format_real(r.se) << ',' << format_real(r.exact) << ','
         << format_real(res.coefficient) << '\n';
    }
  }
  json rows = json::array();
  for (const auto& r : res.rows) {
    rows.push_back({{"T", r.T}, {"estimate", r.estimate}, {"se", r.se}, {"exact", r.exact},
                    {"ratio_to_coefficient", res.coefficient > 0 ? r.estimate / res.coefficient : 0.0}});
  }
  s["coefficient"] = res.coefficient;
  s["rows"] = rows;
  s["files"] = {"clt.csv"};
  write_json_file(dir / "summary.json", s);
  return s;
}

}  // namespace spn::io
