// spnsched: simulate, evaluate bounds, run experiment studies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spnsched/bounds.hpp"
#include "spnsched/config_io.hpp"
#include "spnsched/core.hpp"
#include "spnsched/errors.hpp"
#include "spnsched/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitRuntime = 4;

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SPNSCHED_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw spn::ConfigError(std::string("SPNSCHED_SEED is not an unsigned integer: ") + s);
  }
}

// A config file is either the study config itself or a summary.json holding it under "config".
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j = spn::io::read_json_file(path);
  if (j.is_object() && j.contains("config") && j.contains("study")) return j["config"];
  return j;
}

template <class T>
void set_if(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::string> instance;
  std::optional<double> B, C, epsilon;
  std::optional<std::size_t> n, T, stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<bool> validate_capacity;
  std::string out = ".";
};

int cmd_simulate(const SimulateArgs& a) {
  json cfg = {{"instance", "thm5"}, {"B", 10.0}, {"C", 0.0}, {"n", 2},       {"epsilon", 0.0},
              {"T", 1000},          {"seed", 1},  {"stride", 1}, {"policy", "lyapopt"}, {"validate_capacity", true}};
  const json file = load_config(a.config);
  if (!file.is_object()) throw spn::ConfigError("simulate config must be a JSON object");
  if (file.contains("set") || file.contains("arrivals")) cfg["instance"] = "custom";
  for (auto it = file.begin(); it != file.end(); ++it) {
    static const char* known[] = {"instance", "B", "C", "n", "epsilon", "T", "seed", "stride",
                                  "policy", "validate_capacity", "set", "arrivals"};
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      throw spn::ConfigError("unknown key '" + it.key() + "' in simulate config");
    }
    cfg[it.key()] = it.value();
  }
  if (auto s = env_seed()) cfg["seed"] = *s;
  set_if(cfg, "instance", a.instance);
  set_if(cfg, "B", a.B);
  set_if(cfg, "C", a.C);
  set_if(cfg, "epsilon", a.epsilon);
  set_if(cfg, "n", a.n);
  set_if(cfg, "T", a.T);
  set_if(cfg, "stride", a.stride);
  set_if(cfg, "seed", a.seed);
  set_if(cfg, "policy", a.policy);
  set_if(cfg, "validate_capacity", a.validate_capacity);

  const auto instance = cfg["instance"].get<std::string>();
  const double B = cfg["B"].get<double>();
  const double C = cfg["C"].get<double>();
  const auto n = cfg["n"].get<std::size_t>();
  std::optional<spn::Instance> inst;
  if (instance == "thm5") {
    inst = spn::build_thm5_instance(B, cfg["epsilon"].get<double>());
  } else if (instance == "gap") {
    inst = spn::build_gap_instance(B, C, cfg["epsilon"].get<double>());
  } else if (instance == "thm1") {
    inst = spn::build_thm1_instance(n, B, C);
  } else if (instance == "thm2") {
    inst = spn::build_thm2_instance(n, B, C);
  } else if (instance == "custom") {
    if (!cfg.contains("set") || !cfg.contains("arrivals")) {
      throw spn::ConfigError("custom instance needs 'set' and 'arrivals' in the config file");
    }
    const fs::path base = a.config.empty() ? fs::path{} : fs::path(a.config).parent_path();
    inst.emplace(spn::Instance{spn::io::parse_arrivals(cfg["arrivals"], base), spn::io::parse_set(cfg["set"])});
  } else {
    throw spn::ConfigError("unknown instance '" + instance + "'");
  }
  const spn::PolicySpec policy = spn::io::parse_policy(cfg["policy"]);

  spn::SimOptions opts;
  opts.horizon = cfg["T"].get<std::size_t>();
  opts.seed = cfg["seed"].get<std::uint64_t>();
  opts.stride = cfg["stride"].get<std::size_t>();
  opts.validate_capacity = cfg["validate_capacity"].get<bool>();
  json summary = spn::io::summary_header("simulate", cfg);
  opts.config_digest = summary["config_digest"];
  spn::SimTrace trace;
  try {
    trace = spn::simulate(inst->arrivals, inst->set, policy, opts);
  } catch (const spn::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    summary["status"] = "failed";
    summary["error"] = e.what();
    if (!ec) spn::io::write_json_file(fs::path(a.out) / "summary.json", summary);
    throw;
  }

  fs::create_directories(a.out);
  {
    std::ofstream os(fs::path(a.out) / "trace.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write trace.csv");
    spn::write_trace_csv(os, trace);
  }
  summary["final_total"] = trace.records.back().total;
  summary["final_sum_squares"] = trace.records.back().sum_squares;
  summary["policy_stats"] = {{"decisions", trace.policy_stats.decisions},
                             {"ties", trace.policy_stats.ties},
                             {"max_iterations_used", trace.policy_stats.max_iterations_used}};
  summary["files"] = {"trace.csv"};
  spn::io::write_json_file(fs::path(a.out) / "summary.json", summary);
  std::cout << "wrote " << (fs::path(a.out) / "trace.csv").string() << " (final total "
            << spn::format_real(trace.records.back().total) << ")\n";
  return 0;
}

// --------------------------------------------------------------------- bound

struct BoundArgs {
  std::string name;
  bool all = false;
  std::size_t n = 2;
  double B = 1.0, C = 1.0, K = 2.0, EA = 0.0;
  long T = 100, t = 1;
  std::string kind = "dependent";
};

json overshoot_json(double K, long t) {
  const auto p = spn::overshoot_params(K, t);
  json j = spn::io::to_json(spn::BoundValue{spn::binary_overshoot_closed(K, t), "lemma2-closed", true, std::nullopt});
  j["k0"] = p.k0;
  j["m0"] = p.m0;
  if (t <= 64) j["bruteforce"] = spn::binary_overshoot_bruteforce(K, t);
  return j;
}

json bound_json(const std::string& name, const BoundArgs& a) {
  using spn::BoundValue;
  if (name == "thm1") return spn::io::to_json(spn::lower_bound_general(a.n, a.B, a.C, a.T));
  if (name == "thm1-simple") return spn::io::to_json(spn::lower_bound_simple(a.n, a.B, a.C, a.T));
  if (name == "thm1-asymptotic" || name == "thm2") {
    spn::Dependence kind = spn::Dependence::Dependent;
    if (name == "thm2" || a.kind == "independent") {
      kind = spn::Dependence::Independent;
    } else if (a.kind != "dependent") {
      throw spn::ConfigError("--kind must be dependent or independent");
    }
    const double coef = spn::lower_bound_asymptotic(a.n, a.C, kind);
    const bool dep = kind == spn::Dependence::Dependent;
    json j = spn::io::to_json(BoundValue{coef, dep ? "thm1-asymptotic" : "thm2-asymptotic", true, std::nullopt});
    j["coefficient_of"] = dep ? "sqrt(T-2)" : "sqrt(T-1)";
    return j;
  }
  if (name == "overshoot") return overshoot_json(a.K, a.t);
  if (name == "lyapopt-upper") {
    return spn::io::to_json(BoundValue{spn::upper_bound_lyapopt(a.n, a.C, a.T, a.EA), "thm3-upper", true, std::nullopt});
  }
  if (name == "maxweight-upper") {
    return spn::io::to_json(
        BoundValue{spn::upper_bound_maxweight(a.n, a.B, a.C, a.T, a.EA), "thm4-upper", true, std::nullopt});
  }
  if (name == "thm5") return spn::io::to_json(spn::maxweight_lower_bound(a.B, a.C, a.T));
  if (name == "remark") {
    const auto s = spn::clause_one_sandwich(a.n, a.B, a.C, a.T);
    return {{"lower", s.lower}, {"clause_one", s.clause_one}, {"upper", s.upper}, {"regime_holds", s.regime_holds}};
  }
  throw spn::ConfigError("unknown bound '" + name + "'");
}

int cmd_bound(const BoundArgs& a) {
  static const char* names[] = {"thm1",          "thm1-simple",     "thm1-asymptotic", "thm2", "overshoot",
                                "lyapopt-upper", "maxweight-upper", "thm5",            "remark"};
  if (a.all) {
    json out = json::object();
    for (const char* nm : names) {
      try {
        out[nm] = bound_json(nm, a);
      } catch (const spn::ConfigError& e) {
        out[nm] = {{"error", e.what()}};
      }
    }
    std::cout << out.dump() << '\n';
    return 0;
  }
  if (a.name.empty()) throw spn::ConfigError("bound needs a name or --all");
  std::cout << bound_json(a.name, a).dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string study;
  std::string config;
  std::string out;
  int jobs = 0;
  bool serial = false;
  std::optional<double> B, C, epsilon, variance;
  std::optional<std::size_t> n, T, replications, scenarios, set_size;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> T_list;
  long t_max = 40;
};

template <class Config>
Config resolve_config(const ExperimentArgs& a) {
  Config cfg;
  spn::io::update_from_json(cfg, load_config(a.config));
  if (auto s = env_seed()) cfg.seed = *s;
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

int cmd_experiment(const ExperimentArgs& a) {
  const spn::ParallelOptions par{a.jobs, a.serial};
  const fs::path out = a.out.empty() ? fs::path("out") / a.study : fs::path(a.out);
  json summary;
  json effective;
  try {
    if (a.study == "gap") {
      auto cfg = resolve_config<spn::GapConfig>(a);
      if (a.B) cfg.B = *a.B;
      if (a.C) cfg.C = *a.C;
      if (a.T) cfg.T = *a.T;
      if (a.replications) cfg.replications = *a.replications;
      if (a.epsilon) cfg.epsilon = *a.epsilon;
      effective = spn::io::to_json(cfg);
      summary = spn::io::write_gap_outputs(out, cfg, spn::run_gap_study(cfg, par));
    } else if (a.study == "table1") {
      auto cfg = resolve_config<spn::Table1Config>(a);
      if (a.n) cfg.n = *a.n;
      if (a.T) cfg.T = *a.T;
      if (a.replications) cfg.replications = *a.replications;
      if (a.scenarios) cfg.scenarios = *a.scenarios;
      if (a.set_size) cfg.set_size = *a.set_size;
      if (a.variance) cfg.variance = *a.variance;
      effective = spn::io::to_json(cfg);
      summary = spn::io::write_table1_outputs(out, cfg, spn::run_table1_study(cfg, par));
    } else if (a.study == "trajectories") {
      auto cfg = resolve_config<spn::TrajectoryConfig>(a);
      if (a.n) cfg.n = *a.n;
      if (a.T) cfg.T = *a.T;
      if (a.replications) cfg.replications = *a.replications;
      if (a.set_size) cfg.set_size = *a.set_size;
      if (a.variance) cfg.variance = *a.variance;
      effective = spn::io::to_json(cfg);
      summary = spn::io::write_trajectory_outputs(out, cfg, spn::run_trajectory_study(cfg, par));
    } else if (a.study == "clt-check") {
      auto cfg = resolve_config<spn::CltConfig>(a);
      if (a.n) cfg.n = *a.n;
      if (a.B) cfg.B = *a.B;
      if (a.C) cfg.C = *a.C;
      if (!a.T_list.empty()) cfg.T_list = a.T_list;
      if (a.replications) cfg.replications = *a.replications;
      effective = spn::io::to_json(cfg);
      summary = spn::io::write_clt_outputs(out, cfg, spn::run_clt_check(cfg, par));
    } else if (a.study == "verify-oracle") {
      const auto sweep = spn::verify_oracle({1.5, 2, 2.5, 3, 4, 6}, a.t_max);
      effective = {{"t_max", a.t_max}, {"K", {1.5, 2, 2.5, 3, 4, 6}}, {"tolerance", 1e-12}};
      summary = spn::io::summary_header("verify-oracle", effective);
      summary["cases"] = sweep.cases;
      summary["mismatches"] = sweep.mismatches;
      summary["max_rel_error"] = sweep.max_rel_error;
      summary["identity_cases"] = sweep.identity_cases;
      summary["identity_mismatches"] = sweep.identity_mismatches;
      fs::create_directories(out);
      spn::io::write_json_file(out / "summary.json", summary);
      std::cout << summary.dump(2) << '\n';
      return sweep.mismatches == 0 && sweep.identity_mismatches == 0 ? 0 : kExitRuntime;
    } else {
      throw spn::ConfigError("unknown study '" + a.study + "'");
    }
  } catch (const spn::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // Flag whatever the study left behind.
    std::error_code ec;
    fs::create_directories(out, ec);
    json failed = spn::io::summary_header(a.study, effective.is_null() ? json::object() : effective);
    failed["status"] = "failed";
    failed["error"] = e.what();
    if (!ec) spn::io::write_json_file(out / "summary.json", failed);
    throw;
  }
  std::cout << "wrote " << (out / "summary.json").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-hop stochastic processing network simulator and bound calculator"};
  app.set_version_flag("--version", spn::version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run one simulation and write trace.csv and summary.json");
  s->add_option("--config", sim.config, "JSON config file")->check(CLI::ExistingFile);
  s->add_option("--instance", sim.instance, "thm5 | gap | thm1 | thm2 | custom");
  s->add_option("--B", sim.B, "Capacity parameter B");
  s->add_option("--C", sim.C, "Variance parameter C");
  s->add_option("--n", sim.n, "Number of queues (thm1/thm2)");
  s->add_option("--epsilon", sim.epsilon, "Slot-0 perturbation of the thm5 instance");
  s->add_option("--T", sim.T, "Horizon");
  s->add_option("--seed", sim.seed, "Master seed");
  s->add_option("--stride", sim.stride, "Keep every k-th trace record");
  s->add_option("--policy", sim.policy, "maxweight | lyapopt | random_vertex | fixed");
  s->add_option("--validate-capacity", sim.validate_capacity, "Check that mean rates lie in the capacity region");
  s->add_option("--out", sim.out, "Output directory");

  BoundArgs bnd;
  auto* b = app.add_subcommand("bound", "Evaluate a closed-form bound and print JSON");
  b->add_option("name", bnd.name,
                "thm1 | thm1-simple | thm1-asymptotic | thm2 | overshoot | lyapopt-upper | maxweight-upper | thm5 | "
                "remark");
  b->add_flag("--all", bnd.all, "Evaluate every bound at the given parameters");
  b->add_option("--n", bnd.n);
  b->add_option("--B", bnd.B);
  b->add_option("--C", bnd.C);
  b->add_option("--T", bnd.T);
  b->add_option("--K", bnd.K);
  b->add_option("--t", bnd.t);
  b->add_option("--EA", bnd.EA, "Expected total arrivals in the last slot");
  b->add_option("--kind", bnd.kind, "dependent | independent (thm1-asymptotic)");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a study and write CSV and summary.json");
  e->add_option("study", exp.study, "gap | trajectories | table1 | clt-check | verify-oracle")->required();
  e->add_option("--config", exp.config, "JSON config (or a previous summary.json)")->check(CLI::ExistingFile);
  e->add_option("--out", exp.out, "Output directory (default out/<study>)");
  e->add_option("--jobs", exp.jobs, "Worker threads (default: all cores)");
  e->add_flag("--serial", exp.serial, "Use the serial reference path");
  e->add_option("--B", exp.B);
  e->add_option("--C", exp.C);
  e->add_option("--epsilon", exp.epsilon);
  e->add_option("--variance", exp.variance, "Per-queue arrival variance");
  e->add_option("--n", exp.n);
  e->add_option("--T", exp.T);
  e->add_option("--T-list", exp.T_list, "Horizons for clt-check (comma separated)")->delimiter(',');
  e->add_option("--replications", exp.replications);
  e->add_option("--scenarios", exp.scenarios);
  e->add_option("--set-size", exp.set_size);
  e->add_option("--seed", exp.seed);
  e->add_option("--t-max", exp.t_max, "Largest t in verify-oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitConfig;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (b->parsed()) return cmd_bound(bnd);
    return cmd_experiment(exp);
  } catch (const spn::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const spn::AssumptionError& ex) {
    std::cerr << "assumption violated: " << ex.what() << '\n';
    return kExitAssumption;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
}
