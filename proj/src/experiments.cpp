#include "spnsched/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>

#include "spnsched/errors.hpp"

#ifndef SPNSCHED_VERSION
#define SPNSCHED_VERSION "0.1.0"
#endif

namespace spn {

std::string version() { return SPNSCHED_VERSION; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ (stream * 0x9E3779B97F4A7C15ULL);
  h = splitmix64(state);
  state = h ^ (index * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

int resolve_jobs(const ParallelOptions& opts) {
  if (opts.serial) return 1;
  if (opts.jobs > 0) return opts.jobs;
  return std::max(1, omp_get_max_threads());
}

void for_each_index(std::size_t count, const ParallelOptions& opts, const std::function<void(std::size_t)>& fn) {
  const int jobs = resolve_jobs(opts);
  if (opts.serial) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::vector<SeriesResult> replicate_with(const ArrivalSpec& arrivals, const SchedulingSet& set,
                                         const PolicySpec& policy, const ReplicationConfig& cfg,
                                         const ParallelOptions& par) {
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.horizon < 1) throw ConfigError("horizon T must be >= 1");
  policy.validate();
  if (cfg.validate_capacity) check_capacity(arrivals, set, cfg.horizon);
  std::vector<SeriesResult> out(cfg.replications);
  for_each_index(cfg.replications, par, [&](std::size_t r) {
    SimOptions opts;
    opts.horizon = cfg.horizon;
    opts.seed = replication_seed(cfg.seed, cfg.stream, r);
    opts.validate_capacity = false;
    out[r] = simulate_series(arrivals, set, policy, opts);
  });
  return out;
}

double mean_of(std::span<const double> xs) { return pairwise_sum(xs) / static_cast<double>(xs.size()); }

// Mean and standard error of the mean.
std::pair<double, double> mean_se(std::span<const double> xs) {
  const double m = mean_of(xs);
  if (xs.size() < 2) return {m, 0.0};
  Vec dev(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - m) * (xs[i] - m);
  const double var = pairwise_sum(dev) / static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(xs.size()))};
}

double vec_sum(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

std::vector<SeriesResult> replicate_serial(const ArrivalSpec& arrivals, const SchedulingSet& set,
                                           const PolicySpec& policy, const ReplicationConfig& cfg) {
  return replicate_with(arrivals, set, policy, cfg, ParallelOptions{1, true});
}

std::vector<SeriesResult> replicate_parallel(const ArrivalSpec& arrivals, const SchedulingSet& set,
                                             const PolicySpec& policy, const ReplicationConfig& cfg, int jobs) {
  return replicate_with(arrivals, set, policy, cfg, ParallelOptions{jobs, false});
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

RunStats summarize(const std::vector<SeriesResult>& reps, std::string policy, std::string scenario) {
  if (reps.empty()) throw ConfigError("summarize: no replications");
  const std::size_t len = reps.front().total.size();
  RunStats s;
  s.policy = std::move(policy);
  s.scenario = std::move(scenario);
  s.mean_total.resize(len);
  s.se_total.resize(len);
  s.mean_sumsq.resize(len);
  Vec col(reps.size());
  Vec colsq(reps.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      col[r] = reps[r].total[t];
      colsq[r] = reps[r].sum_squares[t];
    }
    std::tie(s.mean_total[t], s.se_total[t]) = mean_se(col);
    s.mean_sumsq[t] = mean_of(colsq);
  }
  for (const auto& r : reps) {
    s.policy_stats.decisions += r.policy_stats.decisions;
    s.policy_stats.ties += r.policy_stats.ties;
    s.policy_stats.max_iterations_used = std::max(s.policy_stats.max_iterations_used, r.policy_stats.max_iterations_used);
  }
  return s;
}

void write_stats_csv(const std::filesystem::path& path, const std::vector<RunStats>& stats,
                     const std::string& config_digest) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# config_digest=" << config_digest << '\n';
  os << "t,policy,mean_total,se_total,mean_sumsq\n";
  for (const auto& s : stats) {
    for (std::size_t t = 0; t < s.mean_total.size(); ++t) {
      os << t << ',' << s.policy << ',' << format_real(s.mean_total[t]) << ',' << format_real(s.se_total[t]) << ','
         << format_real(s.mean_sumsq[t]) << '\n';
    }
  }
}

// ---------------------------------------------------------------- gap study

GapResult run_gap_study(const GapConfig& cfg, const ParallelOptions& par) {
  if (cfg.T < 1) throw ConfigError("T must be >= 1");
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (!(cfg.C >= 0.0)) throw ConfigError("C must be >= 0");
  const Instance inst = build_gap_instance(cfg.B, cfg.C, cfg.epsilon);

  GapResult out;
  out.b = std::sqrt(2.0) * cfg.B;
  ReplicationConfig rc{cfg.T, cfg.replications, cfg.seed, 0, true};
  const auto mw = replicate_parallel(inst.arrivals, inst.set, PolicySpec::maxweight(), rc, resolve_jobs(par));
  const auto ly = replicate_parallel(inst.arrivals, inst.set, PolicySpec::lyapopt(), rc, resolve_jobs(par));
  out.stats.push_back(summarize(mw, "maxweight", "gap"));
  out.stats.push_back(summarize(ly, "lyapopt", "gap"));
  out.maxweight_ties = out.stats[0].policy_stats.ties;
  out.lyapopt_ties = out.stats[1].policy_stats.ties;

  const double ea = vec_sum(inst.arrivals.mean(cfg.T - 1));
  const double Bset = capacity_param(inst.set);
  const double Cset = inst.arrivals.variance_param(0);
  out.window = {maxweight_window_start(cfg.B, cfg.C), cfg.B * cfg.B * cfg.B / (2.0 * std::sqrt(2.0))};
  out.lower_curve.resize(cfg.T + 1);
  out.lyapopt_upper.assign(cfg.T + 1, 0.0);
  out.maxweight_upper.assign(cfg.T + 1, 0.0);
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const long tl = static_cast<long>(t);
    out.lower_curve[t] = maxweight_lower_bound(cfg.B, cfg.C, tl);
    out.lyapopt_upper[t] = upper_bound_lyapopt(2, Cset, tl, ea);
    out.maxweight_upper[t] = upper_bound_maxweight(2, Bset, Cset, tl, ea);
  }
  out.lower_curve[0] = {0.0, out.lower_curve.size() > 1 ? out.lower_curve[1].regime : "thm5-c0", false, out.window};

  SimOptions opts;
  opts.horizon = cfg.T;
  opts.seed = replication_seed(cfg.seed, 0, 0);
  const SimTrace trace = simulate(inst.arrivals, inst.set, PolicySpec::maxweight(), opts);
  Vec q2;
  q2.reserve(trace.records.size());
  for (const auto& r : trace.records) q2.push_back(r.q[1]);
  out.claims = check_crossing_claims(q2, out.b);
  return out;
}

// ------------------------------------------------------------- table 1 study

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

SchedulingSet sample_study_set(std::size_t n, std::size_t size, int lo, int hi, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, kScenarioSalt);
  return sample_integer_set(n, size == 0 ? 10 * n : size, lo, hi, rng);
}

Vec sample_study_rate(const CapacityRegion& region, std::uint64_t seed, std::size_t scenario) {
  Rng rng = make_stream(seed, scenario + 1, kScenarioSalt);
  return boundary_sample(region, rng);
}

// Mean over scenarios (and SE across scenarios) of per-scenario curves.
RunStats average_curves(const std::vector<RunStats>& per_scenario, const std::string& policy) {
  RunStats s;
  s.policy = policy;
  s.scenario = "all";
  const std::size_t len = per_scenario.front().mean_total.size();
  s.mean_total.resize(len);
  s.se_total.resize(len);
  s.mean_sumsq.resize(len);
  Vec col(per_scenario.size());
  Vec colsq(per_scenario.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t k = 0; k < per_scenario.size(); ++k) {
      col[k] = per_scenario[k].mean_total[t];
      colsq[k] = per_scenario[k].mean_sumsq[t];
    }
    std::tie(s.mean_total[t], s.se_total[t]) = mean_se(col);
    s.mean_sumsq[t] = mean_of(colsq);
  }
  for (const auto& p : per_scenario) {
    s.policy_stats.decisions += p.policy_stats.decisions;
    s.policy_stats.ties += p.policy_stats.ties;
  }
  return s;
}

}  // namespace

Table1Result run_table1_study(const Table1Config& cfg, const ParallelOptions& par) {
  if (cfg.n < 2) throw ConfigError("table1 requires n >= 2");
  if (cfg.scenarios < 1 || cfg.T < 1 || cfg.replications < 1) throw ConfigError("table1: counts must be >= 1");
  Table1Result out{sample_study_set(cfg.n, cfg.set_size, cfg.entry_lo, cfg.entry_hi, cfg.seed), {}, {}, 0, {}, {}};
  const CapacityRegion region(out.set);
  out.scenarios.resize(cfg.scenarios);
  for (std::size_t s = 0; s < cfg.scenarios; ++s) out.scenarios[s].rate = sample_study_rate(region, cfg.seed, s);

  std::vector<RunStats> mw_curves(cfg.scenarios);
  std::vector<RunStats> ly_curves(cfg.scenarios);
  std::vector<std::vector<std::string>> warnings(cfg.scenarios);
  for_each_index(cfg.scenarios, par, [&](std::size_t s) {
    auto& sc = out.scenarios[s];
    const ArrivalSpec arrivals = build_binomial_spec(sc.rate, cfg.variance, &warnings[s]);
    check_capacity(arrivals, out.set, cfg.T);
    const ReplicationConfig rc{cfg.T, cfg.replications, cfg.seed, s + 1, false};
    const auto ly = replicate_serial(arrivals, out.set, PolicySpec::lyapopt(), rc);
    const auto mw = replicate_serial(arrivals, out.set, PolicySpec::maxweight(), rc);
    ly_curves[s] = summarize(ly, "lyapopt", std::to_string(s));
    mw_curves[s] = summarize(mw, "maxweight", std::to_string(s));
    sc.lyapopt_mean = ly_curves[s].mean_total[cfg.T];
    sc.maxweight_mean = mw_curves[s].mean_total[cfg.T];
    if (sc.maxweight_mean >= 1e-9) sc.ratio = sc.lyapopt_mean / sc.maxweight_mean;
  });
  for (std::size_t s = 0; s < cfg.scenarios; ++s) {
    for (auto& w : warnings[s]) out.warnings.push_back("scenario " + std::to_string(s) + ": " + w);
    if (!out.scenarios[s].ratio) ++out.degenerate;
  }

  const std::size_t valid = cfg.scenarios - out.degenerate;
  for (double threshold : {1.0, 0.9, 0.5}) {
    std::size_t count = 0;
    for (const auto& sc : out.scenarios) {
      if (sc.ratio && *sc.ratio <= threshold) ++count;
    }
    const auto [lo, hi] = wilson_interval(count, valid);
    const double frac = valid ? static_cast<double>(count) / static_cast<double>(valid) : 0.0;
    out.proportions.push_back({threshold, count, frac, lo, hi});
  }
  out.stats.push_back(average_curves(mw_curves, "maxweight"));
  out.stats.push_back(average_curves(ly_curves, "lyapopt"));
  return out;
}

// ---------------------------------------------------------- trajectory study

GrowthFit fit_growth(const Vec& mean_total) {
  GrowthFit fit;
  if (mean_total.size() < 2) return fit;
  const std::size_t T = mean_total.size() - 1;
  const std::size_t start = std::max<std::size_t>(1, T / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = start; t <= T; ++t) {
    if (!(mean_total[t] > 0.0)) continue;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(mean_total[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.points;
  }
  if (fit.points < 2) return fit;
  const double k = static_cast<double>(fit.points);
  const double denom = k * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;
  return fit;
}

TrajectoryResult run_trajectory_study(const TrajectoryConfig& cfg, const ParallelOptions& par) {
  if (cfg.n < 1 || cfg.T < 1 || cfg.replications < 1) throw ConfigError("trajectories: counts must be >= 1");
  TrajectoryResult out{sample_study_set(cfg.n, cfg.set_size, 1, 10, cfg.seed), cfg.rate, {}, {}, {}};
  if (out.rate.empty()) {
    out.rate = sample_study_rate(CapacityRegion(out.set), cfg.seed, 0);
  } else if (out.rate.size() != cfg.n) {
    throw ConfigError("trajectories: rate has the wrong dimension");
  }
  const ArrivalSpec arrivals = build_binomial_spec(out.rate, cfg.variance, &out.warnings);
  const ReplicationConfig rc{cfg.T, cfg.replications, cfg.seed, 1, true};
  const int jobs = resolve_jobs(par);
  out.stats.push_back(summarize(replicate_parallel(arrivals, out.set, PolicySpec::maxweight(), rc, jobs),
                                "maxweight", "trajectory"));
  out.stats.push_back(
      summarize(replicate_parallel(arrivals, out.set, PolicySpec::lyapopt(), rc, jobs), "lyapopt", "trajectory"));
  for (const auto& s : out.stats) out.fits.push_back(fit_growth(s.mean_total));
  return out;
}

// ---------------------------------------------------------------- CLT check

double clt_exact(std::size_t n, double B, double C, std::size_t T) {
  if (T < 2) throw ConfigError("clt_exact requires T >= 2");
  if (C == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double K = nd * C * C / (B * B) + 1.0;
  const double lambda = B / std::sqrt(nd);
  // All n(T-1) coins share K and lambda, so S = lambda * (K * ups - n(T-1)).
  const long coins = static_cast<long>(n * (T - 1));
  return lambda * binary_overshoot_closed(K, coins) / std::sqrt(static_cast<double>(T - 1));
}

CltResult run_clt_check(const CltConfig& cfg, const ParallelOptions& par) {
  if (cfg.replications < 1 || cfg.T_list.empty()) throw ConfigError("clt-check: need replications and T values");
  for (auto T : cfg.T_list) {
    if (T < 2) throw ConfigError("clt-check: every T must be >= 2");
  }
  const Instance inst = build_thm2_instance(cfg.n, cfg.B, cfg.C);
  const Vec lambda = inst.arrivals.mean(0);
  const std::size_t t_max = *std::max_element(cfg.T_list.begin(), cfg.T_list.end());
  const std::size_t k = cfg.T_list.size();

  // values[j * R + r]: replication r at T_list[j].
  Vec values(k * cfg.replications, 0.0);
  for_each_index(cfg.replications, par, [&](std::size_t r) {
    Rng rng = make_stream(replication_seed(cfg.seed, 0, r), 0, kArrivalSalt);
    Vec a(cfg.n);
    double S = 0.0;
    for (std::size_t u = 0; u + 1 < t_max; ++u) {
      inst.arrivals.sample(u, rng, a);
      for (std::size_t i = 0; i < cfg.n; ++i) S += a[i] - lambda[i];
      for (std::size_t j = 0; j < k; ++j) {
        if (cfg.T_list[j] == u + 2) {
          values[j * cfg.replications + r] = std::max(S, 0.0) / std::sqrt(static_cast<double>(u + 1));
        }
      }
    }
  });

  CltResult out;
  out.coefficient = lower_bound_asymptotic(cfg.n, cfg.C, Dependence::Independent);
  for (std::size_t j = 0; j < k; ++j) {
    const auto [m, se] =
        mean_se(std::span<const double>(values).subspan(j * cfg.replications, cfg.replications));
    out.rows.push_back({cfg.T_list[j], m, se, clt_exact(cfg.n, cfg.B, cfg.C, cfg.T_list[j])});
  }
  return out;
}

// ------------------------------------------------------------ oracle sweep

OracleSweep verify_oracle(const std::vector<double>& Ks, long t_max, double tol) {
  OracleSweep out;
  for (double K : Ks) {
    for (long t = 1; t <= t_max; ++t) {
      const double closed = binary_overshoot_closed(K, t);
      const double brute = binary_overshoot_bruteforce(K, t);
      const double rel = std::fabs(closed - brute) / std::max(std::fabs(brute), 1e-300);
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.cases;
      if (!(rel <= tol)) ++out.mismatches;
    }
  }
  for (double K : {2.0, 3.0}) {
    for (long t = 1; t <= 20; ++t) {
      for (long m = 0; m <= t - 1; ++m) {
        const double lhs = overshoot_partial_sum(K, t, m);
        const double rhs = std::exp(std::log(static_cast<double>(t)) + static_cast<double>(m + 1) * std::log(K - 1.0) +
                                    std::lgamma(static_cast<double>(t)) - std::lgamma(static_cast<double>(m + 1)) -
                                    std::lgamma(static_cast<double>(t - m)));
        ++out.identity_cases;
        if (!(std::fabs(lhs - rhs) <= 1e-9 * std::max(1.0, std::fabs(rhs)))) ++out.identity_mismatches;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------- pathwise audit

PathwiseReport pathwise_audit(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                              std::size_t T, std::uint64_t seed, bool check_drift) {
  PathwiseReport rep;
  const double M = max_total_departure(set);
  const CapacityRegion region(set);
  Vec totals;
  totals.reserve(T);
  Vec checked_lambda;
  bool lambda_inside = false;
  double workload = 0.0;
  SimOptions opts;
  opts.horizon = T;
  opts.seed = seed;
  opts.validate_capacity = false;
  opts.observer = [&](const SlotView& v) {
    double atot = 0.0;
    for (double x : v.arrival) atot += x;
    totals.push_back(atot);
    double next_total = 0.0;
    for (double x : v.next_q) next_total += x;
    ++rep.slots;
    if (next_total < workload + atot) ++rep.lindley_violations;
    workload = std::max(workload + (atot - M), 0.0);
    if (check_drift) {
      const Vec lambda = arrivals.mean(v.t);
      if (lambda != checked_lambda) {
        checked_lambda = lambda;
        lambda_inside = region.contains(lambda);
      }
      if (lambda_inside) {
        const DriftTerms dt = drift_terms(v.q, v.schedule, lambda);
        ++rep.drift_checked;
        rep.max_first_order = std::max(rep.max_first_order, dt.first_order);
        if (dt.first_order > 1e-9) ++rep.drift_violations;
      }
    }
  };
  const SimTrace trace = simulate(arrivals, set, policy, opts);
  // Cross-check the running recursion against the standalone bound at the horizon.
  if (trace.records.back().total < lindley_trace_bound(totals, M, T)) ++rep.lindley_violations;
  return rep;
}

}  // namespace spn
