#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spnsched/arrivals.hpp"
#include "spnsched/bounds.hpp"
#include "spnsched/core.hpp"
#include "spnsched/policies.hpp"
#include "spnsched/scheduling_set.hpp"

namespace spn {

/// Version string baked in at build time ("0.1.0-<git describe>").
std::string version();

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Seed of replication `index` within `stream` of a run seeded by `master`.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct ParallelOptions {
  int jobs = 0;         // 0 = all available threads
  bool serial = false;  // force the serial reference path
};

/// Number of worker threads `opts` resolves to.
int resolve_jobs(const ParallelOptions& opts);

/// Calls fn(i) for i in [0, count). The parallel path distributes indices
/// over OpenMP threads; the first exception (lowest index) is rethrown after
/// all workers finish.
void for_each_index(std::size_t count, const ParallelOptions& opts, const std::function<void(std::size_t)>& fn);

struct ReplicationConfig {
  std::size_t horizon = 1;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // equal streams give common random numbers across policies
  bool validate_capacity = true;
};

/// One SeriesResult per replication, in replication order.
std::vector<SeriesResult> replicate_serial(const ArrivalSpec& arrivals, const SchedulingSet& set,
                                           const PolicySpec& policy, const ReplicationConfig& cfg);
std::vector<SeriesResult> replicate_parallel(const ArrivalSpec& arrivals, const SchedulingSet& set,
                                             const PolicySpec& policy, const ReplicationConfig& cfg, int jobs = 0);

/// Pairwise sum with a fixed split (midpoint) so results do not depend on
/// how the values were produced.
double pairwise_sum(std::span<const double> xs);

struct RunStats {
  std::string policy;
  std::string scenario;
  Vec mean_total;  // t = 0..T
  Vec se_total;
  Vec mean_sumsq;
  PolicyStats policy_stats;  // summed over replications
};

/// Per-slot mean, standard error (sample sd / sqrt(R), 0 when R = 1) and
/// mean sum of squares across replications.
RunStats summarize(const std::vector<SeriesResult>& reps, std::string policy, std::string scenario);

/// `# config_digest=<digest>` then t,policy,mean_total,se_total,mean_sumsq.
void write_stats_csv(const std::filesystem::path& path, const std::vector<RunStats>& stats,
                     const std::string& config_digest);

// ---------------------------------------------------------------- gap study

struct GapConfig {
  double B = 10.0;
  double C = 0.0;
  std::size_t T = 2000;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  double epsilon = 0.0;
};

struct GapResult {
  std::vector<RunStats> stats;  // MaxWeight, LyapOpt
  std::pair<double, double> window;
  std::vector<BoundValue> lower_curve;  // maxweight_lower_bound(B, C, t), t = 0..T (t < 2 entries are 0)
  Vec lyapopt_upper;                    // t = 0..T
  Vec maxweight_upper;
  std::uint64_t maxweight_ties = 0;
  std::uint64_t lyapopt_ties = 0;
  CrossingClaims claims;  // from replication 0 under MaxWeight
  double b = 0.0;
};

GapResult run_gap_study(const GapConfig& cfg, const ParallelOptions& par = {});

// ------------------------------------------------------------- table 1 study

struct Table1Config {
  std::size_t n = 3;
  std::size_t scenarios = 200;
  std::size_t T = 500;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::size_t set_size = 0;  // 0 = 10 n
  int entry_lo = 1;
  int entry_hi = 10;
  double variance = 1.0;
};

struct Proportion {
  double threshold;
  std::size_t count;
  double fraction;
  double ci_low;
  double ci_high;
};

/// Wilson score interval at the two-sided 95% level.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

struct ScenarioOutcome {
  Vec rate;
  double lyapopt_mean = 0.0;
  double maxweight_mean = 0.0;
  std::optional<double> ratio;  // nullopt when degenerate
};

struct Table1Result {
  SchedulingSet set;
  std::vector<ScenarioOutcome> scenarios;
  std::vector<Proportion> proportions;  // thresholds 1, 0.9, 0.5
  std::size_t degenerate = 0;
  std::vector<RunStats> stats;  // scenario-averaged per-slot curves
  std::vector<std::string> warnings;
};

Table1Result run_table1_study(const Table1Config& cfg, const ParallelOptions& par = {});

// ---------------------------------------------------------- trajectory study

struct TrajectoryConfig {
  std::size_t n = 8;
  std::size_t T = 1000;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::size_t set_size = 0;  // 0 = 10 n
  Vec rate;                  // empty = first boundary sample of the seed
  double variance = 1.0;
};

struct GrowthFit {
  double slope = 0.0;  // d log(mean total) / d log t
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least squares of log(mean) on log(t) over t in [max(1, T/10), T] where the mean is positive.
GrowthFit fit_growth(const Vec& mean_total);

struct TrajectoryResult {
  SchedulingSet set;
  Vec rate;
  std::vector<RunStats> stats;  // MaxWeight, LyapOpt
  std::vector<GrowthFit> fits;
  std::vector<std::string> warnings;
};

TrajectoryResult run_trajectory_study(const TrajectoryConfig& cfg, const ParallelOptions& par = {});

// ---------------------------------------------------------------- CLT check

struct CltConfig {
  std::size_t n = 2;
  double B = 1.0;
  double C = 1.0;
  std::vector<std::size_t> T_list{2, 10, 100, 1000, 10000};
  std::size_t replications = 2000;
  std::uint64_t seed = 1;
};

struct CltRow {
  std::size_t T;
  double estimate;  // mean of max{S(T-1), 0} / sqrt(T-1)
  double se;
  double exact;  // same quantity from the binomial closed form
};

struct CltResult {
  double coefficient;  // sqrt(n) C / sqrt(2 pi)
  std::vector<CltRow> rows;
};

/// E[max{S(T-1), 0}] / sqrt(T-1) for the independent-binary instance, where
/// S(T-1) = sum over slots u < T-1 and queues of (A_i(u) - lambda_i).
double clt_exact(std::size_t n, double B, double C, std::size_t T);

CltResult run_clt_check(const CltConfig& cfg, const ParallelOptions& par = {});

// ------------------------------------------------------------ oracle sweep

struct OracleSweep {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  double max_rel_error = 0.0;
  std::size_t identity_cases = 0;
  std::size_t identity_mismatches = 0;
};

/// Closed form vs brute force over K x t in 1..t_max (tolerance 1e-12
/// relative), plus the partial-sum identity for t <= 20 and K in {2, 3}.
OracleSweep verify_oracle(const std::vector<double>& Ks = {1.5, 2, 2.5, 3, 4, 6}, long t_max = 40,
                          double tol = 1e-12);

// ---------------------------------------------------------- pathwise audit

struct PathwiseReport {
  std::size_t slots = 0;
  std::size_t lindley_violations = 0;
  std::size_t drift_checked = 0;
  std::size_t drift_violations = 0;  // first-order term > 1e-9 (MaxWeight only)
  double max_first_order = -std::numeric_limits<double>::infinity();
};

/// Simulates one run and checks sum_i Q_i(t) >= lindley_trace_bound at every
/// t = 1..T, plus the first-order drift sign when `check_drift` is set.
PathwiseReport pathwise_audit(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                              std::size_t T, std::uint64_t seed, bool check_drift);

}  // namespace spn
