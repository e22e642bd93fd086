#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spn {

/// A closed-form bound with the clause that produced it. `valid` is false
/// when the clause's hypotheses fail at the given parameters; the value is
/// still reported.
struct BoundValue {
  double value = 0.0;
  std::string regime;
  bool valid = true;
  std::optional<std::pair<double, double>> window;
};

/// k0 = floor(t/K) + 1 and m0 = t - k0 for the binary overshoot.
struct OvershootParams {
  double K;
  long t;
  long k0;
  long m0;
};
OvershootParams overshoot_params(double K, long t);

/// E[max{S(t), 0}] for S(t) a sum of t i.i.d. steps taking K-1 w.p. 1/K and
/// -1 otherwise, through t (K-1)^(m0+1) C(t-1, m0) / K^t in log space.
double binary_overshoot_closed(double K, long t);

/// The same expectation by direct summation over the number of up-steps.
/// Refuses (ConfigError) for t > 64.
double binary_overshoot_bruteforce(double K, long t);

/// sum_{k=t-m}^{t} (kK - t) C(t,k) (K-1)^(t-k), summed term by term.
double overshoot_partial_sum(double K, long t, long m);

/// Lower bound over all policies and M(C^2, B^2) at horizon T.
BoundValue lower_bound_general(std::size_t n, double B, double C, long T);

/// n C sqrt(T-2) / (2 sqrt(2 e pi)) + sqrt(n) B, valid for
/// T > 2B^2/(nC^2) + 2nC^2/B^2 + 5.
BoundValue lower_bound_simple(std::size_t n, double B, double C, long T);

enum class Dependence { Dependent, Independent };

/// Coefficient of sqrt(T-2) (dependent) or sqrt(T-1) (independent) in the
/// large-T lower bound: n C / sqrt(2 pi) or sqrt(n) C / sqrt(2 pi).
double lower_bound_asymptotic(std::size_t n, double C, Dependence kind);

/// n^{3/2} C^2 (T-1) / (2 e B) <= clause-1 value <= n^{3/2} C^2 (T-1) / B
/// when B >= sqrt(n) C; reported as a diagnostic triple.
struct ClauseOneSandwich {
  double lower;
  double clause_one;
  double upper;
  bool regime_holds;  // B >= sqrt(n) C
};
ClauseOneSandwich clause_one_sandwich(std::size_t n, double B, double C, long T);

/// Policy-independent pathwise bound on sum_i Q_i(T) from per-slot arrival
/// totals: the Lindley workload of sum_i A_i(u) - M over u < T-1, plus the
/// last slot's arrivals.
double lindley_trace_bound(std::span<const double> arrival_totals, double M, std::size_t T);

/// n C sqrt(T-1) + sum_i E[A_i(T-1)]; meaningful when lambda(t) is in D for all t.
double upper_bound_lyapopt(std::size_t n, double C, long T, double expected_last_arrival_total);

/// n sqrt((B^2 + C^2)(T-1)) + sum_i E[A_i(T-1)].
double upper_bound_maxweight(std::size_t n, double B, double C, long T, double expected_last_arrival_total);

/// Two-queue MaxWeight lower bound. C = 0 uses 2^{1/4} sqrt(BT) / 3 on
/// [2B^2/(sqrt2 B - 1), B^3/(2 sqrt2)]; otherwise (C + sqrt B) sqrt(T-2) / (2 sqrt(2 e pi))
/// on [l(C,B), B^3/(2 sqrt2)], valid only for B >= 3 sqrt2 and 1 <= C <= B.
BoundValue maxweight_lower_bound(double B, double C, long T);

/// l(C, B) = max{B^2/C^2 + 4C^2/B^2 + 5, 2B^2/(sqrt2 B - 1)}.
double maxweight_window_start(double B, double C);

/// t_k = min{t : q2[t] >= k b} for k = 1..k_max; entries are nullopt when never reached.
std::vector<std::optional<std::size_t>> crossing_times(std::span<const double> q2, double b, std::size_t k_max);

struct CrossingClaims {
  bool claim1 = false;  // (k-1)/sqrt(t_k) >= 1/(2 sqrt(b+1)) for 2 <= k <= floor(b/2)
  bool claim2 = false;  // t_{floor(b/2)} >= b^3/16
  std::vector<std::optional<std::size_t>> times;
};
CrossingClaims check_crossing_claims(std::span<const double> q2, double b);

}  // namespace spn
