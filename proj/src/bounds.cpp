#include "spnsched/bounds.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "spnsched/errors.hpp"

namespace spn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(2 e pi)
const double kRoot2ePi = std::sqrt(2.0 * std::numbers::e * std::numbers::pi);

void require_overshoot_args(double K, long t) {
  if (!(K > 1.0)) throw ConfigError("overshoot requires K > 1");
  if (t < 1) throw ConfigError("overshoot requires t >= 1");
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
  long double sum = 0.0L;
  long double comp = 0.0L;
  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  long double value() const { return sum + comp; }
};

std::vector<std::uint64_t> pascal_row(long t) {
  std::vector<std::uint64_t> row(static_cast<std::size_t>(t) + 1, 0);
  row[0] = 1;
  for (long r = 1; r <= t; ++r) {
    for (long k = r; k >= 1; --k) row[k] += row[k - 1];
  }
  return row;
}

long double ipow(long double base, long e) {
  long double out = 1.0L;
  for (long i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

OvershootParams overshoot_params(double K, long t) {
  require_overshoot_args(K, t);
  const long k0 = static_cast<long>(std::floor(static_cast<long double>(t) / static_cast<long double>(K))) + 1;
  return {K, t, k0, t - k0};
}

double binary_overshoot_closed(double K, long t) {
  const auto p = overshoot_params(K, t);
  const long double Kl = K;
  const long double tl = static_cast<long double>(t);
  const long double m0 = static_cast<long double>(p.m0);
  const long double log_value = std::log(tl) + (m0 + 1.0L) * std::log(Kl - 1.0L) + std::lgamma(tl) -
                                std::lgamma(m0 + 1.0L) - std::lgamma(tl - m0) - tl * std::log(Kl);
  return static_cast<double>(std::exp(log_value));
}

double binary_overshoot_bruteforce(double K, long t) {
  require_overshoot_args(K, t);
  if (t > 64) throw ConfigError("brute-force overshoot supports t <= 64 only");
  const auto binom = pascal_row(t);
  const long double Kl = K;
  const long double up = 1.0L / Kl;
  const long double down = (Kl - 1.0L) / Kl;
  CompensatedSum acc;
  for (long k = 0; k <= t; ++k) {
    const long double excess = static_cast<long double>(k) * Kl - static_cast<long double>(t);
    if (excess <= 0.0L) continue;
    acc.add(excess * static_cast<long double>(binom[k]) * ipow(up, k) * ipow(down, t - k));
  }
  return static_cast<double>(acc.value());
}

double overshoot_partial_sum(double K, long t, long m) {
  require_overshoot_args(K, t);
  if (m < 0 || m > t - 1) throw ConfigError("partial sum index out of range");
  if (t > 64) throw ConfigError("partial sum supports t <= 64 only");
  const auto binom = pascal_row(t);
  const long double Kl = K;
  CompensatedSum acc;
  for (long k = t - m; k <= t; ++k) {
    acc.add((static_cast<long double>(k) * Kl - static_cast<long double>(t)) * static_cast<long double>(binom[k]) *
            ipow(Kl - 1.0L, t - k));
  }
  return static_cast<double>(acc.value());
}

BoundValue lower_bound_general(std::size_t n, double B, double C, long T) {
  if (n < 1 || !(B > 0.0) || !(C >= 0.0) || T < 1) throw ConfigError("lower_bound_general: invalid parameters");
  const double nd = static_cast<double>(n);
  const double base = std::sqrt(nd) * B;
  if (C == 0.0) return {base, "thm1-c0", true, std::pair{1.0, kInf}};

  const double B2 = B * B;
  const double nC2 = nd * C * C;
  const double switch_T = (B2 + 2.0 * nC2) / nC2;
  const double Td = static_cast<double>(T);
  if (Td <= switch_T) {
    const double v = std::pow(nd, 1.5) * C * C * (Td - 1.0) / (B * std::pow(1.0 + nC2 / B2, Td - 1.0));
    return {v + base, "thm1-clause1", true, std::pair{1.0, switch_T}};
  }
  const double delta = std::max((B2 + nC2) / (B2 * (Td - 1.0)), (B2 + nC2) / (nC2 * (Td - 1.0)));
  if (delta >= 1.0) {
    // The overshoot factor (1 - delta) is nonpositive; only sqrt(n) B survives.
    return {base, "thm1-clause2", true, std::pair{switch_T, kInf}};
  }
  const double xi = -(B2 + nC2) * (B2 + nC2) * (Td - 2.0) / (12.0 * (nC2 * (Td - 2.0) - B2) * (B2 * (Td - 2.0) - nC2));
  const double v = std::exp(xi) / std::sqrt(2.0 * std::numbers::pi) * (1.0 - delta) * nd * C * std::sqrt(Td - 2.0);
  return {v + base, "thm1-clause2", true, std::pair{switch_T, kInf}};
}

BoundValue lower_bound_simple(std::size_t n, double B, double C, long T) {
  if (n < 1 || !(B > 0.0) || !(C > 0.0) || T < 2) throw ConfigError("lower_bound_simple: invalid parameters");
  const double nd = static_cast<double>(n);
  const double start = 2.0 * B * B / (nd * C * C) + 2.0 * nd * C * C / (B * B) + 5.0;
  const double Td = static_cast<double>(T);
  const double v = nd * C * std::sqrt(Td - 2.0) / (2.0 * kRoot2ePi) + std::sqrt(nd) * B;
  return {v, "thm1-simple", Td > start, std::pair{start, kInf}};
}

double lower_bound_asymptotic(std::size_t n, double C, Dependence kind) {
  const double nd = static_cast<double>(n);
  const double factor = kind == Dependence::Dependent ? nd : std::sqrt(nd);
  return factor * C / std::sqrt(2.0 * std::numbers::pi);
}

ClauseOneSandwich clause_one_sandwich(std::size_t n, double B, double C, long T) {
  if (n < 1 || !(B > 0.0) || !(C >= 0.0) || T < 1) throw ConfigError("clause_one_sandwich: invalid parameters");
  const double nd = static_cast<double>(n);
  const double core = std::pow(nd, 1.5) * C * C * (static_cast<double>(T) - 1.0) / B;
  const double clause = core / std::pow(1.0 + nd * C * C / (B * B), static_cast<double>(T) - 1.0);
  return {core / (2.0 * std::numbers::e), clause, core, B >= std::sqrt(nd) * C};
}

double lindley_trace_bound(std::span<const double> arrival_totals, double M, std::size_t T) {
  if (T < 1 || arrival_totals.size() < T) throw ConfigError("lindley_trace_bound: series shorter than T");
  double workload = 0.0;
  for (std::size_t u = 0; u + 1 < T; ++u) workload = std::max(workload + (arrival_totals[u] - M), 0.0);
  return workload + arrival_totals[T - 1];
}

double upper_bound_lyapopt(std::size_t n, double C, long T, double expected_last_arrival_total) {
  if (T < 1) throw ConfigError("upper_bound_lyapopt: T must be >= 1");
  return static_cast<double>(n) * C * std::sqrt(static_cast<double>(T) - 1.0) + expected_last_arrival_total;
}

double upper_bound_maxweight(std::size_t n, double B, double C, long T, double expected_last_arrival_total) {
  if (T < 1) throw ConfigError("upper_bound_maxweight: T must be >= 1");
  return static_cast<double>(n) * std::sqrt((B * B + C * C) * (static_cast<double>(T) - 1.0)) +
         expected_last_arrival_total;
}

double maxweight_window_start(double B, double C) {
  const double tail = 2.0 * B * B / (std::sqrt(2.0) * B - 1.0);
  if (C == 0.0) return tail;
  return std::max(B * B / (C * C) + 4.0 * C * C / (B * B) + 5.0, tail);
}

BoundValue maxweight_lower_bound(double B, double C, long T) {
  if (!(B > 0.0) || !(C >= 0.0) || T < 1) throw ConfigError("maxweight_lower_bound: invalid parameters");
  const double Td = static_cast<double>(T);
  const double end = B * B * B / (2.0 * std::sqrt(2.0));
  const double start = maxweight_window_start(B, C);
  const bool big_enough = B >= 3.0 * std::sqrt(2.0);
  const bool inside = start <= Td && Td <= end;
  if (C == 0.0) {
    const double v = std::pow(2.0, 0.25) * std::sqrt(B * Td) / 3.0;
    return {v, "thm5-c0", big_enough && inside, std::pair{start, end}};
  }
  const double v = (C + std::sqrt(B)) * std::sqrt(std::max(Td - 2.0, 0.0)) / (2.0 * kRoot2ePi);
  return {v, "thm5-window", big_enough && C >= 1.0 && C <= B && inside, std::pair{start, end}};
}

std::vector<std::optional<std::size_t>> crossing_times(std::span<const double> q2, double b, std::size_t k_max) {
  std::vector<std::optional<std::size_t>> out(k_max);
  std::size_t k = 1;
  for (std::size_t t = 0; t < q2.size() && k <= k_max; ++t) {
    while (k <= k_max && q2[t] >= static_cast<double>(k) * b) {
      out[k - 1] = t;
      ++k;
    }
  }
  return out;
}

CrossingClaims check_crossing_claims(std::span<const double> q2, double b) {
  CrossingClaims out;
  const auto k_max = static_cast<std::size_t>(std::floor(b / 2.0));
  out.times = crossing_times(q2, b, k_max);
  out.claim1 = k_max >= 2;
  for (std::size_t k = 2; k <= k_max; ++k) {
    const auto& tk = out.times[k - 1];
    if (!tk || *tk == 0 ||
        static_cast<double>(k - 1) / std::sqrt(static_cast<double>(*tk)) < 1.0 / (2.0 * std::sqrt(b + 1.0))) {
      out.claim1 = false;
    }
  }
  const auto& last = k_max >= 1 ? out.times[k_max - 1] : std::optional<std::size_t>{};
  out.claim2 = last.has_value() && static_cast<double>(*last) >= b * b * b / 16.0;
  return out;
}

}  // namespace spn
