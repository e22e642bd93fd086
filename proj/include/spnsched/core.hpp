#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spnsched/arrivals.hpp"
#include "spnsched/policies.hpp"
#include "spnsched/scheduling_set.hpp"

namespace spn {

using QueueVector = Vec;

/// One slot of the queue recursion: max{q - d, 0} + a, componentwise.
QueueVector step(std::span<const double> q, std::span<const double> d, std::span<const double> a);

/// Record t holds the pre-decision Q(t) and the schedule/arrival of slot t.
/// The record at the horizon has zero schedule and arrival (no slot is applied).
struct TraceRecord {
  std::size_t t = 0;
  QueueVector q;
  Vec schedule;
  Vec arrival;
  double total = 0.0;
  double sum_squares = 0.0;
};

struct SimTrace {
  std::vector<TraceRecord> records;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::size_t stride = 1;
  PolicyStats policy_stats;
};

/// Everything visible during slot t, before Q(t+1) is formed.
struct SlotView {
  std::size_t t;
  std::span<const double> q;
  std::span<const double> schedule;
  std::span<const double> arrival;
  std::span<const double> next_q;
};

struct SimOptions {
  std::size_t horizon = 1;
  std::uint64_t seed = 0;
  std::size_t stride = 1;  // keep every stride-th record plus the last
  bool validate_capacity = true;
  std::string config_digest;
  std::function<void(const SlotView&)> observer;  // called for every slot, ignoring stride
};

/// Runs slots 0..horizon-1 from Q(0) = 0. Throws AssumptionError when a mean
/// arrival rate lies outside the capacity region (unless validation is off),
/// ConfigError on dimension mismatch.
SimTrace simulate(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                  const SimOptions& opts);
SimTrace simulate(const ArrivalSpec& arrivals, const SchedulingSet& set, Policy& policy, const SimOptions& opts);

/// Per-slot totals only, without the record vectors. Same dynamics and random
/// streams as simulate().
struct SeriesResult {
  Vec total;        // index t = 0..horizon
  Vec sum_squares;  // index t = 0..horizon
  PolicyStats policy_stats;
};
SeriesResult simulate_series(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                             const SimOptions& opts);

/// Throws AssumptionError naming the offending rate if some mean leaves the region.
void check_capacity(const ArrivalSpec& arrivals, const SchedulingSet& set, std::size_t horizon);

struct MetricPoint {
  std::size_t t;
  double total;
  double sum_squares;
};
std::vector<MetricPoint> metrics(const SimTrace& trace);

/// Header t,q_1..q_n,d_1..d_n,a_1..a_n,total,sum_squares; 17 significant digits.
void write_trace_csv(std::ostream& os, const SimTrace& trace);

/// printf("%.17g")
std::string format_real(double v);

}  // namespace spn
