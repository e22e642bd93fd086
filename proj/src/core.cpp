#include "spnsched/core.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "spnsched/errors.hpp"

namespace spn {
namespace {

void fill_totals(std::span<const double> q, double& total, double& sumsq) {
  total = 0.0;
  sumsq = 0.0;
  for (double v : q) {
    total += v;
    sumsq += v * v;
  }
}

// Shared slot loop. `on_slot(t, q, d, a, next)` sees every slot.
template <class OnSlot>
void run_slots(const ArrivalSpec& arrivals, const SchedulingSet& set, Policy& policy, const SimOptions& opts,
               OnSlot&& on_slot) {
  const std::size_t n = set.dim();
  if (arrivals.dim() != n) throw ConfigError("arrival dimension does not match scheduling set");
  if (opts.horizon < 1) throw ConfigError("horizon T must be >= 1");
  if (auto limit = arrivals.horizon_limit(); limit && *limit < opts.horizon) {
    throw ConfigError("deterministic arrival sequence shorter than the horizon");
  }
  if (opts.validate_capacity) check_capacity(arrivals, set, opts.horizon);

  Rng arrival_rng = make_stream(opts.seed, 0, kArrivalSalt);
  QueueVector q(n, 0.0);
  QueueVector next(n, 0.0);
  Vec a(n, 0.0);
  Vec prev_rate;
  for (std::size_t t = 0; t < opts.horizon; ++t) {
    DecisionContext ctx{t, q, prev_rate};
    Vec d = policy.decide(ctx);
    if (d.size() != n) throw ConfigError("policy returned a schedule of the wrong dimension");
    arrivals.sample(t, arrival_rng, a);
    for (std::size_t i = 0; i < n; ++i) next[i] = std::max(q[i] - d[i], 0.0) + a[i];
    on_slot(t, q, d, a, next);
    if (opts.observer) opts.observer(SlotView{t, q, d, a, next});
    if (arrivals.is_random()) {
      prev_rate = arrivals.mean(0);
    } else {
      prev_rate = arrivals.mean(t);
    }
    q.swap(next);
  }
}

}  // namespace

QueueVector step(std::span<const double> q, std::span<const double> d, std::span<const double> a) {
  if (q.size() != d.size() || q.size() != a.size()) throw ConfigError("step: dimension mismatch");
  QueueVector out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (d[i] < 0.0 || a[i] < 0.0) throw ConfigError("step: schedule and arrival must be nonnegative");
    out[i] = std::max(q[i] - d[i], 0.0) + a[i];
  }
  return out;
}

void check_capacity(const ArrivalSpec& arrivals, const SchedulingSet& set, std::size_t horizon) {
  const CapacityRegion region(set);
  std::vector<Vec> means;
  if (auto limit = arrivals.horizon_limit()) {
    for (std::size_t t = 0; t < std::min(*limit, horizon); ++t) means.push_back(arrivals.mean(t));
  } else {
    means = arrivals.distinct_means();
  }
  for (const auto& m : means) {
    if (!region.contains(m)) {
      std::ostringstream os;
      os << "arrival rate (";
      for (std::size_t i = 0; i < m.size(); ++i) os << (i ? ", " : "") << m[i];
      os << ") lies outside the capacity region";
      throw AssumptionError(os.str());
    }
  }
}

SimTrace simulate(const ArrivalSpec& arrivals, const SchedulingSet& set, Policy& policy, const SimOptions& opts) {
  if (opts.stride < 1) throw ConfigError("stride must be >= 1");
  SimTrace trace;
  trace.seed = opts.seed;
  trace.config_digest = opts.config_digest;
  trace.stride = opts.stride;
  trace.records.reserve(opts.horizon / opts.stride + 2);

  const std::size_t n = set.dim();
  Vec last_q(n, 0.0);
  run_slots(arrivals, set, policy, opts,
            [&](std::size_t t, std::span<const double> q, std::span<const double> d, std::span<const double> a,
                std::span<const double> next) {
              if (t % opts.stride == 0) {
                TraceRecord rec{t, {q.begin(), q.end()}, {d.begin(), d.end()}, {a.begin(), a.end()}, 0.0, 0.0};
                fill_totals(rec.q, rec.total, rec.sum_squares);
                trace.records.push_back(std::move(rec));
              }
              last_q.assign(next.begin(), next.end());
            });
  TraceRecord last{opts.horizon, last_q, Vec(n, 0.0), Vec(n, 0.0), 0.0, 0.0};
  fill_totals(last.q, last.total, last.sum_squares);
  trace.records.push_back(std::move(last));
  trace.policy_stats = policy.stats();
  return trace;
}

SimTrace simulate(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                  const SimOptions& opts) {
  auto p = make_policy(policy, set, opts.seed);
  return simulate(arrivals, set, *p, opts);
}

SeriesResult simulate_series(const ArrivalSpec& arrivals, const SchedulingSet& set, const PolicySpec& policy,
                             const SimOptions& opts) {
  auto p = make_policy(policy, set, opts.seed);
  SeriesResult out;
  out.total.assign(opts.horizon + 1, 0.0);
  out.sum_squares.assign(opts.horizon + 1, 0.0);
  run_slots(arrivals, set, *p, opts,
            [&](std::size_t t, std::span<const double>, std::span<const double>, std::span<const double>,
                std::span<const double> next) { fill_totals(next, out.total[t + 1], out.sum_squares[t + 1]); });
  out.policy_stats = p->stats();
  return out;
}

std::vector<MetricPoint> metrics(const SimTrace& trace) {
  std::vector<MetricPoint> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back({r.t, r.total, r.sum_squares});
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  if (trace.records.empty()) return;
  const std::size_t n = trace.records.front().q.size();
  os << "t";
  for (const char* prefix : {"q_", "d_", "a_"}) {
    for (std::size_t i = 1; i <= n; ++i) os << ',' << prefix << i;
  }
  os << ",total,sum_squares\n";
  for (const auto& r : trace.records) {
    os << r.t;
    for (const Vec* v : {&r.q, &r.schedule, &r.arrival}) {
      for (double x : *v) os << ',' << format_real(x);
    }
    os << ',' << format_real(r.total) << ',' << format_real(r.sum_squares) << '\n';
  }
}

}  // namespace spn
