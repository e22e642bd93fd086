#include "spnsched/policies.hpp"

#include <algorithm>
#include <cmath>

#include "spnsched/errors.hpp"

namespace spn {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(std::span<const double> q, const SchedulingSet& set) {
  if (q.size() != set.dim()) throw ConfigError("queue vector dimension does not match scheduling set");
}

bool same_residual(std::span<const double> q, const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (std::max(q[i] - a[i], 0.0) != std::max(q[i] - b[i], 0.0)) return false;
  }
  return true;
}

// phi(gamma) = sum_i max{r_i - gamma * dir_i, 0}^2 on [0, gmax]. Convex and
// piecewise quadratic with a breakpoint wherever a residual crosses zero.
double exact_line_search(std::span<const double> r, std::span<const double> dir, double gmax) {
  std::vector<double> knots{0.0, gmax};
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (dir[i] != 0.0) {
      const double bp = r[i] / dir[i];
      if (bp > 0.0 && bp < gmax) knots.push_back(bp);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Walk the segments until the derivative turns nonnegative; the minimizer is
  // then the stationary point of that segment's quadratic.
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k];
    const double hi = knots[k + 1];
    const double mid = 0.5 * (lo + hi);
    double curv = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] - mid * dir[i] > 0.0) {
        curv += dir[i] * dir[i];
        lin += r[i] * dir[i];
      }
    }
    // phi'(g) = 2 (curv g - lin) on this segment.
    if (curv * hi - lin >= 0.0) return curv > 0.0 ? std::clamp(lin / curv, lo, hi) : lo;
  }
  return gmax;
}

Selection enumerate_lyapopt(std::span<const double> q, const SchedulingSet& set) {
  const auto& pts = set.points();
  std::size_t best = 0;
  double best_cost = lookahead_cost(q, pts[0]);
  bool tie = false;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double c = lookahead_cost(q, pts[k]);
    if (c < best_cost) {
      best_cost = c;
      best = k;
      tie = false;
    } else if (c == best_cost && !same_residual(q, pts[best], pts[k])) {
      tie = true;
    }
  }
  return {pts[best], best, tie, 0, 0.0};
}

Selection frank_wolfe_lyapopt(std::span<const double> q, const SchedulingSet& set, const PolicySpec& opts) {
  const auto& verts = set.points();
  const std::size_t n = set.dim();
  const std::size_t m = verts.size();

  Selection start = enumerate_lyapopt(q, set);
  if (m == 1 || lookahead_cost(q, start.schedule) == 0.0) {
    start.tie = false;
    return start;
  }

  Vec x = start.schedule;
  Vec weights(m, 0.0);
  weights[start.index] = 1.0;
  Vec r(n), grad(n), dir(n);
  double gap = 0.0;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = q[i] - x[i];
      grad[i] = -2.0 * std::max(r[i], 0.0);
    }
    const double gx = dot(grad, x);

    std::size_t fw = 0;
    double fw_score = dot(grad, verts[0]);
    std::size_t away = m;
    double away_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      const double s = dot(grad, verts[k]);
      if (s < fw_score) {
        fw_score = s;
        fw = k;
      }
      if (weights[k] > 0.0 && s > away_score) {
        away_score = s;
        away = k;
      }
    }
    gap = gx - fw_score;
    // g(x) - min g is at most the gap, and at most g(x) itself since g >= 0.
    const double gval = lookahead_cost(q, x);
    if (std::min(gap, gval) <= opts.tolerance * std::max(1.0, gval)) {
      return {x, kInteriorPoint, false, it - 1, gap};
    }

    const double away_gap = away_score - gx;
    const bool toward = gap >= away_gap || weights[away] >= 1.0;
    double gmax = 1.0;
    if (toward) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = verts[fw][i] - x[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) dir[i] = x[i] - verts[away][i];
      gmax = weights[away] / (1.0 - weights[away]);
    }
    const double gamma = exact_line_search(r, dir, gmax);
    if (gamma <= 0.0) {
      // A descent direction with no representable step: the gap is round-off.
      if (gap <= 1e-8 * std::max(1.0, std::abs(gx))) return {x, kInteriorPoint, false, it, gap};
      throw NumericError("LyapOpt Frank-Wolfe line search stalled", it, gap);
    }

    for (std::size_t i = 0; i < n; ++i) x[i] += gamma * dir[i];
    if (toward) {
      if (gamma >= 1.0) {
        std::fill(weights.begin(), weights.end(), 0.0);
        weights[fw] = 1.0;
        x = verts[fw];
      } else {
        for (auto& w : weights) w *= (1.0 - gamma);
        weights[fw] += gamma;
      }
    } else {
      for (auto& w : weights) w *= (1.0 + gamma);
      weights[away] = gamma >= gmax ? 0.0 : weights[away] - gamma;
    }
    for (auto& xi : x) xi = std::max(xi, 0.0);
  }
  throw NumericError("LyapOpt Frank-Wolfe did not converge", opts.max_iterations, gap);
}

class MaxWeightPolicy final : public Policy {
 public:
  explicit MaxWeightPolicy(const SchedulingSet& set) : set_(set) {}
  Vec decide(const DecisionContext& ctx) override {
    auto sel = maxweight_select(ctx.q, set_);
    ++stats_.decisions;
    if (sel.tie) ++stats_.ties;
    return std::move(sel.schedule);
  }
  const PolicyStats& stats() const override { return stats_; }
  std::string name() const override { return "maxweight"; }

 private:
  const SchedulingSet& set_;
  PolicyStats stats_;
};

class LyapOptPolicy final : public Policy {
 public:
  LyapOptPolicy(const SchedulingSet& set, PolicySpec spec) : set_(set), spec_(spec) {}
  Vec decide(const DecisionContext& ctx) override {
    auto sel = lyapopt_select(ctx.q, set_, spec_);
    ++stats_.decisions;
    if (sel.tie) ++stats_.ties;
    stats_.max_iterations_used = std::max(stats_.max_iterations_used, sel.iterations);
    return std::move(sel.schedule);
  }
  const PolicyStats& stats() const override { return stats_; }
  std::string name() const override { return "lyapopt"; }

 private:
  const SchedulingSet& set_;
  PolicySpec spec_;
  PolicyStats stats_;
};

class RandomVertexPolicy final : public Policy {
 public:
  RandomVertexPolicy(const SchedulingSet& set, std::uint64_t seed) : set_(set), rng_(make_stream(seed, 0, kPolicySalt)) {}
  Vec decide(const DecisionContext&) override {
    ++stats_.decisions;
    const auto k = uniform_int(rng_, 0, static_cast<std::int64_t>(set_.size()) - 1);
    return set_.points()[static_cast<std::size_t>(k)];
  }
  const PolicyStats& stats() const override { return stats_; }
  std::string name() const override { return "random_vertex"; }

 private:
  const SchedulingSet& set_;
  Rng rng_;
  PolicyStats stats_;
};

class FixedPolicy final : public Policy {
 public:
  FixedPolicy(const SchedulingSet& set, std::size_t index) : schedule_(set.points().at(index)) {}
  Vec decide(const DecisionContext&) override {
    ++stats_.decisions;
    return schedule_;
  }
  const PolicyStats& stats() const override { return stats_; }
  std::string name() const override { return "fixed"; }

 private:
  Vec schedule_;
  PolicyStats stats_;
};

}  // namespace

void PolicySpec::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("policy tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("policy max_iterations must be >= 1");
}

std::string policy_name(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicySpec::Kind::MaxWeight:
      return "maxweight";
    case PolicySpec::Kind::LyapOpt:
      return "lyapopt";
    case PolicySpec::Kind::RandomVertex:
      return "random_vertex";
    case PolicySpec::Kind::FixedSchedule:
      return "fixed";
  }
  return "unknown";
}

Selection maxweight_select(std::span<const double> q, const SchedulingSet& set) {
  check_dims(q, set);
  const auto& pts = set.points();
  std::size_t best = 0;
  double best_score = dot(q, pts[0]);
  bool tie = false;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double s = dot(q, pts[k]);
    if (s > best_score) {
      best_score = s;
      best = k;
      tie = false;
    } else if (s == best_score && !same_residual(q, pts[best], pts[k])) {
      tie = true;
    }
  }
  return {pts[best], best, tie, 0, 0.0};
}

double lookahead_cost(std::span<const double> q, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double r = q[i] - d[i];
    if (r > 0.0) s += r * r;
  }
  return s;
}

Selection lyapopt_select(std::span<const double> q, const SchedulingSet& set, const PolicySpec& opts) {
  check_dims(q, set);
  opts.validate();
  if (set.kind() == SetKind::Finite) return enumerate_lyapopt(q, set);
  return frank_wolfe_lyapopt(q, set, opts);
}

DriftTerms drift_terms(std::span<const double> q, std::span<const double> d, std::span<const double> lambda) {
  if (q.size() != d.size() || q.size() != lambda.size()) throw ConfigError("drift_terms dimension mismatch");
  DriftTerms out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.first_order += 2.0 * q[i] * (lambda[i] - d[i]);
    out.second_order += d[i] * d[i] - lambda[i] * lambda[i];
  }
  out.f_value = out.first_order + out.second_order;
  return out;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const SchedulingSet& set, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case PolicySpec::Kind::MaxWeight:
      return std::make_unique<MaxWeightPolicy>(set);
    case PolicySpec::Kind::LyapOpt:
      return std::make_unique<LyapOptPolicy>(set, spec);
    case PolicySpec::Kind::RandomVertex:
      return std::make_unique<RandomVertexPolicy>(set, seed);
    case PolicySpec::Kind::FixedSchedule:
      if (spec.fixed_index >= set.size()) throw ConfigError("fixed schedule index out of range");
      return std::make_unique<FixedPolicy>(set, spec.fixed_index);
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace spn
