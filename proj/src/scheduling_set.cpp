#include "spnsched/scheduling_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "spnsched/errors.hpp"
#include "spnsched/lp.hpp"

namespace spn {

SchedulingSet::SchedulingSet(SetKind kind, std::vector<Vec> points)
    : kind_(kind), points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("scheduling set must have at least one element");
  dim_ = points_.front().size();
  if (dim_ == 0) throw ConfigError("scheduling set elements must have dimension >= 1");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw ConfigError("scheduling set elements have differing dimensions");
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("scheduling set entries must be finite and nonnegative");
      }
    }
  }
  if (kind_ == SetKind::Finite) {
    std::set<Vec> seen(points_.begin(), points_.end());
    if (seen.size() != points_.size()) throw ConfigError("finite scheduling set has duplicate elements");
  }
}

SchedulingSet SchedulingSet::finite(std::vector<Vec> elements) {
  return SchedulingSet(SetKind::Finite, std::move(elements));
}

SchedulingSet SchedulingSet::polytope(std::vector<Vec> vertices) {
  return SchedulingSet(SetKind::Polytope, std::move(vertices));
}

double max_total_departure(const SchedulingSet& set) {
  double best = 0.0;
  for (const auto& d : set.points()) {
    double s = 0.0;
    for (double v : d) s += v;
    best = std::max(best, s);
  }
  return best;
}

double capacity_param(const SchedulingSet& set) {
  double best = 0.0;
  for (const auto& d : set.points()) {
    double s = 0.0;
    for (double v : d) s += v * v;
    best = std::max(best, s / static_cast<double>(set.dim()));
  }
  return std::sqrt(best);
}

double CapacityRegion::margin(std::span<const double> gamma) const {
  const std::size_t n = set_.dim();
  if (gamma.size() != n) throw ConfigError("rate vector dimension does not match scheduling set");
  const auto& pts = set_.points();
  const std::size_t k = pts.size();

  // Quick accept: a single point already dominates gamma.
  double direct = -std::numeric_limits<double>::infinity();
  for (const auto& d : pts) {
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) slack = std::min(slack, d[i] - gamma[i]);
    direct = std::max(direct, slack);
  }
  if (k == 1) return direct;

  // Variables: w_1..w_k, s+, s-.  maximize s+ - s-
  //   -sum_k w_k d_{k,i} + s+ - s- <= -gamma_i
  //    sum_k w_k <= 1,  -sum_k w_k <= -1
  lp::Matrix A(n + 2, Vec(k + 2, 0.0));
  Vec b(n + 2, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) A[i][j] = -pts[j][i];
    A[i][k] = 1.0;
    A[i][k + 1] = -1.0;
    b[i] = -gamma[i];
  }
  for (std::size_t j = 0; j < k; ++j) {
    A[n][j] = 1.0;
    A[n + 1][j] = -1.0;
  }
  b[n] = 1.0;
  b[n + 1] = -1.0;
  Vec c(k + 2, 0.0);
  c[k] = 1.0;
  c[k + 1] = -1.0;

  const auto res = lp::maximize(A, b, c);
  if (res.status != lp::Status::Optimal) {
    throw NumericError("capacity-region LP did not reach an optimum", res.iterations, 0.0);
  }
  return std::max(res.value, direct);
}

bool CapacityRegion::contains(std::span<const double> gamma, double tol) const {
  for (double g : gamma) {
    if (g < -tol) return false;
  }
  return margin(gamma) >= -tol;
}

Vec boundary_point(const CapacityRegion& region, std::span<const double> direction) {
  const auto& set = region.generating_set();
  const std::size_t n = set.dim();
  if (direction.size() != n) throw ConfigError("direction dimension does not match scheduling set");

  Vec upper(n, 0.0);
  for (const auto& d : set.points()) {
    for (std::size_t i = 0; i < n; ++i) upper[i] = std::max(upper[i], d[i]);
  }
  double hi = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (direction[i] < 0.0) throw ConfigError("boundary direction must be nonnegative");
    if (direction[i] > 0.0) {
      any = true;
      hi = std::min(hi, upper[i] / direction[i]);
    }
  }
  if (!any) throw ConfigError("boundary direction must be nonzero");

  Vec point(n);
  auto scaled = [&](double theta) {
    for (std::size_t i = 0; i < n; ++i) point[i] = theta * direction[i];
    return std::span<const double>(point);
  };
  if (region.margin(scaled(hi)) >= 0.0) return point;

  double lo = 0.0;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (region.margin(scaled(mid)) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  scaled(lo);
  return point;
}

Vec boundary_sample(const CapacityRegion& region, Rng& rng) {
  const std::size_t n = region.generating_set().dim();
  Vec u(n);
  for (;;) {
    double norm = 0.0;
    for (auto& x : u) {
      x = std::abs(standard_normal(rng));
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& x : u) x /= norm;
      return boundary_point(region, u);
    }
  }
}

SchedulingSet sample_integer_set(std::size_t n, std::size_t count, int lo, int hi, Rng& rng) {
  if (n == 0 || count == 0 || lo > hi) throw ConfigError("invalid integer set sampling parameters");
  const double distinct = std::pow(static_cast<double>(hi - lo + 1), static_cast<double>(n));
  if (distinct < static_cast<double>(count)) throw ConfigError("not enough distinct integer vectors");
  std::set<Vec> seen;
  std::vector<Vec> out;
  out.reserve(count);
  while (out.size() < count) {
    Vec v(n);
    for (auto& x : v) x = static_cast<double>(uniform_int(rng, lo, hi));
    if (seen.insert(v).second) out.push_back(std::move(v));
  }
  return SchedulingSet::finite(std::move(out));
}

}  // namespace spn
