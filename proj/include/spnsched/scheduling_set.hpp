#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spnsched/rng.hpp"

namespace spn {

using Vec = std::vector<double>;

enum class SetKind { Finite, Polytope };

/// A finite list of schedules, or the convex hull of a vertex list.
/// Immutable after construction.
class SchedulingSet {
 public:
  /// Throws ConfigError on empty input, ragged rows, negative entries, or
  /// duplicate elements in a finite set.
  static SchedulingSet finite(std::vector<Vec> elements);
  static SchedulingSet polytope(std::vector<Vec> vertices);

  std::size_t dim() const noexcept { return dim_; }
  SetKind kind() const noexcept { return kind_; }
  /// Elements (finite) or vertices (polytope).
  const std::vector<Vec>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  SchedulingSet(SetKind kind, std::vector<Vec> points);

  SetKind kind_;
  std::size_t dim_ = 0;
  std::vector<Vec> points_;
};

/// M = max over elements of sum_i d_i (attained at a vertex for polytopes).
double max_total_departure(const SchedulingSet& set);

/// Smallest B with (1/n) sum_i d_i^2 <= B^2 for every d in the set.
double capacity_param(const SchedulingSet& set);

/// Rates dominated componentwise by some point of conv(points).
class CapacityRegion {
 public:
  explicit CapacityRegion(SchedulingSet set) : set_(std::move(set)) {}

  const SchedulingSet& generating_set() const noexcept { return set_; }

  /// max over convex weights w of min_i (sum_k w_k d_k - gamma)_i, via LP.
  /// Nonnegative exactly when gamma is in the region.
  double margin(std::span<const double> gamma) const;

  bool contains(std::span<const double> gamma, double tol = 1e-9) const;

 private:
  SchedulingSet set_;
};

/// theta* u with theta* = max{theta : theta u in region}, found by bisection.
/// The returned point has nonnegative LP margin, so it lies inside the region
/// up to LP round-off. Requires a nonzero, nonnegative direction.
Vec boundary_point(const CapacityRegion& region, std::span<const double> direction);

/// boundary_point along a uniformly random direction in the positive orthant.
Vec boundary_sample(const CapacityRegion& region, Rng& rng);

/// `count` distinct vectors with integer entries in [lo, hi]; duplicates are redrawn.
SchedulingSet sample_integer_set(std::size_t n, std::size_t count, int lo, int hi, Rng& rng);

}  // namespace spn
