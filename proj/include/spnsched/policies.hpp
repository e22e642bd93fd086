#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>

#include "spnsched/rng.hpp"
#include "spnsched/scheduling_set.hpp"

namespace spn {

struct PolicySpec {
  enum class Kind { MaxWeight, LyapOpt, RandomVertex, FixedSchedule };
  Kind kind = Kind::LyapOpt;
  std::size_t fixed_index = 0;
  // Frank-Wolfe options for LyapOpt over polytopes.
  int max_iterations = 10000;
  double tolerance = 1e-10;

  static PolicySpec maxweight() { return {Kind::MaxWeight}; }
  static PolicySpec lyapopt() { return {Kind::LyapOpt}; }
  static PolicySpec random_vertex() { return {Kind::RandomVertex}; }
  static PolicySpec fixed(std::size_t index) { return {Kind::FixedSchedule, index}; }

  /// Throws ConfigError when tolerance <= 0 or max_iterations < 1.
  void validate() const;
};

std::string policy_name(const PolicySpec& spec);

inline constexpr std::size_t kInteriorPoint = std::numeric_limits<std::size_t>::max();

struct Selection {
  Vec schedule;
  std::size_t index = kInteriorPoint;  // element/vertex index, or kInteriorPoint
  bool tie = false;                    // an exact tie changed nothing but the index choice
  int iterations = 0;                  // Frank-Wolfe iterations (0 for enumeration)
  double gap = 0.0;                    // final Frank-Wolfe gap
};

/// Argmax of <q, d> over elements/vertices, lowest index on ties. A tie is
/// flagged only when two maximizers leave different residuals max{q - d, 0},
/// i.e. when the tie-break can change the trajectory.
Selection maxweight_select(std::span<const double> q, const SchedulingSet& set);

/// g(d) = sum_i max{q_i - d_i, 0}^2, the one-step quadratic lookahead.
double lookahead_cost(std::span<const double> q, std::span<const double> d);

/// Minimizes g over the set: enumeration for finite sets, away-step Frank-Wolfe
/// with exact piecewise-quadratic line search for polytopes. Throws
/// NumericError if the certified suboptimality min(gap, g) is still above
/// tolerance * max(1, g) after max_iterations.
Selection lyapopt_select(std::span<const double> q, const SchedulingSet& set, const PolicySpec& opts = {});

struct DriftTerms {
  double first_order = 0.0;   // 2 sum_i q_i (lambda_i - d_i)
  double second_order = 0.0;  // sum_i (d_i^2 - lambda_i^2)
  double f_value = 0.0;       // first + second
};

/// `lambda` is the mean of the arrivals added in the previous slot.
DriftTerms drift_terms(std::span<const double> q, std::span<const double> d, std::span<const double> lambda);

struct PolicyStats {
  std::uint64_t decisions = 0;
  std::uint64_t ties = 0;
  int max_iterations_used = 0;
};

/// What a policy sees at slot t. `prev_rate` is lambda(t-1) (empty at t = 0).
struct DecisionContext {
  std::size_t t = 0;
  std::span<const double> q;
  std::span<const double> prev_rate;
};

/// A scheduling rule bound to one scheduling set. Custom (including
/// history-dependent or randomized) rules can derive from this.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Vec decide(const DecisionContext& ctx) = 0;
  virtual const PolicyStats& stats() const = 0;
  virtual std::string name() const = 0;
};

/// Built-in policy for `spec`. `seed` feeds RandomVertex only.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const SchedulingSet& set, std::uint64_t seed = 0);

}  // namespace spn
