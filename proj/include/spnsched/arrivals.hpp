#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spnsched/rng.hpp"
#include "spnsched/scheduling_set.hpp"

namespace spn {

/// Adversarial arrivals as a fixed sequence. One row means the same vector
/// every slot; otherwise row t is used at slot t. `slot0` replaces slot 0.
struct Deterministic {
  std::vector<Vec> rows;
  std::optional<Vec> slot0;
};

/// One shared coin: A = K lambda with probability 1/K, else 0.
struct DependentBinary {
  Vec lambda;
  double K = 2.0;
};

/// One coin per queue, same law per queue as DependentBinary.
struct IndependentBinary {
  Vec lambda;
  double K = 2.0;
};

/// Marginal law of a single queue in a PerQueueLaws spec.
struct QueueLaw {
  enum class Kind { Zero, Binomial, ScaledBernoulli };
  Kind kind = Kind::Zero;
  std::int64_t trials = 0;  // Binomial
  double p = 0.0;           // Binomial
  double K = 1.0;           // ScaledBernoulli: value K*lambda w.p. 1/K
  double lambda = 0.0;

  double mean() const noexcept;
  double variance() const noexcept;
};

/// Independent queues, each with its own law.
struct PerQueueLaws {
  enum class Origin { Binomial, ScaledBernoulli };
  Origin origin = Origin::Binomial;
  double target_variance = 1.0;  // Binomial origin
  Vec variance;                  // ScaledBernoulli origin
  std::vector<QueueLaw> laws;
};

class ArrivalSpec {
 public:
  using Variant = std::variant<Deterministic, DependentBinary, IndependentBinary, PerQueueLaws>;

  /// Validates dimensions, nonnegativity and K > 1.
  explicit ArrivalSpec(Variant v);

  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }
  bool is_random() const noexcept { return !std::holds_alternative<Deterministic>(v_); }

  /// Number of slots a per-slot deterministic sequence covers; nullopt when unbounded.
  std::optional<std::size_t> horizon_limit() const noexcept;

  Vec mean(std::size_t t) const;
  Vec variance(std::size_t t) const;
  /// C = sqrt((1/n) sum_i Var(A_i)).
  double variance_param(std::size_t t) const;

  /// Every distinct mean vector the spec can produce (for capacity checks).
  std::vector<Vec> distinct_means() const;

  void sample(std::size_t t, Rng& rng, std::span<double> out) const;
  Vec sample(std::size_t t, Rng& rng) const;

 private:
  Variant v_;
  std::size_t dim_ = 0;
};

ArrivalSpec constant_arrivals(Vec rate);

/// Per-queue Binomial(m_i, lambda_i/m_i) with variance close to `target_variance`;
/// queues with lambda_i <= target_variance fall back to a scaled Bernoulli with
/// that variance exactly, and lambda_i = 0 gives the zero process.
ArrivalSpec build_binomial_spec(const Vec& lambda, double target_variance = 1.0,
                                std::vector<std::string>* warnings = nullptr);

/// Independent scaled Bernoulli per queue: A_i = K_i lambda_i w.p. 1/K_i with
/// K_i = v_i / lambda_i^2 + 1, so the mean is lambda_i and the variance v_i.
ArrivalSpec build_scaled_bernoulli_spec(const Vec& lambda, const Vec& variance);

struct Instance {
  ArrivalSpec arrivals;
  SchedulingSet set;
};

/// Simplex {x >= 0 : sum x = sqrt(n) B} with dependent binary arrivals at the
/// centre, K = n C^2 / B^2 + 1; deterministic when C = 0.
Instance build_thm1_instance(std::size_t n, double B, double C);

/// Same as build_thm1_instance with independent coins per queue.
Instance build_thm2_instance(std::size_t n, double B, double C);

/// Two-queue segment conv{(b,0),(0,1)}, b = sqrt(2) B, deterministic arrivals
/// (1, (b-1)/b) with slot 0 lowered by `epsilon`. Requires B >= 3 sqrt(2).
Instance build_thm5_instance(double B, double epsilon = 0.0);

/// The Thm-5 geometry with independent scaled Bernoulli arrivals of per-queue
/// variance C^2 around the same mean; reduces to build_thm5_instance at C = 0.
Instance build_gap_instance(double B, double C, double epsilon = 0.0);

}  // namespace spn
