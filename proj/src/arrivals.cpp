#include "spnsched/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spnsched/errors.hpp"

namespace spn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_nonnegative(const Vec& v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be finite and >= 0");
  }
}

QueueLaw scaled_bernoulli_law(double lambda, double variance) {
  QueueLaw law;
  if (lambda == 0.0) return law;
  law.kind = QueueLaw::Kind::ScaledBernoulli;
  law.lambda = lambda;
  law.K = variance / (lambda * lambda) + 1.0;
  return law;
}

}  // namespace

double QueueLaw::mean() const noexcept {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Binomial:
      return static_cast<double>(trials) * p;
    case Kind::ScaledBernoulli:
      return lambda;
  }
  return 0.0;
}

double QueueLaw::variance() const noexcept {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Binomial:
      return static_cast<double>(trials) * p * (1.0 - p);
    case Kind::ScaledBernoulli:
      return (K - 1.0) * lambda * lambda;
  }
  return 0.0;
}

ArrivalSpec::ArrivalSpec(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [&](const Deterministic& d) {
                   if (d.rows.empty()) throw ConfigError("deterministic arrivals need at least one row");
                   dim_ = d.rows.front().size();
                   for (const auto& r : d.rows) {
                     if (r.size() != dim_) throw ConfigError("deterministic arrival rows differ in length");
                     require_nonnegative(r, "arrivals");
                   }
                   if (d.slot0) {
                     if (d.slot0->size() != dim_) throw ConfigError("slot-0 override has wrong dimension");
                     require_nonnegative(*d.slot0, "slot-0 arrivals");
                   }
                 },
                 [&](const DependentBinary& d) {
                   dim_ = d.lambda.size();
                   require_nonnegative(d.lambda, "lambda");
                   if (!(d.K > 1.0)) throw ConfigError("dependent_binary requires K > 1");
                 },
                 [&](const IndependentBinary& d) {
                   dim_ = d.lambda.size();
                   require_nonnegative(d.lambda, "lambda");
                   if (!(d.K > 1.0)) throw ConfigError("independent_binary requires K > 1");
                 },
                 [&](const PerQueueLaws& d) {
                   dim_ = d.laws.size();
                   for (const auto& law : d.laws) {
                     if (law.kind == QueueLaw::Kind::Binomial && (law.trials < 1 || law.p < 0.0 || law.p > 1.0)) {
                       throw ConfigError("invalid binomial law");
                     }
                     if (law.kind == QueueLaw::Kind::ScaledBernoulli && !(law.K >= 1.0)) {
                       throw ConfigError("invalid scaled Bernoulli law");
                     }
                   }
                 },
             },
             v_);
  if (dim_ == 0) throw ConfigError("arrival spec must have dimension >= 1");
}

std::optional<std::size_t> ArrivalSpec::horizon_limit() const noexcept {
  if (const auto* d = std::get_if<Deterministic>(&v_); d && d->rows.size() > 1) return d->rows.size();
  return std::nullopt;
}

Vec ArrivalSpec::mean(std::size_t t) const {
  return std::visit(Overloaded{
                        [&](const Deterministic& d) -> Vec {
                          if (t == 0 && d.slot0) return *d.slot0;
                          if (d.rows.size() == 1) return d.rows.front();
                          if (t >= d.rows.size()) throw ConfigError("deterministic arrival sequence too short");
                          return d.rows[t];
                        },
                        [](const DependentBinary& d) -> Vec { return d.lambda; },
                        [](const IndependentBinary& d) -> Vec { return d.lambda; },
                        [](const PerQueueLaws& d) -> Vec {
                          Vec m;
                          m.reserve(d.laws.size());
                          for (const auto& law : d.laws) m.push_back(law.mean());
                          return m;
                        },
                    },
                    v_);
}

Vec ArrivalSpec::variance(std::size_t /*t*/) const {
  return std::visit(Overloaded{
                        [&](const Deterministic&) { return Vec(dim_, 0.0); },
                        [](const DependentBinary& d) {
                          Vec v;
                          for (double l : d.lambda) v.push_back((d.K - 1.0) * l * l);
                          return v;
                        },
                        [](const IndependentBinary& d) {
                          Vec v;
                          for (double l : d.lambda) v.push_back((d.K - 1.0) * l * l);
                          return v;
                        },
                        [](const PerQueueLaws& d) {
                          Vec v;
                          for (const auto& law : d.laws) v.push_back(law.variance());
                          return v;
                        },
                    },
                    v_);
}

double ArrivalSpec::variance_param(std::size_t t) const {
  double s = 0.0;
  for (double v : variance(t)) s += v;
  return std::sqrt(s / static_cast<double>(dim_));
}

std::vector<Vec> ArrivalSpec::distinct_means() const {
  if (const auto* d = std::get_if<Deterministic>(&v_)) {
    std::set<Vec> seen(d->rows.begin(), d->rows.end());
    if (d->slot0) seen.insert(*d->slot0);
    return {seen.begin(), seen.end()};
  }
  return {mean(0)};
}

void ArrivalSpec::sample(std::size_t t, Rng& rng, std::span<double> out) const {
  if (out.size() != dim_) throw ConfigError("arrival output buffer has wrong dimension");
  std::visit(Overloaded{
                 [&](const Deterministic& d) {
                   const Vec* row = nullptr;
                   if (t == 0 && d.slot0) {
                     row = &*d.slot0;
                   } else if (d.rows.size() == 1) {
                     row = &d.rows.front();
                   } else {
                     if (t >= d.rows.size()) throw ConfigError("deterministic arrival sequence too short");
                     row = &d.rows[t];
                   }
                   std::copy(row->begin(), row->end(), out.begin());
                 },
                 [&](const DependentBinary& d) {
                   const bool up = bernoulli(rng, 1.0 / d.K);
                   for (std::size_t i = 0; i < dim_; ++i) out[i] = up ? d.K * d.lambda[i] : 0.0;
                 },
                 [&](const IndependentBinary& d) {
                   for (std::size_t i = 0; i < dim_; ++i) {
                     out[i] = bernoulli(rng, 1.0 / d.K) ? d.K * d.lambda[i] : 0.0;
                   }
                 },
                 [&](const PerQueueLaws& d) {
                   for (std::size_t i = 0; i < dim_; ++i) {
                     const auto& law = d.laws[i];
                     switch (law.kind) {
                       case QueueLaw::Kind::Zero:
                         out[i] = 0.0;
                         break;
                       case QueueLaw::Kind::Binomial:
                         out[i] = static_cast<double>(binomial(rng, law.trials, law.p));
                         break;
                       case QueueLaw::Kind::ScaledBernoulli:
                         out[i] = bernoulli(rng, 1.0 / law.K) ? law.K * law.lambda : 0.0;
                         break;
                     }
                   }
                 },
             },
             v_);
}

Vec ArrivalSpec::sample(std::size_t t, Rng& rng) const {
  Vec out(dim_);
  sample(t, rng, out);
  return out;
}

ArrivalSpec constant_arrivals(Vec rate) { return ArrivalSpec(Deterministic{{std::move(rate)}, std::nullopt}); }

ArrivalSpec build_binomial_spec(const Vec& lambda, double target_variance, std::vector<std::string>* warnings) {
  if (!(target_variance > 0.0)) throw ConfigError("binomial target variance must be > 0");
  require_nonnegative(lambda, "lambda");
  PerQueueLaws spec;
  spec.origin = PerQueueLaws::Origin::Binomial;
  spec.target_variance = target_variance;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    if (l == 0.0) {
      if (warnings) warnings->push_back("queue " + std::to_string(i) + " has zero rate; using the zero process");
      spec.laws.emplace_back();
      continue;
    }
    if (l > target_variance) {
      // Var = m p (1 - p) = l (1 - l/m) = v  gives  m = l^2 / (l - v).
      QueueLaw law;
      law.kind = QueueLaw::Kind::Binomial;
      law.lambda = l;
      const double ideal = l * l / (l - target_variance);
      law.trials = std::max<std::int64_t>(std::llround(ideal), static_cast<std::int64_t>(std::ceil(l)));
      law.p = l / static_cast<double>(law.trials);
      spec.laws.push_back(law);
    } else {
      spec.laws.push_back(scaled_bernoulli_law(l, target_variance));
    }
  }
  return ArrivalSpec(std::move(spec));
}

ArrivalSpec build_scaled_bernoulli_spec(const Vec& lambda, const Vec& variance) {
  if (lambda.size() != variance.size()) throw ConfigError("lambda and variance lengths differ");
  require_nonnegative(lambda, "lambda");
  require_nonnegative(variance, "variance");
  PerQueueLaws spec;
  spec.origin = PerQueueLaws::Origin::ScaledBernoulli;
  spec.variance = variance;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] == 0.0 && variance[i] > 0.0) {
      throw ConfigError("a zero-mean nonnegative arrival cannot have positive variance");
    }
    spec.laws.push_back(variance[i] == 0.0 && lambda[i] > 0.0
                            ? QueueLaw{QueueLaw::Kind::ScaledBernoulli, 0, 0.0, 1.0, lambda[i]}
                            : scaled_bernoulli_law(lambda[i], variance[i]));
  }
  return ArrivalSpec(std::move(spec));
}

namespace {

Instance simplex_instance(std::size_t n, double B, double C, bool dependent) {
  if (n == 0) throw ConfigError("n must be >= 1");
  if (!(B > 0.0)) throw ConfigError("B must be > 0");
  if (!(C >= 0.0)) throw ConfigError("C must be >= 0");
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<Vec> vertices(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) vertices[i][i] = root_n * B;
  Vec lambda(n, B / root_n);
  auto set = SchedulingSet::polytope(std::move(vertices));
  if (C == 0.0) return {constant_arrivals(std::move(lambda)), std::move(set)};
  const double K = static_cast<double>(n) * C * C / (B * B) + 1.0;
  if (dependent) return {ArrivalSpec(DependentBinary{std::move(lambda), K}), std::move(set)};
  return {ArrivalSpec(IndependentBinary{std::move(lambda), K}), std::move(set)};
}

}  // namespace

Instance build_thm1_instance(std::size_t n, double B, double C) { return simplex_instance(n, B, C, true); }

Instance build_thm2_instance(std::size_t n, double B, double C) { return simplex_instance(n, B, C, false); }

Instance build_thm5_instance(double B, double epsilon) {
  if (!(B >= 3.0 * std::sqrt(2.0))) throw ConfigError("thm5 instance requires B >= 3*sqrt(2)");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  const double b = std::sqrt(2.0) * B;
  const Vec rate{1.0, (b - 1.0) / b};
  Deterministic det{{rate}, std::nullopt};
  if (epsilon > 0.0) det.slot0 = Vec{1.0, (b - 1.0) / b - epsilon};
  return {ArrivalSpec(std::move(det)), SchedulingSet::polytope({{b, 0.0}, {0.0, 1.0}})};
}

Instance build_gap_instance(double B, double C, double epsilon) {
  if (!(C >= 0.0)) throw ConfigError("C must be >= 0");
  auto inst = build_thm5_instance(B, epsilon);
  if (C == 0.0) return inst;
  if (epsilon > 0.0) throw ConfigError("epsilon override applies only to the deterministic gap instance");
  const double b = std::sqrt(2.0) * B;
  return {build_scaled_bernoulli_spec({1.0, (b - 1.0) / b}, {C * C, C * C}), std::move(inst.set)};
}

}  // namespace spn
