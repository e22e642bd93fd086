#include "spnsched/rng.hpp"

#include <cmath>
#include <numbers>

namespace spn {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t state = master;
  std::uint64_t a = splitmix64(state);
  state ^= index * 0xD1B54A32D192ED03ULL;
  std::uint64_t b = splitmix64(state);
  state ^= salt * 0x8CB92BA72F3D8DD7ULL;
  std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool bernoulli(Rng& rng, double p) noexcept { return uniform01(rng) < p; }

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
  std::uint64_t x = rng();
  while (limit != 0 && x >= limit) x = rng();
  return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
}

double standard_normal(Rng& rng) noexcept {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t binomial(Rng& rng, std::int64_t trials, double p) noexcept {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  if (p > 0.5) return trials - binomial(rng, trials, 1.0 - p);

  const double q = 1.0 - p;
  double pmf = std::pow(q, static_cast<double>(trials));
  if (pmf <= 0.0) {
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < trials; ++i) k += bernoulli(rng, p) ? 1 : 0;
    return k;
  }
  const double ratio = p / q;
  double u = uniform01(rng);
  std::int64_t k = 0;
  while (u >= pmf && k < trials) {
    u -= pmf;
    pmf *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    ++k;
  }
  return k;
}

}  // namespace spn
