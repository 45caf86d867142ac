#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ldpnb/errors.hpp"

namespace ldpnb {

// All randomness flows through an injected engine so simulations are
// reproducible. mt19937_64 output is fully specified by the standard; the
// samplers below avoid std::*_distribution, whose mappings are
// implementation-defined, so a seed produces identical streams on any
// conforming toolchain.
using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace detail

// Deterministically derives an independent child seed from (seed, lane).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t lane) {
  return detail::splitmix64(seed ^ (detail::splitmix64(lane + 1) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

// Uniform double in the open interval (0, 1), 53-bit resolution.
inline double uniform_double(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline bool sample_bernoulli(Rng& rng, double p) {
  return uniform_double(rng) < p;
}

// Uniform integer in [0, n). Multiply-shift map; bias is at most n / 2^64.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw InvalidInputError("uniform_index: n must be positive");
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Laplace(0, scale) via the inverse CDF of a single uniform draw.
inline double sample_laplace(Rng& rng, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidInputError("sample_laplace: scale must be positive and finite");
  }
  const double u = uniform_double(rng) - 0.5;
  return u < 0.0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
}

// N(0, 1) via Box-Muller; used by test data generators.
inline double sample_normal(Rng& rng) {
  const double u1 = uniform_double(rng);
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// In-place Fisher-Yates shuffle (std::shuffle is implementation-defined).
template <typename T>
void shuffle_vector(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace ldpnb
