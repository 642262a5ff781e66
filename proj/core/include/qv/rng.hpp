#pragma once

#include <cmath>
#include <cstdint>

namespace qv::rng {

// Counter-based random numbers: every draw is a pure function of
// (key, stream, counter), so simulations replay bit-identically and
// replications can be evaluated in any order or in parallel.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stateless 64-bit hash of (key, stream, counter).
inline std::uint64_t mix(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = detail::splitmix64(key ^ 0x6a09e667f3bcc909ULL);
  h = detail::splitmix64(h ^ stream);
  h = detail::splitmix64(h ^ counter);
  return h;
}

/// Uniform double in (0,1); never returns 0 or 1 exactly.
inline double uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) {
  // 53 significant bits, shifted into the open interval
  const std::uint64_t bits = mix(key, stream, counter) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw indexed by (key, stream, counter) via Box-Muller.
inline double gaussian(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) {
  const double u1 = uniform(key, stream, 2 * counter);
  const double u2 = uniform(key, stream, 2 * counter + 1);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Derived key for replication `rep` of sweep level `level` under `master`.
inline std::uint64_t derive_key(std::uint64_t master, std::uint64_t level, std::uint64_t rep) {
  return mix(master, level, rep);
}

}  // namespace qv::rng
