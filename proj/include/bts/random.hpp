#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bts {

/// The explicit random stream threaded through every stochastic routine.
/// Nothing in the library touches global randomness.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// Child stream for an independent consumer (a replication, an ensemble
/// member). Derived from the parent's next outputs so that the child is a
/// deterministic function of the parent's state.
inline Rng spawn_rng(Rng &parent) {
  std::seed_seq seq{parent(), parent(), parent(), parent()};
  return Rng{seq};
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unit-rate exponential. Strictly positive.
inline double exponential1(Rng &rng) { return -std::log1p(-uniform01(rng)); }

/// Uniform integer on [0, n).
inline std::size_t uniform_index(std::size_t n, Rng &rng) {
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

inline bool bernoulli(double p, Rng &rng) { return uniform01(rng) < p; }

/// Beta(a, b) through the gamma-ratio construction.
inline double sample_beta(double a, double b, Rng &rng) {
  const double x = std::gamma_distribution<double>{a, 1.0}(rng);
  const double y = std::gamma_distribution<double>{b, 1.0}(rng);
  return x / (x + y);
}

}  // namespace bts
