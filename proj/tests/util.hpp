#pragma once

#include <cstdint>

#include "triloop/circuit.hpp"

/// Deterministic random inputs shared by the test suites.
namespace testutil {

inline constexpr double pi = triloop::two_pi / 2.0;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

inline double angle(std::uint64_t& state) {
  return triloop::two_pi * uniform01(state) - pi;
}

inline int pick3(std::uint64_t& state) {
  return static_cast<int>(splitmix64(state) % 3) - 1;
}

inline triloop::FluxConfig rand_flux(std::uint64_t& state) {
  return {uniform01(state) - 0.5, uniform01(state) - 0.5, uniform01(state) - 0.5};
}

inline triloop::WindingNumbers rand_windings(std::uint64_t& state) {
  return {pick3(state), pick3(state), pick3(state), pick3(state), pick3(state)};
}

/// The trijunction constraint is honored by construction (phip1 derived).
inline triloop::PhaseState rand_state(std::uint64_t& state, int n_prime) {
  return triloop::make_state(angle(state), angle(state), angle(state),
                             angle(state), angle(state), n_prime);
}

}  // namespace testutil
