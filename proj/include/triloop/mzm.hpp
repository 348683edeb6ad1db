#pragma once

#include <array>
#include <string>
#include <vector>

#include "triloop/groundstate.hpp"

/// Majorana tunneling Hamiltonian at the trijunction, its spectrum and
/// ground-state covariance, MZM branch currents, and the adiabatic braid
/// runner that tracks the two lowest modes along a flux schedule.
namespace triloop {

using Mat6 = std::array<std::array<double, 6>, 6>;

/// H = (i/2) sum_{j<k} A_jk g_j g_k over the Majorana order
/// (g1, g2, g3, g'1, g'2, g'3); A carries the full E_M (no symmetrization
/// factor).  Nonzero entries: A[g'1,g'2] = E_M cos(phi'3/2) and cyclic,
/// A[g_i, g'_i] = alpha; antisymmetric by construction.
struct MajoranaCoupling {
  Mat6 A{};
};

/// Canonical decomposition of an antisymmetric coupling.  `modes` is the
/// orthogonal W with W^T A W = blkdiag([[0, -eps_k], [eps_k, 0]]); the
/// covariance M_jk = i<[g_j, g_k]>/2 is taken in the ground state (vacuum of
/// all negative-energy Bogoliubov modes).
struct MajoranaSpectrum {
  std::array<double, 3> energies{};  ///< 0 <= eps1 <= eps2 <= eps3
  Mat6 modes{};
  Mat6 covariance{};
};

/// One record of an adiabatic braid run.
struct BraidStep {
  FluxConfig f;
  MinimizeResult min;
  CurrentReport cur;
  MajoranaSpectrum spec;
  std::array<double, 3> w_a{};  ///< tracked mode a, unit-norm weight on (g1,g2,g3)
  std::array<double, 3> w_b{};  ///< tracked mode b, unit-norm weight on (g1,g2,g3)
};

/// Full trace plus the 2x2 overlap between step-0 and final tracked modes
/// (orthogonal within 1e-6 at sufficient step density).  min_step_overlap is
/// the worst successive-step overlap magnitude after matching; values near 1
/// certify the adiabatic continuation.
struct BraidTrace {
  std::vector<BraidStep> steps;
  std::array<std::array<double, 2>, 2> overlap{};
  double min_step_overlap = 1.0;
};

/// Raised by run_braid when maximal-overlap matching cannot decide between
/// the two candidate assignments.
struct TrackingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Eq.-(19) coupling matrix for the trijunction phases of `s`.
[[nodiscard]] MajoranaCoupling build_coupling(const PhaseState& s, double E_M,
                                              double alpha);

/// Energies, canonical mode matrix, and ground-state covariance.  The +-pair
/// symmetry of the iA spectrum is verified to 1e-12.
[[nodiscard]] MajoranaSpectrum diagonalize(const MajoranaCoupling& c);

/// Eq.-(20) branch currents I_i = -(2 pi E_M / Phi_0) <i g'_{i+1} g'_{i+2}>
/// sin(phi'_i / 2), reported in units E_M 2pi/Phi_0 (the E_M prefactor is the
/// unit; expectations are read from spec.covariance).  Requires E_M >= 0.
[[nodiscard]] std::array<double, 3> mzm_currents(const PhaseState& s,
                                                 const MajoranaSpectrum& spec,
                                                 double E_M);

/// Piecewise-linear flux cycle through `legs` waypoints of the pattern
/// (0.42,0,0) -> (0,0,0.42) -> (0,0.42,0) -> (0.42,0,0) -> ... with
/// steps_per_leg points per moving leg plus the initial static point, so the
/// schedule has (legs-1)*steps_per_leg + 1 entries.  legs >= 2 and
/// steps_per_leg >= 20 required (coarser ramps make tracking unreliable).
[[nodiscard]] std::vector<FluxConfig> braid_schedule(int legs, int steps_per_leg);

/// Warm-started ground-state continuation along `schedule`; at each step the
/// trijunction coupling is rebuilt and the two lowest modes are tracked by
/// maximal-overlap matching with sign continuity.  Throws TrackingError when
/// the two candidate matchings agree within 1e-3, MinimizeError when a step
/// fails to converge.  Requires p.alpha > 0 and p.E_M > 0.
[[nodiscard]] BraidTrace run_braid(Design d, const CircuitParams& p,
                                   const std::vector<FluxConfig>& schedule,
                                   const MinimizeOpts& opts = {});

/// Classifies a final overlap matrix: "identity" (diagonal magnitudes > 0.99,
/// off-diagonal < 0.1), "exchange" (the transpose pattern), else "mixed".
[[nodiscard]] std::string braid_verdict(
    const std::array<std::array<double, 2>, 2>& overlap);

}  // namespace triloop
