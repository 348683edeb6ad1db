#pragma once

#include <array>
#include <cstdint>

/// Core value types for a three-Josephson-junction loop whose branches meet
/// in a central trijunction.  Everything downstream (potentials, minimizer,
/// Majorana sector) consumes these immutable structs, so they carry no
/// behaviour beyond derived-inductance sums and the trijunction constraint.
///
/// Unit conventions, used consistently across the library:
///   - energies in units of u = Phi0^2 / (2 L_s),
///   - currents in units of Phi0 / L_s,
///   - phases in radians, external fluxes reduced by Phi0.
namespace triloop {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Inductances and junction energies of one device instance.  Inductances are
/// stored per segment of the main loop (length l) and per branch (lengths l'
/// and l~); the effective combinations below are what the potentials use.
struct CircuitParams {
  double L_K = 0;    ///< kinetic inductance of one main-loop segment
  double L_s = 0;    ///< geometric inductance of one main-loop segment
  double Lp_K = 0;   ///< kinetic inductance of a side branch (length l')
  double Lp_s = 0;   ///< geometric inductance of a side branch
  double Lt_K = 0;   ///< kinetic inductance of the central branch (length l~)
  double Lt_s = 0;   ///< geometric inductance of the central branch
  double E_J = 0;    ///< loop-junction Josephson energy, units of u
  double E_Jp = 0;   ///< trijunction Josephson energy, units of u
  double E_M = 0;    ///< Majorana tunneling energy, units of u
  double alpha = 0;  ///< outer-to-trijunction Majorana coupling, units of u

  [[nodiscard]] double l_eff() const { return L_K + L_s; }
  [[nodiscard]] double lp_eff() const { return L_K + L_s + 9.0 * (Lp_K + Lp_s); }
  [[nodiscard]] double lt_eff() const {
    return L_K + L_s + 3.0 * (Lp_K + Lp_s) + 6.0 * (Lt_K + Lt_s);
  }
};

/// Calibrated default instance.  L_K/L_s = 1e-3 keeps the loop in the usual
/// flux-qubit regime; branch inductances give Lp_eff = Lt_eff = 20.001 L_s,
/// and the junction energies place the f1 = 0.42 design-B ground state at
/// phi_p/2pi = 0.124 with phi'_1/2pi = 0.246 (see groundstate::calibrate).
[[nodiscard]] CircuitParams default_params();

/// Validates field ranges and returns the params unchanged on success.
/// Throws std::invalid_argument naming the offending field; warns on stderr
/// (non-fatal) when L_K/L_s > 0.1, outside the regime the model targets.
CircuitParams validate_params(const CircuitParams& raw);

/// Reduced external fluxes f_i = Phi_ext,i / Phi0 threading the three loops.
struct FluxConfig {
  double f1 = 0, f2 = 0, f3 = 0;
};

/// Integer fluxoid sectors: m_i for the three small loops, n for the outer
/// loop, n' for the trijunction loop (phi'_1 + phi'_2 + phi'_3 = 2 pi n').
/// Design B has no independent outer loop, so its potential derives
/// n = m1 + m2 + m3 - n' internally and ignores the stored n.
struct WindingNumbers {
  int m1 = 0, m2 = 0, m3 = 0, n = 0, n_prime = 0;
};

/// The six junction phase differences.  phip1 is never free: construct via
/// make_state / checked_state so the trijunction constraint holds exactly.
struct PhaseState {
  double phi1 = 0, phi2 = 0, phi3 = 0;
  double phip1 = 0, phip2 = 0, phip3 = 0;
};

/// Builds a PhaseState with phip1 derived from the constraint.
[[nodiscard]] PhaseState make_state(double phi1, double phi2, double phi3,
                                    double phip2, double phip3, int n_prime);

/// Accepts six explicit phases; throws std::invalid_argument if the
/// trijunction constraint is violated by more than 1e-9 rad, then re-derives
/// phip1 so the stored state satisfies it exactly.
PhaseState checked_state(double phi1, double phi2, double phi3, double phip1,
                         double phip2, double phip3, int n_prime);

/// Symmetric/antisymmetric coordinates used by the minimizer:
///   phi2 = phi_p + phi_m,   phi3 = phi_p - phi_m,
///   phi'2 = phip_p + phip_m, phi'3 = phip_p - phip_m,
///   phi'1 = 2 pi n' - 2 phip_p.
/// Five degrees of freedom; the trijunction constraint is structural here.
struct ReducedCoords {
  double phi_p = 0, phi_m = 0, phip_p = 0, phip_m = 0, phi1 = 0;
};

/// Gradient/packing order for the 5-vector views of ReducedCoords.
[[nodiscard]] std::array<double, 5> pack(const ReducedCoords& rc);
[[nodiscard]] ReducedCoords unpack(const std::array<double, 5>& v);

/// Throws std::invalid_argument if the state violates the trijunction
/// constraint for w.n_prime by more than 1e-9 rad.
ReducedCoords to_reduced(const PhaseState& s, const WindingNumbers& w);
[[nodiscard]] PhaseState from_reduced(const ReducedCoords& rc, const WindingNumbers& w);

}  // namespace triloop
