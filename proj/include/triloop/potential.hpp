#pragma once

#include <array>
#include <string>

#include "triloop/circuit.hpp"

/// Effective potentials of the two circuit layouts, their analytic gradients,
/// the loop/branch wave vectors, and the quantum-Kirchhoff identity checks
/// that tie all three together.  Every function here is pure.
namespace triloop {

/// A: trijunction inside the main loop.  B: trijunction moved outside on a
/// central branch of length l~.  A_limit: the l' -> 0, L_K -> 0 limit of A,
/// where each small loop quantizes independently with inductance L_s/3.
enum class Design { A, B, A_limit };

[[nodiscard]] Design parse_design(const std::string& tag);
[[nodiscard]] std::string design_name(Design d);

/// Dimensionless wave-vector combinations k_i l / 2pi and k'_i l / 2pi.
/// Conservation at the branch nodes: k1 = k3 + kp2, k2 = k1 + kp3,
/// k3 = k2 + kp1, holding to 1e-12 for all inputs.
struct WaveVectors {
  double k1 = 0, k2 = 0, k3 = 0;
  double kp1 = 0, kp2 = 0, kp3 = 0;
};

/// Supercurrents in units Phi0 / L_s: loop segments I_i, branches I'_i.
/// Ip1 = I3 - I2, Ip2 = I1 - I3, Ip3 = I2 - I1 to 1e-12.
struct CurrentReport {
  double I1 = 0, I2 = 0, I3 = 0;
  double Ip1 = 0, Ip2 = 0, Ip3 = 0;
};

/// Design-A effective potential, units u = Phi0^2 / (2 L_s): three quadratic
/// small-loop terms with stiffness 3 L_s/Lp_eff, one outer circulation term
/// with stiffness L_s/L_eff - L_s/Lp_eff, minus the six junction cosines.
[[nodiscard]] double u_eff_a(const CircuitParams& p, const FluxConfig& f,
                             const WindingNumbers& w, const PhaseState& s);

/// l' -> 0 limit of design A: each small loop sees inductance L_s/3 and the
/// circulation term drops out.  Ignores every inductance except L_s.
[[nodiscard]] double u_eff_a_limit(const CircuitParams& p, const FluxConfig& f,
                                   const WindingNumbers& w, const PhaseState& s);

/// Design-B effective potential for general fluxes.  The outer winding is not
/// independent in this layout; n = m1 + m2 + m3 - n_prime is derived
/// internally and w.n is ignored.  Equals u_eff_a for all states and fluxes
/// when Lt_eff = Lp_eff.
[[nodiscard]] double u_eff_b(const CircuitParams& p, const FluxConfig& f,
                             const WindingNumbers& w, const PhaseState& s);

[[nodiscard]] double u_eff(Design d, const CircuitParams& p, const FluxConfig& f,
                           const WindingNumbers& w, const PhaseState& s);

/// Analytic gradient with all six phases treated as independent variables,
/// order (phi1, phi2, phi3, phip1, phip2, phip3).  This is the object the
/// Kirchhoff identities constrain; the reduced gradient chains through it.
[[nodiscard]] std::array<double, 6> grad6_u_eff(Design d, const CircuitParams& p,
                                                const FluxConfig& f,
                                                const WindingNumbers& w,
                                                const PhaseState& s);

/// Gradient over ReducedCoords in pack() order
/// (phi_p, phi_m, phip_p, phip_m, phi1), with phip1 = 2 pi n' - 2 phip_p
/// eliminated structurally.
[[nodiscard]] std::array<double, 5> grad_u_eff(Design d, const CircuitParams& p,
                                               const FluxConfig& f,
                                               const WindingNumbers& w,
                                               const PhaseState& s);

/// Closed-form k_i l / 2pi and k'_i l / 2pi for the given state.
[[nodiscard]] WaveVectors wavevectors(Design d, const CircuitParams& p,
                                      const FluxConfig& f, const WindingNumbers& w,
                                      const PhaseState& s);

/// I = -(Phi0 / L_K) k l / 2pi, reported in units Phi0 / L_s.
[[nodiscard]] CurrentReport currents(const WaveVectors& wv, const CircuitParams& p);

/// Residuals of the loop-junction quantum Kirchhoff relation,
///   (Phi0^2 / 2 pi L_K) k_i l/2pi - E_J sin phi_i + dU/dphi_i ,
/// in energy units u.  Zero to 1e-10 for every valid state by construction;
/// anything larger flags an implementation bug.
[[nodiscard]] std::array<double, 3> verify_kirchhoff_loop(Design d,
                                                          const CircuitParams& p,
                                                          const FluxConfig& f,
                                                          const WindingNumbers& w,
                                                          const PhaseState& s);

/// Residuals of the trijunction quantum Kirchhoff relation, pairing the
/// branch wave vector k'_i against the difference of trijunction junction
/// equations of motion.  Same convention and tolerance as the loop version.
[[nodiscard]] std::array<double, 3> verify_kirchhoff_trijunction(
    Design d, const CircuitParams& p, const FluxConfig& f, const WindingNumbers& w,
    const PhaseState& s);

}  // namespace triloop
