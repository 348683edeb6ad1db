#include "triloop/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace triloop {

namespace {

constexpr double pi = two_pi / 2.0;

/// Fluxoid building blocks shared by every design:
///   b_i = m_i + f_i - (phi_i + phi'_i) / 2pi   (small loops)
///   aS  = n + f1 + f2 + f3 - (phi1 + phi2 + phi3) / 2pi   (outer circulation)
struct Blocks {
  double b1, b2, b3, aS;
};

Blocks blocks(const FluxConfig& f, const WindingNumbers& w, const PhaseState& s,
              int n_outer) {
  Blocks bl;
  bl.b1 = w.m1 + f.f1 - (s.phi1 + s.phip1) / two_pi;
  bl.b2 = w.m2 + f.f2 - (s.phi2 + s.phip2) / two_pi;
  bl.b3 = w.m3 + f.f3 - (s.phi3 + s.phip3) / two_pi;
  bl.aS = n_outer + f.f1 + f.f2 + f.f3 - (s.phi1 + s.phi2 + s.phi3) / two_pi;
  return bl;
}

int outer_winding(Design d, const WindingNumbers& w) {
  // Design B's outer loop is the sum of the three small loops minus the
  // trijunction loop, so its winding is fixed by the others.
  return d == Design::B ? w.m1 + w.m2 + w.m3 - w.n_prime : w.n;
}

double junction_sum(const CircuitParams& p, const PhaseState& s) {
  return p.E_J * (std::cos(s.phi1) + std::cos(s.phi2) + std::cos(s.phi3)) +
         p.E_Jp * (std::cos(s.phip1) + std::cos(s.phip2) + std::cos(s.phip3));
}

/// Quadratic-form derivatives dU/db_i and dU/daS per design, units u.
struct QuadGrad {
  double db1, db2, db3, daS;
};

QuadGrad quad_grad(Design d, const CircuitParams& p, const Blocks& bl) {
  switch (d) {
    case Design::A: {
      const double cp = p.L_s / p.lp_eff();
      const double c = p.L_s / p.l_eff();
      return {6.0 * cp * bl.b1, 6.0 * cp * bl.b2, 6.0 * cp * bl.b3,
              2.0 * (c - cp) * bl.aS};
    }
    case Design::A_limit:
      return {6.0 * bl.b1, 6.0 * bl.b2, 6.0 * bl.b3, 0.0};
    case Design::B: {
      const double cp = p.L_s / p.lp_eff();
      const double ct = p.L_s / p.lt_eff();
      const double c = p.L_s / p.l_eff();
      return {6.0 * cp * bl.b1,
              3.0 * (cp + ct) * bl.b2 + 3.0 * (cp - ct) * bl.b3,
              3.0 * (cp + ct) * bl.b3 + 3.0 * (cp - ct) * bl.b2,
              2.0 * (c - cp) * bl.aS};
    }
  }
  throw std::logic_error("unreachable design tag");
}

}  // namespace

Design parse_design(const std::string& tag) {
  if (tag == "A") return Design::A;
  if (tag == "B") return Design::B;
  if (tag == "A_limit") return Design::A_limit;
  throw std::invalid_argument("unknown design tag '" + tag +
                              "' (expected A, B, or A_limit)");
}

std::string design_name(Design d) {
  switch (d) {
    case Design::A: return "A";
    case Design::B: return "B";
    case Design::A_limit: return "A_limit";
  }
  throw std::logic_error("unreachable design tag");
}

double u_eff_a(const CircuitParams& p, const FluxConfig& f, const WindingNumbers& w,
               const PhaseState& s) {
  const Blocks bl = blocks(f, w, s, w.n);
  const double cp = p.L_s / p.lp_eff();
  const double c = p.L_s / p.l_eff();
  return 3.0 * cp * (bl.b1 * bl.b1 + bl.b2 * bl.b2 + bl.b3 * bl.b3) +
         (c - cp) * bl.aS * bl.aS - junction_sum(p, s);
}

double u_eff_a_limit(const CircuitParams& p, const FluxConfig& f,
                     const WindingNumbers& w, const PhaseState& s) {
  const Blocks bl = blocks(f, w, s, w.n);
  return 3.0 * (bl.b1 * bl.b1 + bl.b2 * bl.b2 + bl.b3 * bl.b3) -
         junction_sum(p, s);
}

double u_eff_b(const CircuitParams& p, const FluxConfig& f, const WindingNumbers& w,
               const PhaseState& s) {
  const Blocks bl = blocks(f, w, s, outer_winding(Design::B, w));
  const double cp = p.L_s / p.lp_eff();
  const double ct = p.L_s / p.lt_eff();
  const double c = p.L_s / p.l_eff();
  return 3.0 * cp * bl.b1 * bl.b1 +
         1.5 * (cp + ct) * (bl.b2 * bl.b2 + bl.b3 * bl.b3) +
         3.0 * (cp - ct) * bl.b2 * bl.b3 + (c - cp) * bl.aS * bl.aS -
         junction_sum(p, s);
}

double u_eff(Design d, const CircuitParams& p, const FluxConfig& f,
             const WindingNumbers& w, const PhaseState& s) {
  switch (d) {
    case Design::A: return u_eff_a(p, f, w, s);
    case Design::B: return u_eff_b(p, f, w, s);
    case Design::A_limit: return u_eff_a_limit(p, f, w, s);
  }
  throw std::logic_error("unreachable design tag");
}

std::array<double, 6> grad6_u_eff(Design d, const CircuitParams& p,
                                  const FluxConfig& f, const WindingNumbers& w,
                                  const PhaseState& s) {
  const Blocks bl = blocks(f, w, s, outer_winding(d, w));
  const QuadGrad q = quad_grad(d, p, bl);
  return {
      -(q.db1 + q.daS) / two_pi + p.E_J * std::sin(s.phi1),
      -(q.db2 + q.daS) / two_pi + p.E_J * std::sin(s.phi2),
      -(q.db3 + q.daS) / two_pi + p.E_J * std::sin(s.phi3),
      -q.db1 / two_pi + p.E_Jp * std::sin(s.phip1),
      -q.db2 / two_pi + p.E_Jp * std::sin(s.phip2),
      -q.db3 / two_pi + p.E_Jp * std::sin(s.phip3),
  };
}

std::array<double, 5> grad_u_eff(Design d, const CircuitParams& p,
                                 const FluxConfig& f, const WindingNumbers& w,
                                 const PhaseState& s) {
  const std::array<double, 6> g = grad6_u_eff(d, p, f, w, s);
  return {
      g[1] + g[2],                // phi_p
      g[1] - g[2],                // phi_m
      g[4] + g[5] - 2.0 * g[3],   // phip_p (phip1 = 2 pi n' - 2 phip_p)
      g[4] - g[5],                // phip_m
      g[0],                       // phi1
  };
}

WaveVectors wavevectors(Design d, const CircuitParams& p, const FluxConfig& f,
                        const WindingNumbers& w, const PhaseState& s) {
  const Blocks bl = blocks(f, w, s, outer_winding(d, w));
  WaveVectors wv;
  switch (d) {
    case Design::A: {
      const double rp = p.L_K / p.lp_eff();
      const double r0 = p.L_K / p.l_eff();
      wv.k1 = 3.0 * rp * bl.b1 + (r0 - rp) * bl.aS;
      wv.k2 = 3.0 * rp * bl.b2 + (r0 - rp) * bl.aS;
      wv.k3 = 3.0 * rp * bl.b3 + (r0 - rp) * bl.aS;
      wv.kp1 = 3.0 * rp * (bl.b3 - bl.b2);
      wv.kp2 = 3.0 * rp * (bl.b1 - bl.b3);
      wv.kp3 = 3.0 * rp * (bl.b2 - bl.b1);
      break;
    }
    case Design::A_limit: {
      const double rs = p.L_K / p.L_s;
      wv.k1 = 3.0 * rs * bl.b1;
      wv.k2 = 3.0 * rs * bl.b2;
      wv.k3 = 3.0 * rs * bl.b3;
      wv.kp1 = 3.0 * rs * (bl.b3 - bl.b2);
      wv.kp2 = 3.0 * rs * (bl.b1 - bl.b3);
      wv.kp3 = 3.0 * rs * (bl.b2 - bl.b1);
      break;
    }
    case Design::B: {
      const double rp = p.L_K / p.lp_eff();
      const double rt = p.L_K / p.lt_eff();
      const double r0 = p.L_K / p.l_eff();
      const double dd = bl.b3 - bl.b2;
      wv.k1 = 3.0 * rp * bl.b1 + (r0 - rp) * bl.aS;
      wv.k2 = -1.5 * rp * bl.b1 - 1.5 * rt * dd + (r0 + 0.5 * rp) * bl.aS;
      wv.k3 = -1.5 * rp * bl.b1 + 1.5 * rt * dd + (r0 + 0.5 * rp) * bl.aS;
      wv.kp1 = 3.0 * rt * dd;
      wv.kp2 = 4.5 * rp * (bl.b1 - bl.aS / 3.0) - 1.5 * rt * dd;
      wv.kp3 = -4.5 * rp * (bl.b1 - bl.aS / 3.0) - 1.5 * rt * dd;
      break;
    }
  }
  return wv;
}

CurrentReport currents(const WaveVectors& wv, const CircuitParams& p) {
  const double scale = -p.L_s / p.L_K;
  CurrentReport cr;
  cr.I1 = scale * wv.k1;
  cr.I2 = scale * wv.k2;
  cr.I3 = scale * wv.k3;
  cr.Ip1 = scale * wv.kp1;
  cr.Ip2 = scale * wv.kp2;
  cr.Ip3 = scale * wv.kp3;
  return cr;
}

std::array<double, 3> verify_kirchhoff_loop(Design d, const CircuitParams& p,
                                            const FluxConfig& f,
                                            const WindingNumbers& w,
                                            const PhaseState& s) {
  const WaveVectors wv = wavevectors(d, p, f, w, s);
  const std::array<double, 6> g = grad6_u_eff(d, p, f, w, s);
  const double scale = p.L_s / (pi * p.L_K);  // Phi0^2 / (2 pi L_K) in units u
  const std::array<double, 3> phi = {s.phi1, s.phi2, s.phi3};
  const std::array<double, 3> k = {wv.k1, wv.k2, wv.k3};
  std::array<double, 3> res;
  for (int i = 0; i < 3; ++i) {
    res[i] = scale * k[i] - p.E_J * std::sin(phi[i]) + g[i];
  }
  return res;
}

std::array<double, 3> verify_kirchhoff_trijunction(Design d, const CircuitParams& p,
                                                   const FluxConfig& f,
                                                   const WindingNumbers& w,
                                                   const PhaseState& s) {
  const WaveVectors wv = wavevectors(d, p, f, w, s);
  const std::array<double, 6> g = grad6_u_eff(d, p, f, w, s);
  const double scale = p.L_s / (pi * p.L_K);
  const std::array<double, 3> kp = {wv.kp1, wv.kp2, wv.kp3};
  const std::array<double, 3> phip = {s.phip1, s.phip2, s.phip3};
  std::array<double, 3> res;
  for (int i = 0; i < 3; ++i) {
    const int a = (i + 2) % 3, b = (i + 1) % 3;  // junctions flanking branch i
    const double rhs = g[3 + a] - g[3 + b] - p.E_Jp * std::sin(phip[a]) +
                       p.E_Jp * std::sin(phip[b]);
    res[i] = -scale * kp[i] - rhs;
  }
  return res;
}

}  // namespace triloop
