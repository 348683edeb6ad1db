#include "triloop/mzm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace triloop {

namespace {

using Vec6c = Eigen::Matrix<std::complex<double>, 6, 1>;
using Mat6c = Eigen::Matrix<std::complex<double>, 6, 6>;
using Mat6d = Eigen::Matrix<double, 6, 6>;

Mat6d as_eigen(const Mat6& m) {
  Mat6d out;
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k < 6; ++k) out(j, k) = m[j][k];
  return out;
}

Mat6 as_array(const Mat6d& m) {
  Mat6 out{};
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k < 6; ++k) out[j][k] = m(j, k);
  return out;
}

struct DiagResult {
  MajoranaSpectrum spec;
  std::array<Vec6c, 3> pos_modes;  ///< unit eigenvectors of iA, ascending energy
};

/// Orthonormal W from the real and imaginary parts of the positive modes
/// (iA v = eps v with v = (x + iy)/sqrt(2) gives A x = eps y, A y = -eps x).
/// Modified Gram-Schmidt repairs the pairing when eigenspaces are degenerate
/// or contain exact zero modes; collapsed columns fall back to canonical axes.
Mat6d mode_matrix(const std::array<Vec6c, 3>& v) {
  Mat6d w;
  for (int k = 0; k < 3; ++k) {
    w.col(2 * k) = v[k].real();
    w.col(2 * k + 1) = v[k].imag();
  }
  int next_axis = 0;
  for (int c = 0; c < 6; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      w.col(c) -= w.col(prev).dot(w.col(c)) * w.col(prev);
    }
    if (w.col(c).norm() < 1e-8) {
      while (next_axis < 6) {
        Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
        e[next_axis++] = 1.0;
        for (int prev = 0; prev < c; ++prev) {
          e -= w.col(prev).dot(e) * w.col(prev);
        }
        if (e.norm() >= 1e-8) {
          w.col(c) = e;
          break;
        }
      }
    }
    w.col(c).normalize();
  }
  return w;
}

DiagResult diag_impl(const MajoranaCoupling& c) {
  const Mat6d a = as_eigen(c.A);
  const Mat6c herm = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Mat6c> es(herm);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("Majorana coupling eigensolve failed");
  }
  const auto& lam = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(lam[5]));
  for (int k = 0; k < 3; ++k) {
    if (std::abs(lam[k] + lam[5 - k]) > 1e-12 * scale) {
      throw std::runtime_error("Majorana spectrum lost its +- pair symmetry");
    }
  }
  DiagResult r;
  for (int k = 0; k < 3; ++k) {
    r.spec.energies[k] = std::max(0.0, lam[3 + k]);
    r.pos_modes[k] = es.eigenvectors().col(3 + k);
  }
  r.spec.modes = as_array(mode_matrix(r.pos_modes));
  // Ground-state covariance from the strictly-positive modes; exact zero
  // modes carry indeterminate parity and contribute nothing.
  Mat6d m = Mat6d::Zero();
  const double zero_tol = 1e-12 * scale;
  for (int k = 0; k < 6; ++k) {
    if (lam[k] > zero_tol) {
      const Vec6c v = es.eigenvectors().col(k);
      m -= 2.0 * (v * v.adjoint()).imag();
    }
  }
  m = 0.5 * (m - m.transpose().eval());
  r.spec.covariance = as_array(m);
  return r;
}

[[nodiscard]] std::array<double, 3> outer_weights(const Vec6c& v) {
  const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
  if (n <= 0.0) return {0.0, 0.0, 0.0};
  return {std::abs(v[0]) / n, std::abs(v[1]) / n, std::abs(v[2]) / n};
}

/// Deterministic global phase: largest-magnitude component made real positive.
void fix_phase(Vec6c& v) {
  int arg = 0;
  for (int j = 1; j < 6; ++j) {
    if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
  }
  const double mag = std::abs(v[arg]);
  if (mag > 0.0) v *= std::conj(v[arg]) / mag;
}

}  // namespace

MajoranaCoupling build_coupling(const PhaseState& s, double E_M, double alpha) {
  MajoranaCoupling c;
  const auto set = [&c](int j, int k, double val) {
    c.A[j][k] = val;
    c.A[k][j] = -val;
  };
  set(3, 4, E_M * std::cos(0.5 * s.phip3));
  set(4, 5, E_M * std::cos(0.5 * s.phip1));
  set(5, 3, E_M * std::cos(0.5 * s.phip2));
  set(0, 3, alpha);
  set(1, 4, alpha);
  set(2, 5, alpha);
  return c;
}

MajoranaSpectrum diagonalize(const MajoranaCoupling& c) {
  return diag_impl(c).spec;
}

std::array<double, 3> mzm_currents(const PhaseState& s,
                                   const MajoranaSpectrum& spec, double E_M) {
  if (E_M < 0.0) throw std::invalid_argument("E_M must be nonnegative");
  const std::array<double, 3> phip = {s.phip1, s.phip2, s.phip3};
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const int j = 3 + (i + 1) % 3;
    const int k = 3 + (i + 2) % 3;
    out[i] = -spec.covariance[j][k] * std::sin(0.5 * phip[i]);
  }
  return out;
}

std::vector<FluxConfig> braid_schedule(int legs, int steps_per_leg) {
  if (legs < 2) throw std::invalid_argument("braid needs at least two waypoints");
  if (steps_per_leg < 20) {
    throw std::invalid_argument(
        "steps_per_leg must be >= 20: adiabatic tracking is unreliable on "
        "coarser ramps");
  }
  static constexpr double mag = 0.42;
  static constexpr FluxConfig cycle[3] = {{mag, 0, 0}, {0, 0, mag}, {0, mag, 0}};
  std::vector<FluxConfig> sched;
  sched.reserve(static_cast<std::size_t>(legs - 1) * steps_per_leg + 1);
  sched.push_back(cycle[0]);
  for (int leg = 0; leg + 1 < legs; ++leg) {
    const FluxConfig& a = cycle[leg % 3];
    const FluxConfig& b = cycle[(leg + 1) % 3];
    for (int s = 1; s <= steps_per_leg; ++s) {
      const double t = static_cast<double>(s) / steps_per_leg;
      sched.push_back({a.f1 + t * (b.f1 - a.f1), a.f2 + t * (b.f2 - a.f2),
                       a.f3 + t * (b.f3 - a.f3)});
    }
  }
  return sched;
}

BraidTrace run_braid(Design d, const CircuitParams& p,
                     const std::vector<FluxConfig>& schedule,
                     const MinimizeOpts& opts) {
  if (schedule.empty()) {
    throw std::invalid_argument("braid schedule must be nonempty");
  }
  if (!(p.alpha > 0.0) || !(p.E_M > 0.0)) {
    throw std::invalid_argument(
        "run_braid requires alpha > 0 and E_M > 0 so outer-mode weights can "
        "transfer");
  }
  const WindingNumbers w{};
  BraidTrace trace;
  trace.steps.reserve(schedule.size());
  std::array<Vec6c, 2> init{}, prev{};
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const FluxConfig& f = schedule[i];
    MinimizeResult res;
    if (i == 0) {
      res = minimize(d, p, f, w, opts);
    } else {
      res = minimize_warm(d, p, f, w, trace.steps.back().min.reduced, opts);
      if (!res.converged) {
        throw MinimizeError(
            "braid step " + std::to_string(i) + " did not converge", res);
      }
    }
    DiagResult dr = diag_impl(build_coupling(res.state, p.E_M, p.alpha));
    std::array<Vec6c, 2> cur = {dr.pos_modes[0], dr.pos_modes[1]};
    if (i == 0) {
      fix_phase(cur[0]);
      fix_phase(cur[1]);
      init = cur;
    } else {
      const std::complex<double> o00 = prev[0].dot(cur[0]);
      const std::complex<double> o01 = prev[0].dot(cur[1]);
      const std::complex<double> o10 = prev[1].dot(cur[0]);
      const std::complex<double> o11 = prev[1].dot(cur[1]);
      const double s_id = std::abs(o00) * std::abs(o11);
      const double s_sw = std::abs(o01) * std::abs(o10);
      if (std::abs(s_id - s_sw) < 1e-3) {
        throw TrackingError("adiabatic tracking degenerate: increase steps");
      }
      if (s_sw > s_id) std::swap(cur[0], cur[1]);
      for (int m = 0; m < 2; ++m) {
        const std::complex<double> z = prev[m].dot(cur[m]);
        const double mag = std::abs(z);
        trace.min_step_overlap = std::min(trace.min_step_overlap, mag);
        if (mag > 0.0) cur[m] *= std::conj(z) / mag;
      }
    }
    prev = cur;
    BraidStep step;
    step.f = f;
    step.min = res;
    step.cur = currents(wavevectors(d, p, f, w, res.state), p);
    step.spec = std::move(dr.spec);
    step.w_a = outer_weights(cur[0]);
    step.w_b = outer_weights(cur[1]);
    trace.steps.push_back(std::move(step));
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      trace.overlap[a][b] = init[a].dot(prev[b]).real();
    }
  }
  return trace;
}

std::string braid_verdict(const std::array<std::array<double, 2>, 2>& overlap) {
  const double d0 = std::abs(overlap[0][0]), d1 = std::abs(overlap[1][1]);
  const double o0 = std::abs(overlap[0][1]), o1 = std::abs(overlap[1][0]);
  if (d0 > 0.99 && d1 > 0.99 && o0 < 0.1 && o1 < 0.1) return "identity";
  if (o0 > 0.99 && o1 > 0.99 && d0 < 0.1 && d1 < 0.1) return "exchange";
  return "mixed";
}

}  // namespace triloop
