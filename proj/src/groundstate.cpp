#include "triloop/groundstate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

namespace triloop {

namespace {

constexpr double pi = two_pi / 2.0;

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

/// Potential and analytic gradient as functions of the packed 5-vector.
struct Objective {
  Design d;
  const CircuitParams& p;
  FluxConfig f;
  WindingNumbers w;

  [[nodiscard]] double value(const Vec5& x) const {
    const PhaseState s = from_reduced({x[0], x[1], x[2], x[3], x[4]}, w);
    return u_eff(d, p, f, w, s);
  }

  [[nodiscard]] Vec5 grad(const Vec5& x) const {
    const PhaseState s = from_reduced({x[0], x[1], x[2], x[3], x[4]}, w);
    const std::array<double, 5> g = grad_u_eff(d, p, f, w, s);
    return Vec5(g[0], g[1], g[2], g[3], g[4]);
  }
};

struct Endpoint {
  Vec5 x = Vec5::Zero();
  double energy = std::numeric_limits<double>::infinity();
  double grad_inf = std::numeric_limits<double>::infinity();
  bool converged = false;
  WindingNumbers w;
};

/// k-th deterministic start: origin for k = 0, then a seeded Kronecker
/// lattice on [-pi, pi)^5 (irrational strides give low-discrepancy coverage).
Vec5 start_point(int k, std::uint64_t seed) {
  if (k == 0) return Vec5::Zero();
  static constexpr double stride[5] = {
      0.41421356237309515, 0.73205080756887729, 0.23606797749978969,
      0.64575131106459059, 0.31662479035539985};
  std::uint64_t st = seed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull;
  Vec5 x;
  for (int j = 0; j < 5; ++j) {
    const double offset = uniform01(st);
    double v = offset + k * stride[j];
    v -= std::floor(v);
    x[j] = two_pi * v - pi;
  }
  return x;
}

/// BFGS with Armijo backtracking; energy is monotone nonincreasing by
/// construction.  Falls back to steepest descent when the quasi-Newton
/// direction or its line search fails.
Endpoint bfgs_descend(const Objective& obj, Vec5 x, const MinimizeOpts& opts) {
  double u = obj.value(x);
  Vec5 g = obj.grad(x);
  Mat5 h = Mat5::Identity();
  bool identity_h = true;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) break;
    Vec5 dir = -h * g;
    double gd = g.dot(dir);
    if (!(gd < 0.0)) {
      h.setIdentity();
      identity_h = true;
      dir = -g;
      gd = g.dot(dir);
    }
    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec5 xn = x + t * dir;
      const double un = obj.value(xn);
      if (un <= u + 1e-4 * t * gd) {
        const Vec5 gn = obj.grad(xn);
        const Vec5 s = t * dir;
        const Vec5 y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
          const double rho = 1.0 / sy;
          const Mat5 a = Mat5::Identity() - rho * s * y.transpose();
          h = a * h * a.transpose() + rho * s * s.transpose();
          identity_h = false;
        } else {
          h.setIdentity();
          identity_h = true;
        }
        x = xn;
        u = un;
        g = gn;
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) {
      if (identity_h) break;  // steepest descent stalled: at numerical floor
      h.setIdentity();
      identity_h = true;
    }
  }
  Endpoint e;
  e.x = x;
  e.energy = u;
  e.grad_inf = g.lpNorm<Eigen::Infinity>();
  e.converged = e.grad_inf <= opts.grad_tol;
  return e;
}

/// Damped Newton refinement on the analytic gradient (Hessian by central
/// differences).  Drives the gradient norm toward machine floor so current
/// ratios at symmetric minima resolve cleanly.
void newton_polish(const Objective& obj, Endpoint& e) {
  constexpr double h_fd = 1e-6;
  Vec5 x = e.x;
  Vec5 g = obj.grad(x);
  double ginf = g.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < 12 && ginf > 1e-15; ++iter) {
    Mat5 jac;
    for (int j = 0; j < 5; ++j) {
      Vec5 xp = x, xm = x;
      xp[j] += h_fd;
      xm[j] -= h_fd;
      jac.col(j) = (obj.grad(xp) - obj.grad(xm)) / (2.0 * h_fd);
    }
    const Mat5 sym = 0.5 * (jac + jac.transpose());
    double lambda = 0.0;
    bool accepted = false;
    for (int trial = 0; trial < 8; ++trial) {
      const Mat5 m = sym + lambda * Mat5::Identity();
      const Eigen::LDLT<Mat5> ldlt(m);
      if (ldlt.info() == Eigen::Success) {
        const Vec5 xn = x - ldlt.solve(g);
        const Vec5 gn = obj.grad(xn);
        const double gninf = gn.lpNorm<Eigen::Infinity>();
        if (gninf < ginf) {
          x = xn;
          g = gn;
          ginf = gninf;
          accepted = true;
          break;
        }
      }
      lambda = (lambda == 0.0) ? 1e-8 : lambda * 16.0;
    }
    if (!accepted) break;
  }
  e.x = x;
  e.energy = obj.value(x);
  e.grad_inf = ginf;
}

double torus_dist(double a, double b) { return std::abs(std::remainder(a - b, two_pi)); }

bool same_minimum(const PhaseState& a, const PhaseState& b, double tol) {
  return torus_dist(a.phi1, b.phi1) < tol && torus_dist(a.phi2, b.phi2) < tol &&
         torus_dist(a.phi3, b.phi3) < tol && torus_dist(a.phip1, b.phip1) < tol &&
         torus_dist(a.phip2, b.phip2) < tol && torus_dist(a.phip3, b.phip3) < tol;
}

/// The potential is invariant under 2pi translations generated by
/// (a2, a3) in Z^2 acting on the reduced coordinates as below (all fluxoid
/// blocks and cosines unchanged).  Pick the translate of smallest coordinate
/// norm as the deterministic representative.
Vec5 canonical_gauge(const Vec5& x) {
  Vec5 best = x;
  double best_norm = x.squaredNorm();
  for (int a2 = -2; a2 <= 2; ++a2) {
    for (int a3 = -2; a3 <= 2; ++a3) {
      const double sum = a2 + a3, dif = a2 - a3;
      Vec5 cand = x;
      cand[0] -= pi * sum;   // phi_p
      cand[1] -= pi * dif;   // phi_m
      cand[2] += pi * sum;   // phip_p
      cand[3] += pi * dif;   // phip_m
      cand[4] += two_pi * sum;  // phi1
      const double n = cand.squaredNorm();
      if (n < best_norm - 1e-12) {
        best_norm = n;
        best = cand;
      }
    }
  }
  return best;
}

MinimizeResult to_result(const Objective& obj, const Endpoint& e, int restarts_used) {
  const Vec5 x = canonical_gauge(e.x);
  MinimizeResult r;
  r.reduced = {x[0], x[1], x[2], x[3], x[4]};
  r.state = from_reduced(r.reduced, e.w);
  r.energy = obj.value(x);
  r.grad_norm = obj.grad(x).lpNorm<Eigen::Infinity>();
  r.windings_used = e.w;
  r.converged = e.converged;
  r.n_restarts_used = restarts_used;
  return r;
}

std::vector<WindingNumbers> winding_sectors(Design d, const WindingNumbers& w,
                                            bool scan) {
  if (!scan) return {w};
  std::vector<WindingNumbers> sectors;
  for (int m1 = -1; m1 <= 1; ++m1) {
    for (int m2 = -1; m2 <= 1; ++m2) {
      for (int m3 = -1; m3 <= 1; ++m3) {
        if (d == Design::B) {
          sectors.push_back({m1, m2, m3, m1 + m2 + m3 - w.n_prime, w.n_prime});
        } else {
          for (int n = -1; n <= 1; ++n) {
            sectors.push_back({m1, m2, m3, n, w.n_prime});
          }
        }
      }
    }
  }
  return sectors;
}

/// Runs the full restart set and returns the torus-clustered, energy-sorted
/// list of converged minima.  Shared core of minimize/find_degenerate_minima.
std::vector<MinimizeResult> run_multistart(Design d, const CircuitParams& p,
                                           const FluxConfig& f,
                                           const WindingNumbers& w,
                                           const MinimizeOpts& opts,
                                           int& restarts_used,
                                           MinimizeResult& best_effort) {
  if (opts.n_restarts < 8) {
    throw std::invalid_argument("n_restarts must be >= 8");
  }
  const std::vector<WindingNumbers> sectors =
      winding_sectors(d, w, opts.scan_windings);
  std::vector<Endpoint> endpoints;
  endpoints.reserve(sectors.size() * opts.n_restarts);
  restarts_used = 0;
  for (const WindingNumbers& sec : sectors) {
    const Objective obj{d, p, f, sec};
    for (int k = 0; k < opts.n_restarts; ++k, ++restarts_used) {
      Endpoint e = bfgs_descend(obj, start_point(k, opts.seed), opts);
      if (opts.polish) newton_polish(obj, e);
      e.converged = e.grad_inf <= opts.grad_tol;
      e.w = sec;
      endpoints.push_back(e);
    }
  }
  std::stable_sort(endpoints.begin(), endpoints.end(),
                   [](const Endpoint& a, const Endpoint& b) {
                     return a.energy < b.energy;
                   });
  best_effort = to_result(Objective{d, p, f, endpoints.front().w},
                          endpoints.front(), restarts_used);
  std::vector<MinimizeResult> out;
  std::vector<PhaseState> reps;
  for (const Endpoint& e : endpoints) {
    if (!e.converged) continue;
    const PhaseState s = from_reduced({e.x[0], e.x[1], e.x[2], e.x[3], e.x[4]}, e.w);
    bool dup = false;
    for (const PhaseState& r : reps) {
      if (same_minimum(s, r, 1e-4)) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    reps.push_back(s);
    out.push_back(to_result(Objective{d, p, f, e.w}, e, restarts_used));
  }
  return out;
}

}  // namespace

MinimizeResult minimize(Design d, const CircuitParams& p, const FluxConfig& f,
                        const WindingNumbers& w, const MinimizeOpts& opts) {
  int used = 0;
  MinimizeResult best_effort;
  const std::vector<MinimizeResult> minima =
      run_multistart(d, p, f, w, opts, used, best_effort);
  if (minima.empty()) {
    throw MinimizeError("minimization did not converge on any restart",
                        best_effort);
  }
  return minima.front();
}

MinimizeResult minimize_warm(Design d, const CircuitParams& p, const FluxConfig& f,
                             const WindingNumbers& w, const ReducedCoords& start,
                             const MinimizeOpts& opts) {
  const Objective obj{d, p, f, w};
  const std::array<double, 5> v = pack(start);
  Endpoint e = bfgs_descend(obj, Vec5(v[0], v[1], v[2], v[3], v[4]), opts);
  if (opts.polish) newton_polish(obj, e);
  e.converged = e.grad_inf <= opts.grad_tol;
  e.w = w;
  return to_result(obj, e, 1);
}

std::vector<MinimizeResult> find_degenerate_minima(Design d, const CircuitParams& p,
                                                   const FluxConfig& f,
                                                   const WindingNumbers& w,
                                                   const MinimizeOpts& opts) {
  int used = 0;
  MinimizeResult best_effort;
  std::vector<MinimizeResult> minima =
      run_multistart(d, p, f, w, opts, used, best_effort);
  if (minima.empty()) {
    throw MinimizeError("minimization did not converge on any restart",
                        best_effort);
  }
  return minima;
}

Routing route(Design d, const CircuitParams& p, int active_loop, double f_mag,
              const WindingNumbers& w, const MinimizeOpts& opts) {
  if (active_loop < 1 || active_loop > 3) {
    throw std::invalid_argument("active_loop must be 1, 2, or 3");
  }
  FluxConfig f;
  (active_loop == 1 ? f.f1 : active_loop == 2 ? f.f2 : f.f3) = f_mag;
  const std::vector<MinimizeResult> minima =
      find_degenerate_minima(d, p, f, w, opts);
  if (minima.size() >= 2 && minima[1].energy - minima[0].energy < 1e-9) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "degenerate routing: two ground states within %.3e",
                  minima[1].energy - minima[0].energy);
    throw DegenerateRoutingError(msg);
  }
  const MinimizeResult& best = minima.front();
  const CurrentReport cr = currents(wavevectors(d, p, f, w, best.state), p);
  const std::array<double, 3> mag = {std::abs(cr.Ip1), std::abs(cr.Ip2),
                                     std::abs(cr.Ip3)};
  const int iso = static_cast<int>(std::min_element(mag.begin(), mag.end()) -
                                   mag.begin());
  const double mx = *std::max_element(mag.begin(), mag.end());
  if (mx < 1e-12 || mx < 10.0 * mag[iso]) {
    throw DegenerateRoutingError(
        "degenerate routing: branch currents do not single out a branch");
  }
  Routing r;
  r.isolated_branch = iso + 1;
  r.conducting_pair = {iso == 0 ? 2 : 1, iso == 2 ? 2 : 3};
  r.currents = cr;
  return r;
}

std::vector<SweepRow> sweep(Design d, const CircuitParams& p,
                            const std::vector<FluxConfig>& schedule,
                            const WindingNumbers& w, const MinimizeOpts& opts,
                            bool warm_start) {
  if (schedule.empty()) {
    throw std::invalid_argument("sweep schedule must be nonempty");
  }
  std::vector<SweepRow> rows;
  rows.reserve(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const FluxConfig& f = schedule[i];
    MinimizeResult res;
    try {
      if (i == 0 || !warm_start) {
        res = minimize(d, p, f, w, opts);
      } else {
        res = minimize_warm(d, p, f, w, rows.back().min.reduced, opts);
        if (!res.converged) res = minimize(d, p, f, w, opts);
      }
    } catch (const MinimizeError& err) {
      throw SweepError("sweep failed to converge at point " + std::to_string(i) +
                           ": " + err.what(),
                       std::move(rows));
    }
    rows.push_back({f, res, currents(wavevectors(d, p, f, w, res.state), p)});
  }
  return rows;
}

std::vector<FluxConfig> ramp_schedule(const FluxConfig& a, const FluxConfig& b,
                                      int points) {
  if (points < 1) throw std::invalid_argument("ramp needs at least one point");
  std::vector<FluxConfig> sched;
  sched.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    sched.push_back({a.f1 + t * (b.f1 - a.f1), a.f2 + t * (b.f2 - a.f2),
                     a.f3 + t * (b.f3 - a.f3)});
  }
  return sched;
}

CircuitParams calibrate(Design d, const CircuitParams& base, double target_phi_p,
                        double f_mag, const MinimizeOpts& opts, double e_lo,
                        double e_hi) {
  if (!(e_lo > 0.0) || !(e_hi > e_lo)) {
    throw std::invalid_argument("calibration range must satisfy 0 < e_lo < e_hi");
  }
  const double ratio = base.E_J > 0.0 ? base.E_Jp / base.E_J : 0.0;
  const auto with_scale = [&](double e) {
    CircuitParams q = base;
    q.E_J = e;
    q.E_Jp = ratio * e;
    return q;
  };
  const auto measure = [&](double e) {
    return minimize(d, with_scale(e), {f_mag, 0, 0}, {}, opts).reduced.phi_p /
           two_pi;
  };
  constexpr double tol = 1e-3;
  double p_lo = measure(e_lo);
  double p_hi = measure(e_hi);
  if (std::abs(p_lo - p_hi) < 1e-12) {
    // Flat response (e.g. f = 0): any scale works if it works at all.
    if (std::abs(p_lo - target_phi_p) <= tol) {
      return with_scale(0.5 * (e_lo + e_hi));
    }
    throw CalibrationError("calibration target unreachable: flat response", p_lo,
                           p_hi);
  }
  const double lo_val = std::min(p_lo, p_hi), hi_val = std::max(p_lo, p_hi);
  if (target_phi_p > hi_val + tol || target_phi_p < lo_val - tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "calibration target %.6f unreachable: achieved phi_p/2pi in "
                  "[%.6f, %.6f] over the search range",
                  target_phi_p, lo_val, hi_val);
    throw CalibrationError(msg, lo_val, hi_val);
  }
  // phi_p decreases monotonically with the junction scale; geometric bisection
  // handles the decades-wide range.
  double a = e_lo, b = e_hi, pa = p_lo;
  double e_best = a, p_best = pa;
  for (int iter = 0; iter < 80; ++iter) {
    const double m = std::sqrt(a * b);
    const double pm = measure(m);
    if (std::abs(pm - target_phi_p) < std::abs(p_best - target_phi_p)) {
      e_best = m;
      p_best = pm;
    }
    if (std::abs(pm - target_phi_p) <= 1e-4) break;
    if ((pm - target_phi_p > 0.0) == (pa - target_phi_p > 0.0)) {
      a = m;
      pa = pm;
    } else {
      b = m;
    }
  }
  if (std::abs(p_best - target_phi_p) > tol) {
    throw CalibrationError("calibration bisection did not reach the target",
                           lo_val, hi_val);
  }
  return with_scale(e_best);
}

}  // namespace triloop
