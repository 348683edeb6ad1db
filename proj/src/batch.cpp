#include "triloop/batch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace triloop {

namespace {

constexpr double pi = two_pi / 2.0;

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

int pick3(std::uint64_t& state) {
  return static_cast<int>(splitmix64(state) % 3) - 1;
}

struct RandomCase {
  FluxConfig f;
  WindingNumbers w;
  PhaseState s;
};

/// Case i depends only on (seed, i), never on evaluation order.
RandomCase make_case(std::uint64_t seed, int i) {
  std::uint64_t st =
      (seed + 0x9e3779b97f4a7c15ull) ^ (static_cast<std::uint64_t>(i) + 1) *
                                           0xbf58476d1ce4e5b9ull;
  RandomCase c;
  c.f = {uniform01(st) - 0.5, uniform01(st) - 0.5, uniform01(st) - 0.5};
  c.w = {pick3(st), pick3(st), pick3(st), pick3(st), pick3(st)};
  const double phi1 = two_pi * uniform01(st) - pi;
  const double phi2 = two_pi * uniform01(st) - pi;
  const double phi3 = two_pi * uniform01(st) - pi;
  const double phip2 = two_pi * uniform01(st) - pi;
  const double phip3 = two_pi * uniform01(st) - pi;
  c.s = make_state(phi1, phi2, phi3, phip2, phip3, c.w.n_prime);
  return c;
}

double max_abs3(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

/// Worst relative deviation of the analytic reduced gradient from a central
/// finite difference, floored so near-critical states do not divide by zero.
double grad_rel_error(Design d, const CircuitParams& p, const RandomCase& c) {
  constexpr double h = 1e-5;
  const std::array<double, 5> g = grad_u_eff(d, p, c.f, c.w, c.s);
  std::array<double, 5> x = pack(to_reduced(c.s, c.w));
  double max_diff = 0.0, max_fd = 0.0;
  for (int j = 0; j < 5; ++j) {
    std::array<double, 5> xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double up = u_eff(d, p, c.f, c.w, from_reduced(unpack(xp), c.w));
    const double um = u_eff(d, p, c.f, c.w, from_reduced(unpack(xm), c.w));
    const double fd = (up - um) / (2.0 * h);
    max_diff = std::max(max_diff, std::abs(g[j] - fd));
    max_fd = std::max(max_fd, std::abs(fd));
  }
  return max_diff / std::max(max_fd, 1e-6);
}

}  // namespace

IdentitySuiteReport identity_suite(Design d, const CircuitParams& p, int n_states,
                                   std::uint64_t seed, int jobs) {
  if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  double mq = 0.0, mqp = 0.0, mg = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(jobs) \
    reduction(max : mq, mqp, mg)
#endif
  for (int i = 0; i < n_states; ++i) {
    const RandomCase c = make_case(seed, i);
    mq = std::max(mq, max_abs3(verify_kirchhoff_loop(d, p, c.f, c.w, c.s)));
    mqp = std::max(mqp,
                   max_abs3(verify_kirchhoff_trijunction(d, p, c.f, c.w, c.s)));
    mg = std::max(mg, grad_rel_error(d, p, c));
  }
  return {n_states, mq, mqp, mg};
}

std::vector<SweepRow> sweep_parallel(Design d, const CircuitParams& p,
                                     const std::vector<FluxConfig>& schedule,
                                     const WindingNumbers& w,
                                     const MinimizeOpts& opts, int jobs) {
  if (schedule.empty()) {
    throw std::invalid_argument("sweep schedule must be nonempty");
  }
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  const int n = static_cast<int>(schedule.size());
  std::vector<SweepRow> rows(n);
  std::vector<char> ok(static_cast<std::size_t>(n), 0);
  std::vector<std::string> errs(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      const MinimizeResult res = minimize(d, p, schedule[i], w, opts);
      rows[i] = {schedule[i], res,
                 currents(wavevectors(d, p, schedule[i], w, res.state), p)};
      ok[i] = 1;
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!ok[i]) {
      rows.resize(static_cast<std::size_t>(i));
      throw SweepError("sweep failed to converge at point " + std::to_string(i) +
                           ": " + errs[i],
                       std::move(rows));
    }
  }
  return rows;
}

}  // namespace triloop
