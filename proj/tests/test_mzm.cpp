#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "triloop/mzm.hpp"
#include "util.hpp"

using namespace triloop;

namespace {

double closed_form_transverse(const PhaseState& s, double E_M) {
  const double c1 = std::cos(0.5 * s.phip1);
  const double c2 = std::cos(0.5 * s.phip2);
  const double c3 = std::cos(0.5 * s.phip3);
  return E_M * std::sqrt(c1 * c1 + c2 * c2 + c3 * c3);
}

Mat6 matmul(const Mat6& a, const Mat6& b) {
  Mat6 r{};
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k)
      for (int j = 0; j < 6; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Mat6 transpose(const Mat6& a) {
  Mat6 r{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) r[i][j] = a[j][i];
  return r;
}

double max_abs_diff(const Mat6& a, const Mat6& b) {
  double m = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

Mat6 identity6() {
  Mat6 r{};
  for (int i = 0; i < 6; ++i) r[i][i] = 1.0;
  return r;
}

MajoranaSpectrum spectrum_at(const PhaseState& s, double E_M, double alpha) {
  return diagonalize(build_coupling(s, E_M, alpha));
}

}  // namespace

TEST_SUITE("mzm") {

TEST_CASE("coupling matrix layout") {
  std::uint64_t rng = 21;
  const PhaseState s = testutil::rand_state(rng, 1);
  const double E_M = 0.1, alpha = 0.002;
  const MajoranaCoupling c = build_coupling(s, E_M, alpha);
  CHECK(c.A[3][4] == E_M * std::cos(0.5 * s.phip3));
  CHECK(c.A[4][5] == E_M * std::cos(0.5 * s.phip1));
  CHECK(c.A[5][3] == E_M * std::cos(0.5 * s.phip2));
  CHECK(c.A[0][3] == alpha);
  CHECK(c.A[1][4] == alpha);
  CHECK(c.A[2][5] == alpha);
  for (int j = 0; j < 6; ++j) {
    CHECK(c.A[j][j] == 0.0);
    for (int k = 0; k < 6; ++k) CHECK(c.A[j][k] == -c.A[k][j]);
  }
  // Entries with no matrix element: outer triangle and mismatched dimers.
  CHECK(c.A[0][1] == 0.0);
  CHECK(c.A[1][2] == 0.0);
  CHECK(c.A[0][4] == 0.0);
  CHECK(c.A[2][4] == 0.0);

  // phi'_1 / 2pi = 0.246 pins the junction 2-3 matrix element.
  const PhaseState ref =
      make_state(0, 0, 0, -0.123 * two_pi, -0.123 * two_pi, 0);
  CHECK(ref.phip1 == doctest::Approx(0.246 * two_pi).epsilon(1e-15));
  const MajoranaCoupling cr = build_coupling(ref, E_M, alpha);
  CHECK(cr.A[4][5] ==
        doctest::Approx(E_M * std::cos(0.246 * testutil::pi)).epsilon(1e-12));
}

TEST_CASE("zero coupling diagonalizes to nothing") {
  const MajoranaSpectrum sp = diagonalize(MajoranaCoupling{});
  CHECK(sp.energies[0] == 0.0);
  CHECK(sp.energies[1] == 0.0);
  CHECK(sp.energies[2] == 0.0);
  CHECK(max_abs_diff(matmul(transpose(sp.modes), sp.modes), identity6()) <
        1e-12);
  for (int j = 0; j < 6; ++j)
    for (int k = 0; k < 6; ++k) CHECK(sp.covariance[j][k] == 0.0);
}

TEST_CASE("bare trijunction spectrum at zero phases") {
  const double E_M = 0.1;
  const MajoranaSpectrum sp = spectrum_at(PhaseState{}, E_M, 0.0);
  CHECK(std::abs(sp.energies[0]) < 1e-14);
  CHECK(std::abs(sp.energies[1]) < 1e-14);
  CHECK(sp.energies[2] ==
        doctest::Approx(std::sqrt(3.0) * E_M).epsilon(1e-12));
}

TEST_CASE("closed-form spectrum on random trijunction phases") {
  std::uint64_t rng = 31;
  const double E_M = 0.1, alpha = 0.002;
  for (int i = 0; i < 40; ++i) {
    const PhaseState s = testutil::rand_state(rng, testutil::pick3(rng));
    const MajoranaSpectrum sp = spectrum_at(s, E_M, alpha);
    const double et = closed_form_transverse(s, E_M);
    const double root = std::sqrt(et * et + 4.0 * alpha * alpha);
    CHECK(std::abs(sp.energies[0] - 0.5 * (root - et)) < 1e-12);
    CHECK(std::abs(sp.energies[1] - alpha) < 1e-12);
    CHECK(std::abs(sp.energies[2] - 0.5 * (root + et)) < 1e-12);
    CHECK(sp.energies[0] <= sp.energies[1]);
    CHECK(sp.energies[1] <= sp.energies[2]);
  }
}

TEST_CASE("mode matrix is orthogonal and block-diagonalizes the coupling") {
  std::uint64_t rng = 41;
  const double E_M = 0.1, alpha = 0.002;
  for (int i = 0; i < 20; ++i) {
    const PhaseState s = testutil::rand_state(rng, 0);
    const MajoranaCoupling c = build_coupling(s, E_M, alpha);
    const MajoranaSpectrum sp = diagonalize(c);
    CHECK(max_abs_diff(matmul(transpose(sp.modes), sp.modes), identity6()) <
          1e-12);
    const Mat6 d = matmul(transpose(sp.modes), matmul(c.A, sp.modes));
    Mat6 want{};
    for (int k = 0; k < 3; ++k) {
      want[2 * k][2 * k + 1] = -sp.energies[k];
      want[2 * k + 1][2 * k] = sp.energies[k];
    }
    CHECK(max_abs_diff(d, want) < 1e-10);
  }
}

TEST_CASE("ground-state covariance squares to minus the identity") {
  std::uint64_t rng = 51;
  const double E_M = 0.1, alpha = 0.002;
  for (int i = 0; i < 20; ++i) {
    const PhaseState s = testutil::rand_state(rng, 0);
    const MajoranaSpectrum sp = spectrum_at(s, E_M, alpha);
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k)
        CHECK(sp.covariance[j][k] == -sp.covariance[k][j]);
    Mat6 m2 = matmul(sp.covariance, sp.covariance);
    for (int j = 0; j < 6; ++j) m2[j][j] += 1.0;
    double worst = 0.0;
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(m2[j][k]));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("decoupled dimers pair each outer mode with its trijunction partner") {
  const double alpha = 0.002;
  std::uint64_t rng = 61;
  const PhaseState s = testutil::rand_state(rng, 0);
  const MajoranaSpectrum sp = spectrum_at(s, 0.0, alpha);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(sp.energies[k] - alpha) < 1e-14);
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(sp.covariance[i][3 + i] - (-1.0)) < 1e-12);
    CHECK(std::abs(sp.covariance[3 + i][i] - 1.0) < 1e-12);
  }
  double off = 0.0;
  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 6; ++k) {
      if (k != (j + 3) % 6) off = std::max(off, std::abs(sp.covariance[j][k]));
    }
  }
  CHECK(off < 1e-12);
}

TEST_CASE("branch currents: zeros, oddness, and 4pi periodicity") {
  const double E_M = 0.1, alpha = 0.002;

  // All trijunction phases zero: every sin(phi'/2) factor vanishes.
  const std::array<double, 3> at0 =
      mzm_currents(PhaseState{}, spectrum_at(PhaseState{}, E_M, alpha), E_M);
  for (double v : at0) CHECK(v == 0.0);

  // Dimer limit: the trijunction block of the covariance is empty.
  std::uint64_t rng = 71;
  const PhaseState sd = testutil::rand_state(rng, 0);
  const std::array<double, 3> dimer =
      mzm_currents(sd, spectrum_at(sd, 0.0, alpha), 0.0);
  for (double v : dimer) CHECK(std::abs(v) < 1e-12);

  const PhaseState s = testutil::rand_state(rng, 0);
  const MajoranaSpectrum sp = spectrum_at(s, E_M, alpha);
  const std::array<double, 3> base = mzm_currents(s, sp, E_M);

  // Oddness in the phases at fixed covariance.
  PhaseState neg = s;
  neg.phip1 = -s.phip1;
  neg.phip2 = -s.phip2;
  neg.phip3 = -s.phip3;
  const std::array<double, 3> flipped = mzm_currents(neg, sp, E_M);
  for (int i = 0; i < 3; ++i) {
    CHECK(flipped[i] == doctest::Approx(-base[i]).epsilon(1e-12));
  }

  // 4pi periodicity at fixed covariance.
  PhaseState shifted = s;
  shifted.phip1 = s.phip1 + 2.0 * two_pi;
  shifted.phip2 = s.phip2 - 2.0 * two_pi;
  const std::array<double, 3> wrapped = mzm_currents(shifted, sp, E_M);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(wrapped[i] - base[i]) < 1e-12);
  }

  CHECK_THROWS_AS(static_cast<void>(mzm_currents(s, sp, -0.1)), std::invalid_argument);
}

TEST_CASE("active loop suppresses its own branch's Majorana current") {
  const CircuitParams p = default_params();
  const MinimizeResult r1 = minimize(Design::B, p, {0.42, 0.0, 0.0}, {});
  const MajoranaSpectrum sp1 = spectrum_at(r1.state, p.E_M, p.alpha);
  const std::array<double, 3> i1 = mzm_currents(r1.state, sp1, p.E_M);
  CHECK(std::abs(i1[0]) >= 1.2 * std::abs(i1[1]));
  CHECK(std::abs(std::abs(i1[1]) - std::abs(i1[2])) < 1e-8);
  CHECK(std::abs(i1[1]) > 1e-6);

  const MinimizeResult r3 = minimize(Design::B, p, {0.0, 0.0, 0.42}, {});
  const MajoranaSpectrum sp3 = spectrum_at(r3.state, p.E_M, p.alpha);
  const std::array<double, 3> i3 = mzm_currents(r3.state, sp3, p.E_M);
  CHECK(std::abs(i3[2]) >= 1.2 * std::abs(i3[0]));
  CHECK(std::abs(i3[2]) >= 1.2 * std::abs(i3[1]));
  CHECK(std::abs(std::abs(i3[0]) - std::abs(i3[1])) < 1e-8);
}

TEST_CASE("braid_schedule shape and waypoints") {
  const std::vector<FluxConfig> s = braid_schedule(4, 100);
  REQUIRE(s.size() == 301);
  CHECK(s.front().f1 == 0.42);
  CHECK(s.front().f2 == 0.0);
  CHECK(s.front().f3 == 0.0);
  CHECK(s[100].f3 == 0.42);
  CHECK(s[100].f1 == 0.0);
  CHECK(s[200].f2 == 0.42);
  CHECK(s.back().f1 == 0.42);
  CHECK(s.back().f3 == 0.0);
  CHECK(s[50].f1 == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(s[50].f3 == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(braid_schedule(2, 20).size() == 21);
  CHECK_THROWS_AS(static_cast<void>(braid_schedule(1, 100)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(braid_schedule(4, 19)), std::invalid_argument);
}

TEST_CASE("run_braid input validation") {
  const CircuitParams p = default_params();
  CHECK_THROWS_AS(static_cast<void>(run_braid(Design::B, p, {})), std::invalid_argument);
  CircuitParams dead = p;
  dead.alpha = 0.0;
  const std::vector<FluxConfig> sched(21, FluxConfig{0.42, 0.0, 0.0});
  CHECK_THROWS_AS(static_cast<void>(run_braid(Design::B, dead, sched)), std::invalid_argument);
  CircuitParams off = p;
  off.E_M = 0.0;
  CHECK_THROWS_AS(static_cast<void>(run_braid(Design::B, off, sched)), std::invalid_argument);
}

TEST_CASE("static schedule tracks to the identity") {
  const CircuitParams p = default_params();
  const std::vector<FluxConfig> sched(21, FluxConfig{0.42, 0.0, 0.0});
  const BraidTrace t = run_braid(Design::B, p, sched);
  REQUIRE(t.steps.size() == 21);
  CHECK(std::abs(t.overlap[0][0] - 1.0) < 1e-9);
  CHECK(std::abs(t.overlap[1][1] - 1.0) < 1e-9);
  CHECK(std::abs(t.overlap[0][1]) < 1e-9);
  CHECK(std::abs(t.overlap[1][0]) < 1e-9);
  CHECK(braid_verdict(t.overlap) == "identity");
  CHECK(t.min_step_overlap > 1.0 - 1e-9);
  for (const BraidStep& st : t.steps) {
    const double na = st.w_a[0] * st.w_a[0] + st.w_a[1] * st.w_a[1] +
                      st.w_a[2] * st.w_a[2];
    const double nb = st.w_b[0] * st.w_b[0] + st.w_b[1] * st.w_b[1] +
                      st.w_b[2] * st.w_b[2];
    CHECK(na == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nb == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("one leg transfers outer weight from branch 1 to branch 3") {
  const CircuitParams p = default_params();
  const BraidTrace t = run_braid(Design::B, p, braid_schedule(2, 40));
  REQUIRE(t.steps.size() == 41);
  const std::array<double, 3>& first = t.steps.front().w_b;
  const std::array<double, 3>& last = t.steps.back().w_b;
  // The tracked flat mode sheds weight on the active loop's Majorana.
  CHECK(first[0] < first[1] - 0.05);
  CHECK(first[0] < first[2] - 0.05);
  CHECK(last[2] < last[0] - 0.05);
  CHECK(last[2] < last[1] - 0.05);
  CHECK(last[0] - first[0] > 0.1);
  CHECK(t.min_step_overlap > 0.99);
}

TEST_CASE("full cycle is stable under step doubling") {
  const CircuitParams p = default_params();
  const BraidTrace coarse = run_braid(Design::B, p, braid_schedule(4, 30));
  const BraidTrace fine = run_braid(Design::B, p, braid_schedule(4, 60));
  CHECK(coarse.min_step_overlap > 0.99);
  CHECK(fine.min_step_overlap > 0.99);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(coarse.overlap[a][b] - fine.overlap[a][b]) < 1e-3);
    }
  }
  // The middle tracked mode has flux-independent energy alpha, so the cycle
  // closes without a crossing and the continuation returns to itself.
  for (const BraidStep& st : fine.steps) {
    CHECK(std::abs(st.spec.energies[1] - p.alpha) < 1e-12);
  }
  CHECK(braid_verdict(fine.overlap) == "identity");
}

TEST_CASE("braid_verdict classification") {
  CHECK(braid_verdict({{{1.0, 0.0}, {0.0, 1.0}}}) == "identity");
  CHECK(braid_verdict({{{-0.999, 0.01}, {0.02, 0.995}}}) == "identity");
  CHECK(braid_verdict({{{0.0, 1.0}, {-1.0, 0.0}}}) == "exchange");
  CHECK(braid_verdict({{{0.7, 0.7}, {0.7, 0.7}}}) == "mixed");
  CHECK(braid_verdict({{{1.0, 0.5}, {0.0, 1.0}}}) == "mixed");
}

}  // TEST_SUITE
