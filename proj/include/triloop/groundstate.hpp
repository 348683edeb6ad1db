#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "triloop/circuit.hpp"
#include "triloop/potential.hpp"

/// Ground-state search over the five reduced phase coordinates, degeneracy
/// detection, circulator routing, flux sweeps, and the E_J calibration that
/// pins the default parameter set.
namespace triloop {

struct MinimizeOpts {
  int n_restarts = 8;       ///< multi-start count, >= 8 (contract precondition)
  int max_iter = 500;       ///< BFGS iteration cap per restart
  double grad_tol = 1e-10;  ///< termination on the max-norm of the gradient
  std::uint64_t seed = 1;   ///< single source of all start-point randomness
  bool polish = true;       ///< Newton refinement after BFGS convergence
  bool scan_windings = false;  ///< scan m_i, n in {-1,0,1}; reports best sector
};

struct MinimizeResult {
  PhaseState state;
  ReducedCoords reduced;
  double energy = 0;
  double grad_norm = 0;  ///< max-norm of the reduced gradient at the result
  WindingNumbers windings_used;
  bool converged = false;
  int n_restarts_used = 0;
};

/// Raised when no restart reaches grad_tol; carries the best iterate found.
struct MinimizeError : std::runtime_error {
  MinimizeError(const std::string& msg, MinimizeResult best_iterate)
      : std::runtime_error(msg), best(std::move(best_iterate)) {}
  MinimizeResult best;
};

/// Raised by route() when the ground state cannot single out a branch:
/// degenerate minima (f = 0.5) or current magnitudes too close to classify.
struct DegenerateRoutingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Routing {
  int isolated_branch = 0;               ///< in {1,2,3}
  std::array<int, 2> conducting_pair{};  ///< the other two, ascending
  CurrentReport currents;
};

struct SweepRow {
  FluxConfig f;
  MinimizeResult min;
  CurrentReport cur;
};

/// Raised when a sweep point fails to converge; carries the completed rows.
struct SweepError : std::runtime_error {
  SweepError(const std::string& msg, std::vector<SweepRow> rows)
      : std::runtime_error(msg), partial(std::move(rows)) {}
  std::vector<SweepRow> partial;
};

/// Raised when calibrate() cannot bracket the target; reports what the
/// search range achieved.
struct CalibrationError : std::runtime_error {
  CalibrationError(const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), achieved_lo(lo), achieved_hi(hi) {}
  double achieved_lo, achieved_hi;
};

/// Global minimization by deterministic seeded multi-start (origin plus a
/// Kronecker low-discrepancy sequence on [-pi, pi)^5), BFGS descent with
/// backtracking line search, and optional Newton polish.  Energy is monotone
/// nonincreasing within each restart; the returned minimum is the best over
/// all restarts, gauge-fixed to the 2pi-translation copy of smallest
/// coordinate norm.  Deterministic for a given seed.
MinimizeResult minimize(Design d, const CircuitParams& p, const FluxConfig& f,
                        const WindingNumbers& w, const MinimizeOpts& opts = {});

/// Single descent from an explicit starting point; no multi-start, no
/// restart-count precondition.  Used for warm-started continuation (sweeps,
/// braids, calibration refinement).  May return converged = false.
MinimizeResult minimize_warm(Design d, const CircuitParams& p, const FluxConfig& f,
                             const WindingNumbers& w, const ReducedCoords& start,
                             const MinimizeOpts& opts = {});

/// All distinct local minima found by the restart set, clustered with
/// tolerance 1e-4 rad per phase on the torus (2pi-translation copies merge),
/// sorted by energy.
std::vector<MinimizeResult> find_degenerate_minima(Design d, const CircuitParams& p,
                                                   const FluxConfig& f,
                                                   const WindingNumbers& w,
                                                   const MinimizeOpts& opts = {});

/// Threads flux f_mag through loop `active_loop` only, minimizes, and
/// classifies which branch carries no current.  Throws
/// DegenerateRoutingError when two minima are degenerate within 1e-9 or the
/// isolated/max current ratio is weaker than 10 (both occur at f = 0.5).
Routing route(Design d, const CircuitParams& p, int active_loop,
              double f_mag = 0.42, const WindingNumbers& w = {},
              const MinimizeOpts& opts = {});

/// Minimizes along a flux schedule.  warm_start = true (default) seeds each
/// point with the previous minimum (sequential by contract); otherwise every
/// point runs the full multi-start independently.  Throws SweepError with the
/// partial table on convergence failure.
std::vector<SweepRow> sweep(Design d, const CircuitParams& p,
                            const std::vector<FluxConfig>& schedule,
                            const WindingNumbers& w, const MinimizeOpts& opts = {},
                            bool warm_start = true);

/// Linear ramp helper: `points` flux configurations from `a` to `b` inclusive.
[[nodiscard]] std::vector<FluxConfig> ramp_schedule(const FluxConfig& a,
                                                    const FluxConfig& b, int points);

/// Monotone 1-D search over the common junction-energy scale (E_Jp/E_J ratio
/// held fixed at base's value) such that the f = (f_mag, 0, 0) ground state
/// lands at phi_p/2pi = target within 1e-3.  Search range [e_lo, e_hi] in
/// units u.  Returns base with E_J, E_Jp replaced; throws CalibrationError
/// listing the achieved bracket when the target is unreachable.
CircuitParams calibrate(Design d, const CircuitParams& base,
                        double target_phi_p = 0.124, double f_mag = 0.42,
                        const MinimizeOpts& opts = {}, double e_lo = 1e-4,
                        double e_hi = 0.5);

}  // namespace triloop
