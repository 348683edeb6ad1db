#pragma once

#include <cstdint>
#include <vector>

#include "triloop/groundstate.hpp"

/// OpenMP-parallel batch kernels with serial reference semantics: every
/// result is a pure function of its index, so jobs = 1 and jobs = N produce
/// identical reports and rows (max-reductions are order-independent).
namespace triloop {

struct IdentitySuiteReport {
  int n_states = 0;
  double max_qk = 0;        ///< worst loop-rule residual, units u
  double max_qkp = 0;       ///< worst trijunction-rule residual, units u
  double max_grad_rel = 0;  ///< worst relative error, analytic vs central FD
};

/// Runs the QK / QK' / gradient identity checks on n deterministic random
/// states (phases uniform on [-pi, pi), windings in {-1, 0, 1}, fluxes in
/// [-0.5, 0.5)).  jobs >= 1 selects the OpenMP thread count when available.
[[nodiscard]] IdentitySuiteReport identity_suite(Design d, const CircuitParams& p,
                                                 int n_states,
                                                 std::uint64_t seed,
                                                 int jobs = 1);

/// Independent full-multistart minimization at every schedule point; rows
/// match sweep(..., warm_start = false) exactly for any jobs value.  Throws
/// SweepError carrying the contiguous prefix before the first failed point.
[[nodiscard]] std::vector<SweepRow> sweep_parallel(
    Design d, const CircuitParams& p, const std::vector<FluxConfig>& schedule,
    const WindingNumbers& w, const MinimizeOpts& opts, int jobs);

}  // namespace triloop
