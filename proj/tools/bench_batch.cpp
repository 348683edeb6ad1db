#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "triloop/batch.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double run_identity(int jobs, double& checksum) {
  const triloop::CircuitParams p = triloop::default_params();
  const auto t0 = Clock::now();
  const triloop::IdentitySuiteReport rep =
      triloop::identity_suite(triloop::Design::B, p, 20000, 1, jobs);
  const auto t1 = Clock::now();
  checksum = rep.max_qk + rep.max_qkp + rep.max_grad_rel;
  return std::chrono::duration<double>(t1 - t0).count();
}

double run_sweep(int jobs, double& checksum) {
  const triloop::CircuitParams p = triloop::default_params();
  const auto sched =
      triloop::ramp_schedule({0.42, 0.0, 0.0}, {0.0, 0.0, 0.42}, 24);
  const auto t0 = Clock::now();
  const auto rows =
      triloop::sweep_parallel(triloop::Design::B, p, sched, {}, {}, jobs);
  const auto t1 = Clock::now();
  checksum = 0.0;
  for (const auto& r : rows) checksum += r.min.energy;
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
  const int hw = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  std::printf("kernel            jobs   time [s]   checksum            match\n");
  double c_serial = 0.0, c_par = 0.0;
  const double ti1 = run_identity(1, c_serial);
  std::printf("identity_suite    %4d   %8.3f   %.12e  %s\n", 1, ti1, c_serial,
              "ref");
  const double tin = run_identity(hw, c_par);
  std::printf("identity_suite    %4d   %8.3f   %.12e  %s\n", hw, tin, c_par,
              c_par == c_serial ? "yes" : "NO");
  std::printf("identity_suite speedup: %.2fx\n", ti1 / tin);
  const double ts1 = run_sweep(1, c_serial);
  std::printf("sweep_parallel    %4d   %8.3f   %.12e  %s\n", 1, ts1, c_serial,
              "ref");
  const double tsn = run_sweep(hw, c_par);
  std::printf("sweep_parallel    %4d   %8.3f   %.12e  %s\n", hw, tsn, c_par,
              c_par == c_serial ? "yes" : "NO");
  std::printf("sweep_parallel speedup: %.2fx\n", ts1 / tsn);
  return 0;
}
