#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "triloop/batch.hpp"
#include "triloop/mzm.hpp"

namespace triloop {

/// Configuration or I/O problem: maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key-value run configuration; precedence CLI flag > file > default.
struct RunConfig {
  std::string design = "B";
  CircuitParams p = default_params();
  FluxConfig f{};
  WindingNumbers w{};
  int restarts = 8;
  int max_iter = 500;
  double grad_tol = 1e-10;
  std::uint64_t seed = 1;
  bool polish = true;
  bool scan_windings = false;
  int active_loop = 1;
  double f_mag = 0.42;
  double f1_from = 0.42, f2_from = 0.0, f3_from = 0.0;
  double f1_to = 0.0, f2_to = 0.0, f3_to = 0.42;
  int points = 43;
  bool warm_start = true;
  int jobs = 1;
  int legs = 4;
  int steps_per_leg = 100;
  int static_steps = 0;
  double target_phi_p = 0.124;
  double e_lo = 1e-4;
  double e_hi = 0.5;
  int n_states = 1000;
  double perturb = 0.0;
  std::string output = "-";

  [[nodiscard]] MinimizeOpts opts() const {
    return {restarts, max_iter, grad_tol, seed, polish, scan_windings};
  }
};

namespace {

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  using Setter = std::function<void(const nlohmann::json&)>;
  const std::map<std::string, Setter> set = {
      {"design", [&](const auto& v) { c.design = v.template get<std::string>(); }},
      {"L_K", [&](const auto& v) { c.p.L_K = v.template get<double>(); }},
      {"L_s", [&](const auto& v) { c.p.L_s = v.template get<double>(); }},
      {"Lp_K", [&](const auto& v) { c.p.Lp_K = v.template get<double>(); }},
      {"Lp_s", [&](const auto& v) { c.p.Lp_s = v.template get<double>(); }},
      {"Lt_K", [&](const auto& v) { c.p.Lt_K = v.template get<double>(); }},
      {"Lt_s", [&](const auto& v) { c.p.Lt_s = v.template get<double>(); }},
      {"E_J", [&](const auto& v) { c.p.E_J = v.template get<double>(); }},
      {"E_Jp", [&](const auto& v) { c.p.E_Jp = v.template get<double>(); }},
      {"E_M", [&](const auto& v) { c.p.E_M = v.template get<double>(); }},
      {"alpha", [&](const auto& v) { c.p.alpha = v.template get<double>(); }},
      {"f1", [&](const auto& v) { c.f.f1 = v.template get<double>(); }},
      {"f2", [&](const auto& v) { c.f.f2 = v.template get<double>(); }},
      {"f3", [&](const auto& v) { c.f.f3 = v.template get<double>(); }},
      {"m1", [&](const auto& v) { c.w.m1 = v.template get<int>(); }},
      {"m2", [&](const auto& v) { c.w.m2 = v.template get<int>(); }},
      {"m3", [&](const auto& v) { c.w.m3 = v.template get<int>(); }},
      {"n", [&](const auto& v) { c.w.n = v.template get<int>(); }},
      {"n_prime", [&](const auto& v) { c.w.n_prime = v.template get<int>(); }},
      {"restarts", [&](const auto& v) { c.restarts = v.template get<int>(); }},
      {"max_iter", [&](const auto& v) { c.max_iter = v.template get<int>(); }},
      {"grad_tol", [&](const auto& v) { c.grad_tol = v.template get<double>(); }},
      {"seed", [&](const auto& v) { c.seed = v.template get<std::uint64_t>(); }},
      {"polish", [&](const auto& v) { c.polish = v.template get<bool>(); }},
      {"scan_windings",
       [&](const auto& v) { c.scan_windings = v.template get<bool>(); }},
      {"active_loop", [&](const auto& v) { c.active_loop = v.template get<int>(); }},
      {"f_mag", [&](const auto& v) { c.f_mag = v.template get<double>(); }},
      {"f1_from", [&](const auto& v) { c.f1_from = v.template get<double>(); }},
      {"f2_from", [&](const auto& v) { c.f2_from = v.template get<double>(); }},
      {"f3_from", [&](const auto& v) { c.f3_from = v.template get<double>(); }},
      {"f1_to", [&](const auto& v) { c.f1_to = v.template get<double>(); }},
      {"f2_to", [&](const auto& v) { c.f2_to = v.template get<double>(); }},
      {"f3_to", [&](const auto& v) { c.f3_to = v.template get<double>(); }},
      {"points", [&](const auto& v) { c.points = v.template get<int>(); }},
      {"warm_start", [&](const auto& v) { c.warm_start = v.template get<bool>(); }},
      {"jobs", [&](const auto& v) { c.jobs = v.template get<int>(); }},
      {"legs", [&](const auto& v) { c.legs = v.template get<int>(); }},
      {"steps_per_leg",
       [&](const auto& v) { c.steps_per_leg = v.template get<int>(); }},
      {"static_steps",
       [&](const auto& v) { c.static_steps = v.template get<int>(); }},
      {"target_phi_p",
       [&](const auto& v) { c.target_phi_p = v.template get<double>(); }},
      {"e_lo", [&](const auto& v) { c.e_lo = v.template get<double>(); }},
      {"e_hi", [&](const auto& v) { c.e_hi = v.template get<double>(); }},
      {"n_states", [&](const auto& v) { c.n_states = v.template get<int>(); }},
      {"perturb", [&](const auto& v) { c.perturb = v.template get<double>(); }},
      {"output", [&](const auto& v) { c.output = v.template get<std::string>(); }},
  };
  for (const auto& [key, val] : j.items()) {
    const auto it = set.find(key);
    if (it == set.end()) throw ConfigError("unknown config key: " + key);
    try {
      it->second(val);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key has wrong type: " + key);
    }
  }
}

std::string prescan_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void add_common_options(CLI::App* cmd, RunConfig& c, std::string& config_sink) {
  cmd->add_option("--config", config_sink,
                  "flat JSON config file (applied before flags)");
  cmd->add_option("--design", c.design, "A | B | A_limit");
  cmd->add_option("--L_K", c.p.L_K);
  cmd->add_option("--L_s", c.p.L_s);
  cmd->add_option("--Lp_K", c.p.Lp_K);
  cmd->add_option("--Lp_s", c.p.Lp_s);
  cmd->add_option("--Lt_K", c.p.Lt_K);
  cmd->add_option("--Lt_s", c.p.Lt_s);
  cmd->add_option("--E_J", c.p.E_J);
  cmd->add_option("--E_Jp", c.p.E_Jp);
  cmd->add_option("--E_M", c.p.E_M);
  cmd->add_option("--alpha", c.p.alpha);
  cmd->add_option("--f1", c.f.f1);
  cmd->add_option("--f2", c.f.f2);
  cmd->add_option("--f3", c.f.f3);
  cmd->add_option("--m1", c.w.m1);
  cmd->add_option("--m2", c.w.m2);
  cmd->add_option("--m3", c.w.m3);
  cmd->add_option("--n", c.w.n);
  cmd->add_option("--n_prime", c.w.n_prime);
  cmd->add_option("--restarts", c.restarts);
  cmd->add_option("--max_iter", c.max_iter);
  cmd->add_option("--grad_tol", c.grad_tol);
  cmd->add_option("--seed", c.seed);
  cmd->add_option("--polish", c.polish);
  cmd->add_option("--scan_windings", c.scan_windings);
  cmd->add_option("--active_loop", c.active_loop);
  cmd->add_option("--f_mag", c.f_mag);
  cmd->add_option("--f1_from", c.f1_from);
  cmd->add_option("--f2_from", c.f2_from);
  cmd->add_option("--f3_from", c.f3_from);
  cmd->add_option("--f1_to", c.f1_to);
  cmd->add_option("--f2_to", c.f2_to);
  cmd->add_option("--f3_to", c.f3_to);
  cmd->add_option("--points", c.points);
  cmd->add_option("--warm_start", c.warm_start);
  cmd->add_option("--jobs", c.jobs);
  cmd->add_option("--legs", c.legs);
  cmd->add_option("--steps_per_leg", c.steps_per_leg);
  cmd->add_option("--static_steps", c.static_steps);
  cmd->add_option("--target_phi_p", c.target_phi_p);
  cmd->add_option("--e_lo", c.e_lo);
  cmd->add_option("--e_hi", c.e_hi);
  cmd->add_option("--n_states", c.n_states);
  cmd->add_option("--perturb", c.perturb);
  cmd->add_option("--output", c.output, "output path, '-' for stdout");
}

std::FILE* open_output(const std::string& path) {
  if (path == "-") return stdout;
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw ConfigError("cannot open output file: " + path);
  return f;
}

void close_output(std::FILE* f) {
  if (f != stdout) std::fclose(f);
}

}  // namespace

// nlohmann ADL serializers: JSON mirrors the domain types field-for-field.
void to_json(nlohmann::json& j, const PhaseState& s) {
  j = {{"phi1", s.phi1},   {"phi2", s.phi2},   {"phi3", s.phi3},
       {"phip1", s.phip1}, {"phip2", s.phip2}, {"phip3", s.phip3}};
}
void to_json(nlohmann::json& j, const ReducedCoords& r) {
  j = {{"phi_p", r.phi_p},
       {"phi_m", r.phi_m},
       {"phip_p", r.phip_p},
       {"phip_m", r.phip_m},
       {"phi1", r.phi1}};
}
void to_json(nlohmann::json& j, const WindingNumbers& w) {
  j = {{"m1", w.m1}, {"m2", w.m2}, {"m3", w.m3}, {"n", w.n},
       {"n_prime", w.n_prime}};
}
void to_json(nlohmann::json& j, const CurrentReport& c) {
  j = {{"I1", c.I1},   {"I2", c.I2},   {"I3", c.I3},
       {"Ip1", c.Ip1}, {"Ip2", c.Ip2}, {"Ip3", c.Ip3}};
}
void to_json(nlohmann::json& j, const CircuitParams& p) {
  j = {{"L_K", p.L_K},   {"L_s", p.L_s},   {"Lp_K", p.Lp_K},
       {"Lp_s", p.Lp_s}, {"Lt_K", p.Lt_K}, {"Lt_s", p.Lt_s},
       {"E_J", p.E_J},   {"E_Jp", p.E_Jp}, {"E_M", p.E_M},
       {"alpha", p.alpha}};
}
void to_json(nlohmann::json& j, const MinimizeResult& r) {
  j = {{"state", r.state},
       {"reduced", r.reduced},
       {"energy", r.energy},
       {"grad_norm", r.grad_norm},
       {"windings_used", r.windings_used},
       {"converged", r.converged},
       {"n_restarts_used", r.n_restarts_used}};
}
void to_json(nlohmann::json& j, const Routing& r) {
  j = {{"isolated_branch", r.isolated_branch},
       {"conducting_pair", r.conducting_pair},
       {"currents", r.currents}};
}

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

void print_json(const nlohmann::json& j) {
  std::fputs(j.dump(2).c_str(), stdout);
  std::fputc('\n', stdout);
}

/// Gradient and reduction property suites at the config's parameters; the
/// perturbation (test hook) shifts the potential seen by the finite
/// difference so a corrupted gradient is guaranteed to be caught.
int cmd_verify(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  if (cfg.n_states < 1) throw ConfigError("n_states must be >= 1");
  const IdentitySuiteReport rep =
      identity_suite(d, cfg.p, cfg.n_states, cfg.seed, 1);
  double max_grad = 0.0, max_red_a = 0.0, max_red_b = 0.0;
  CircuitParams pa = cfg.p;   // l' -> 0 substitution for the Eq.-(12) limit
  pa.L_K = pa.Lp_K = pa.Lp_s = 0.0;
  CircuitParams pb = cfg.p;   // Lt_eff = Lp_eff for the Eq.-(18) reduction
  pb.Lt_K = pb.Lp_K;
  pb.Lt_s = pb.Lp_s;
  std::uint64_t st = cfg.seed ^ 0x5bf0f3a5c0de5eedull;
  for (int i = 0; i < 100; ++i) {
    const FluxConfig f = {uniform01(st) - 0.5, uniform01(st) - 0.5,
                          uniform01(st) - 0.5};
    const WindingNumbers w = {static_cast<int>(splitmix64(st) % 3) - 1,
                              static_cast<int>(splitmix64(st) % 3) - 1,
                              static_cast<int>(splitmix64(st) % 3) - 1, 0,
                              static_cast<int>(splitmix64(st) % 3) - 1};
    const PhaseState s = make_state(
        two_pi * uniform01(st) - pi, two_pi * uniform01(st) - pi,
        two_pi * uniform01(st) - pi, two_pi * uniform01(st) - pi,
        two_pi * uniform01(st) - pi, w.n_prime);
    const std::array<double, 5> g = grad_u_eff(d, cfg.p, f, w, s);
    const std::array<double, 5> x = pack(to_reduced(s, w));
    constexpr double h = 1e-5;
    double diff = 0.0, fd_scale = 0.0;
    for (int jdx = 0; jdx < 5; ++jdx) {
      std::array<double, 5> xp = x, xm = x;
      xp[jdx] += h;
      xm[jdx] -= h;
      const PhaseState sp = from_reduced(unpack(xp), w);
      const PhaseState sm = from_reduced(unpack(xm), w);
      const double up = u_eff(d, cfg.p, f, w, sp) + cfg.perturb * std::sin(sp.phi1);
      const double um = u_eff(d, cfg.p, f, w, sm) + cfg.perturb * std::sin(sm.phi1);
      const double fd = (up - um) / (2.0 * h);
      diff = std::max(diff, std::abs(g[jdx] - fd));
      fd_scale = std::max(fd_scale, std::abs(fd));
    }
    max_grad = std::max(max_grad, diff / std::max(fd_scale, 1e-6));
    max_red_a = std::max(max_red_a,
                         std::abs(u_eff_a(pa, f, w, s) - u_eff_a_limit(pa, f, w, s)));
    const FluxConfig fb = {f.f1, 0.0, 0.0};
    WindingNumbers wb = w;
    wb.n = w.m1 + w.m2 + w.m3 - w.n_prime;
    max_red_b = std::max(
        max_red_b, std::abs(u_eff_b(pb, fb, wb, s) - u_eff_a(pb, fb, wb, s)));
  }
  const bool pass = rep.max_qk < 1e-10 && rep.max_qkp < 1e-10 &&
                    rep.max_grad_rel < 1e-6 && max_grad < 1e-6 &&
                    max_red_a < 1e-12 && max_red_b < 1e-10;
  std::printf("design                         %s\n", design_name(d).c_str());
  std::printf("states                         %d\n", rep.n_states);
  std::printf("max QK residual                %.3e  (tol 1e-10)\n", rep.max_qk);
  std::printf("max QK' residual               %.3e  (tol 1e-10)\n", rep.max_qkp);
  std::printf("max gradient rel. error        %.3e  (tol 1e-6)\n",
              std::max(rep.max_grad_rel, max_grad));
  std::printf("max reduction (a) residual     %.3e  (tol 1e-12)\n", max_red_a);
  std::printf("max reduction (b) residual     %.3e  (tol 1e-10)\n", max_red_b);
  std::printf("verify: %s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_minimize(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  const MinimizeResult res = minimize(d, cfg.p, cfg.f, cfg.w, cfg.opts());
  print_json(nlohmann::json(res));
  return 0;
}

int cmd_route(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  const Routing r =
      route(d, cfg.p, cfg.active_loop, cfg.f_mag, cfg.w, cfg.opts());
  print_json(nlohmann::json(r));
  return 0;
}

void write_sweep_csv(std::FILE* out, const std::vector<SweepRow>& rows,
                     const CircuitParams& p) {
  std::fputs(
      "f1,f2,f3,phi_p,phi_m,phip_p,phip_m,phi1,U,I1,I2,I3,Ip1,Ip2,Ip3,"
      "mzmI1,mzmI2,mzmI3\n",
      out);
  for (const SweepRow& r : rows) {
    const MajoranaSpectrum spec =
        diagonalize(build_coupling(r.min.state, p.E_M, p.alpha));
    const std::array<double, 3> mzm = mzm_currents(r.min.state, spec, p.E_M);
    std::fprintf(out,
                 "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,"
                 "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e\n",
                 r.f.f1, r.f.f2, r.f.f3, r.min.reduced.phi_p, r.min.reduced.phi_m,
                 r.min.reduced.phip_p, r.min.reduced.phip_m, r.min.reduced.phi1,
                 r.min.energy, r.cur.I1, r.cur.I2, r.cur.I3, r.cur.Ip1, r.cur.Ip2,
                 r.cur.Ip3, mzm[0], mzm[1], mzm[2]);
  }
}

int cmd_sweep(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  if (cfg.jobs > 1 && cfg.warm_start) {
    throw ConfigError("--jobs > 1 requires warm_start = false");
  }
  const std::vector<FluxConfig> sched =
      ramp_schedule({cfg.f1_from, cfg.f2_from, cfg.f3_from},
                    {cfg.f1_to, cfg.f2_to, cfg.f3_to}, cfg.points);
  std::vector<SweepRow> rows;
  if (cfg.warm_start) {
    rows = sweep(d, cfg.p, sched, cfg.w, cfg.opts(), true);
  } else if (cfg.jobs > 1) {
    rows = sweep_parallel(d, cfg.p, sched, cfg.w, cfg.opts(), cfg.jobs);
  } else {
    rows = sweep(d, cfg.p, sched, cfg.w, cfg.opts(), false);
  }
  std::FILE* out = open_output(cfg.output);
  write_sweep_csv(out, rows, cfg.p);
  close_output(out);
  return 0;
}

int cmd_braid(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  std::vector<FluxConfig> sched;
  if (cfg.static_steps > 0) {
    sched.assign(static_cast<std::size_t>(cfg.static_steps) + 1, cfg.f);
  } else {
    sched = braid_schedule(cfg.legs, cfg.steps_per_leg);
  }
  const BraidTrace trace = run_braid(d, cfg.p, sched, cfg.opts());
  if (cfg.output != "-") {
    std::FILE* out = open_output(cfg.output);
    std::fputs(
        "step,f1,f2,f3,phi_p,phi_m,phip_p,phip_m,phi1,U,eps1,eps2,eps3,"
        "wa1,wa2,wa3,wb1,wb2,wb3\n",
        out);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const BraidStep& s = trace.steps[i];
      std::fprintf(out,
                   "%zu,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,"
                   "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%.11e\n",
                   i, s.f.f1, s.f.f2, s.f.f3, s.min.reduced.phi_p,
                   s.min.reduced.phi_m, s.min.reduced.phip_p, s.min.reduced.phip_m,
                   s.min.reduced.phi1, s.min.energy, s.spec.energies[0],
                   s.spec.energies[1], s.spec.energies[2], s.w_a[0], s.w_a[1],
                   s.w_a[2], s.w_b[0], s.w_b[1], s.w_b[2]);
    }
    close_output(out);
  }
  const std::string verdict = braid_verdict(trace.overlap);
  nlohmann::json j = {
      {"steps", trace.steps.size()},
      {"overlap",
       {{trace.overlap[0][0], trace.overlap[0][1]},
        {trace.overlap[1][0], trace.overlap[1][1]}}},
      {"verdict", verdict}};
  print_json(j);
  return verdict == "mixed" ? 1 : 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  const Design d = parse_design(cfg.design);
  validate_params(cfg.p);
  const CircuitParams fitted = calibrate(d, cfg.p, cfg.target_phi_p, cfg.f_mag,
                                         cfg.opts(), cfg.e_lo, cfg.e_hi);
  print_json(nlohmann::json(fitted));
  return 0;
}

}  // namespace
}  // namespace triloop

int main(int argc, char** argv) {
  using namespace triloop;
  CLI::App app{"three-junction loop + Majorana trijunction simulator"};
  app.require_subcommand(1);
  RunConfig cfg;
  try {
    const std::string path = prescan_config_path(argc, argv);
    if (!path.empty()) apply_config_file(cfg, path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  CLI::App* verify = app.add_subcommand("verify", "identity / gradient suites");
  CLI::App* minimize = app.add_subcommand("minimize", "ground-state search");
  CLI::App* route = app.add_subcommand("route", "circulator branch selection");
  CLI::App* sweepc = app.add_subcommand("sweep", "flux ramp to CSV");
  CLI::App* braid = app.add_subcommand("braid", "adiabatic braid run");
  CLI::App* calib = app.add_subcommand("calibrate", "junction-scale fit");
  std::string config_sink;
  for (CLI::App* c : {verify, minimize, route, sweepc, braid, calib}) {
    add_common_options(c, cfg, config_sink);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (verify->parsed()) return cmd_verify(cfg);
    if (minimize->parsed()) return cmd_minimize(cfg);
    if (route->parsed()) return cmd_route(cfg);
    if (sweepc->parsed()) return cmd_sweep(cfg);
    if (braid->parsed()) return cmd_braid(cfg);
    if (calib->parsed()) return cmd_calibrate(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DegenerateRoutingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const TrackingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const MinimizeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const SweepError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const CalibrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
