// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Runtime limits are part of each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochspin/experiment/runner.hpp"
#include "stochspin/stochspin.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace stochspin;
using namespace stochspin::experiment;

namespace {

unsigned g_threads = 0;
fs::path g_root;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

RunSummary run(const std::string& name, const std::string& scenario, std::uint64_t seed, const std::string& params,
               unsigned threads = g_threads) {
  const auto r = parse_config("[scenario]\nname = " + scenario + "\nseed = " + std::to_string(seed) +
                              "\n[parameters]\n" + params);
  if (!r.ok()) throw std::runtime_error(name + " config:\n" + r.error_report());
  ScenarioConfig cfg = *r.config;
  cfg.output_dir = (g_root / name).string();
  fs::remove_all(cfg.output_dir);
  return run_scenario(cfg, {threads});
}

CsvTable artifact(const std::string& run_name, const std::string& file) {
  return read_csv((g_root / run_name / file).string());
}

// --- 1 ---------------------------------------------------------------------

Outcome spin_algebra() {
  Outcome o;
  double eig_err = 0.0;
  const double r = std::sqrt(0.5);
  const std::pair<Axis, std::array<Spinor, 2>> cases[] = {
      {Axis::x, {Spinor(r, r), Spinor(r, -r)}},
      {Axis::y, {Spinor(r, Complex(0, r)), Spinor(r, Complex(0, -r))}},
      {Axis::z, {Spinor::up(), Spinor::down()}},
  };
  for (const auto& [axis, vecs] : cases) {
    const SpinOperator s = pauli(axis);
    for (int k = 0; k < 2; ++k) {
      const double lambda = k == 0 ? 0.5 : -0.5;
      const auto [a, b] = s.apply(vecs[k]);
      eig_err = std::max({eig_err, std::abs(a - lambda * vecs[k].alpha()), std::abs(b - lambda * vecs[k].beta())});
    }
  }
  o.check(eig_err <= 1e-14, "eigenrelation error " + num(eig_err));

  gen::Gen g(1);
  double norm_err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto [a, b] = g.unit_spinor();
    const SpinOperator H(g.hermitian(g.uniform(0.01, 10.0)), 1.0);
    norm_err = std::max(norm_err, std::abs(evolve_spinor(Spinor(a, b), H, g.uniform(-20, 20)).norm_squared() - 1.0));
  }
  o.check(norm_err <= 1e-12, "unitarity error over 1e4 cases " + num(norm_err));

  const SpinOperator sx = pauli(Axis::x);
  const double t = std::numbers::pi;
  oracle::Mat2 gen_matrix;
  for (int i = 0; i < 4; ++i) gen_matrix[i] = Complex(0, -t) * sx.entries()[i];
  const auto U = oracle::expm(gen_matrix);
  const Spinor flipped = evolve_spinor(Spinor::up(), sx, t);
  const double flip_err = std::max(std::abs(flipped.alpha() - U[0]), std::abs(flipped.beta() - U[2]));
  o.check(flip_err <= 1e-10 && flipped.equals_up_to_phase(Spinor::down(), 1e-10), "half-period flip vs expm " + num(flip_err));
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome ou_moments() {
  Outcome o;
  run("c2", "ou_relax", 42,
      "omega = 1\nsigma = 1\nx0 = 1\ndt = 0.001\nt_final = 3\nn_particles = 100000\ncheckpoints = 10\n");
  const auto t = artifact("c2", "ou_moments.csv");
  const auto times = t.numeric_column("t");
  const auto mean = t.numeric_column("mean");
  const auto var = t.numeric_column("variance");
  const auto mse = t.numeric_column("mean_se");
  const auto vse = t.numeric_column("variance_se");
  double zm = 0, zv = 0;
  std::size_t checkpoints = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] <= 0.0) continue;
    ++checkpoints;
    const auto [em, ev] = oracle::ou_moments_quadrature(1.0, 1.0, 1.0, times[k]);
    zm = std::max(zm, std::abs(mean[k] - em) / mse[k]);
    zv = std::max(zv, std::abs(var[k] - ev) / vse[k]);
  }
  o.check(checkpoints == 10, num(static_cast<double>(checkpoints)) + " checkpoints");
  o.check(zm <= 3.0, "max |mean z| " + num(zm));
  o.check(zv <= 3.0, "max |variance z| " + num(zv));
  return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome stationarity() {
  Outcome o;
  const auto s = run("c3", "fp_stationary", 1, "omega = 1\nsigma = 1\ndensity = gaussian\nn_cells = 512\nt_final = 1\n");
  o.check(s.metric("l1_change") < 1e-3, "L1 change " + num(s.metric("l1_change")));
  o.check(s.metric("max_mass_error") <= 1e-9, "mass error " + num(s.metric("max_mass_error")));
  return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome mc_fp() {
  Outcome o;
  const auto s = run("c4", "mc_fp_xval", 7, "omega = 1\nsigma = 1\nx0 = 1\nt_final = 2\nn_particles = 100000\n");
  o.check(s.metric("l1_distance") < 0.05, "L1 " + num(s.metric("l1_distance")));
  return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome born_statistics() {
  Outcome o;
  const std::size_t n = 100000;
  const double sigma_z = 0.05, grad = -2.0;
  const auto s = run("c5", "stern_gerlach", 2024,
                     "alpha_re = 0.6\nbeta_re = 0.8\ngrad_bz = -2\nsigma_z = 0.05\nn_particles = 100000\n");
  const double band = 3.0 * std::sqrt(0.36 * 0.64 / static_cast<double>(n));
  o.check(std::abs(s.metric("up_fraction") - 0.36) <= band,
          "up fraction " + num(s.metric("up_fraction")) + " (band " + num(band) + ")");

  // ballistic oracle with m = gamma = hbar = 1 and unit lengths and speed
  const double t1 = 1.0, t2 = 1.0;
  const double a_up = 0.5 * grad, a_down = -0.5 * grad;
  const double z_up = 0.5 * a_up * t1 * t1 + a_up * t1 * t2;
  const double z_down = 0.5 * a_down * t1 * t1 + a_down * t1 * t2;
  const auto summary = artifact("c5", "plate_summary.csv");
  const auto counts = summary.numeric_column("count");
  const double se_up = sigma_z / std::sqrt(counts[0]);
  const double se_down = sigma_z / std::sqrt(counts[1]);
  o.check(std::abs(s.metric("mean_z_up") - z_up) <= 3 * se_up,
          "up mean z " + num(s.metric("mean_z_up")) + " vs " + num(z_up));
  o.check(std::abs(s.metric("mean_z_down") - z_down) <= 3 * se_down,
          "down mean z " + num(s.metric("mean_z_down")) + " vs " + num(z_down));

  const auto hist = artifact("c5", "plate_histogram.csv");
  const auto x = hist.numeric_column("x");
  const auto rho = hist.numeric_column("rho");
  const double dx = x[1] - x[0];
  std::size_t peak_neg = 0, peak_pos = x.size() - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 && rho[i] > rho[peak_neg]) peak_neg = i;
    if (x[i] > 0 && rho[i] > rho[peak_pos]) peak_pos = i;
  }
  o.check(s.metric("n_modes") == 2.0, "modes " + num(s.metric("n_modes")));
  o.check(std::abs(x[peak_neg] + x[peak_pos]) <= dx + 1e-12,
          "mode centres " + num(x[peak_neg]) + ", " + num(x[peak_pos]));
  return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome momentum_limit() {
  Outcome o;
  BeamConfig beam;
  beam.mass = 1.7;
  beam.grad_bz = -2.0;
  double worst = 0.0;
  for (Branch b : {Branch::up, Branch::down}) {
    const auto tr = post_magnet_trajectory(b, beam, 1000, 50.0);
    worst = std::max(worst, std::abs(momentum_estimate(tr.times, tr.z).p_hat - deflection(b, beam).p_final / beam.mass));
  }
  o.check(worst <= 1e-10, "straight-line p error " + num(worst));

  run("c6", "momentum_limit", 3, "horizons = 10, 100, 1000\nn_paths = 1000\ndt = 0.01\nt0 = 1\n");
  const auto v = artifact("c6", "momentum_limit.csv").numeric_column("mean_window_variance");
  bool monotone = v.size() == 3;
  for (std::size_t k = 1; k < v.size(); ++k) monotone = monotone && v[k] < v[k - 1];
  o.check(monotone, "tail variance " + num(v[0]) + " > " + num(v[1]) + " > " + num(v[2]));
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome single_tracking() {
  Outcome o;
  const auto c = run("c7a", "track_particle", 5, "omega = 1\ne0 = 1\neta = 0.3\neta_hat = 0.3\nsigma = 0\nt_final = 3\n");
  const double e3 = c.metric("terminal_error");
  o.check(std::abs(e3 - std::exp(-3.0)) <= 0.01 * std::exp(-3.0), "e(3) " + num(e3) + " vs " + num(std::exp(-3.0)));
  const double rate = c.metric("fitted_decay_rate");
  o.check(std::abs(rate + 1.0) <= 0.01, "decay rate " + num(rate));

  const auto u = run("c7b", "track_particle", 5, "omega = 1\ne0 = 1\neta = 0.5\neta_hat = 0\nsigma = 0\nt_final = 10\n");
  const double steady = u.metric("terminal_error");
  o.check(std::abs(steady - 0.5) <= 0.005, "uncompensated steady state " + num(steady));
  return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome ensemble_tracking() {
  Outcome o;
  const double n = 100000;
  const auto s = run("c8", "track_ensemble", 11, "omega = 1\nsigma = 1\ne0 = 1\nn_particles = 100000\nt_final = 3\n");
  const double err = std::abs(s.metric("terminal_mean_error") - std::exp(-3.0));
  o.check(err <= 3.0 / std::sqrt(n), "|mean error - e^-3| " + num(err) + " (band " + num(3.0 / std::sqrt(n)) + ")");
  const double var = s.metric("terminal_error_variance");
  o.check(std::abs(var - 0.5) <= 0.05 * 0.5, "error variance " + num(var) + " vs 0.5");
  return o;
}

// --- 9 ---------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const std::string& run_name) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(g_root / run_name)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

Outcome reproducibility() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> scenarios{
      {"ou_relax", "omega = 1\nsigma = 1\nn_particles = 20000\nt_final = 1\nwrite_paths = false\n"},
      {"fp_stationary", "omega = 1\nsigma = 1\ndensity = bimodal\n"},
      {"mc_fp_xval", "omega = 1\nsigma = 1\nn_particles = 20000\n"},
      {"stern_gerlach", "alpha_re = 0.6\nbeta_re = 0.8\n"},
      {"momentum_limit", "horizons = 10, 100\nn_paths = 200\n"},
      {"track_particle", "omega = 1\nsigma = 0.2\nreference = sine\n"},
      {"track_ensemble", "omega = 1\nn_particles = 20000\n"},
  };
  const unsigned many = std::max(4u, resolve_threads(g_threads));
  for (const auto& [scenario, params] : scenarios) {
    run("c9_one", scenario, 99, params, 1);
    const auto one = snapshot("c9_one");
    run("c9_many", scenario, 99, params, many);
    const auto multi = snapshot("c9_many");
    run("c9_many", scenario, 99, params, many);
    const auto rerun = snapshot("c9_many");
    o.check(one == multi && multi == rerun, scenario);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  app.add_option("--threads", g_threads, "Worker threads, 0 = all cores");
  std::string root = (fs::temp_directory_path() / "stochspin_acceptance").string();
  app.add_option("--work-dir", root, "Scratch directory for scenario artifacts");
  CLI11_PARSE(app, argc, argv);
  g_root = root;
  fs::remove_all(g_root);
  fs::create_directories(g_root);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "spin algebra", 5, spin_algebra},
      {2, "OU moments", 60, ou_moments},
      {3, "drift/stationarity consistency", 30, stationarity},
      {4, "MC vs FP cross-validation", 90, mc_fp},
      {5, "Stern-Gerlach Born statistics", 10, born_statistics},
      {6, "momentum limit", 60, momentum_limit},
      {7, "single-particle tracking", 5, single_tracking},
      {8, "ensemble-mean tracking", 120, ensemble_tracking},
      {9, "reproducibility", 600, reproducibility},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] criterion %d %s: %s; runtime %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : " [x]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  fs::remove_all(g_root);
  return failed == 0 ? 0 : 1;
}
