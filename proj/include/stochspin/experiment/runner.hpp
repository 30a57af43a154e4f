#pragma once

// Executes a validated ScenarioConfig: writes the scenario's CSV artifacts,
// then reads them back to compute the summary metrics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stochspin/csv.hpp"
#include "stochspin/diffusion.hpp"
#include "stochspin/drift.hpp"
#include "stochspin/experiment/catalogue.hpp"
#include "stochspin/flatness_control.hpp"
#include "stochspin/fokker_planck.hpp"
#include "stochspin/spin_state.hpp"
#include "stochspin/stern_gerlach.hpp"

namespace stochspin::experiment {

struct RunOptions {
  /// Worker threads, 0 = hardware concurrency. Artifacts do not depend on it.
  unsigned threads = 1;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::pair<std::string, double>> metrics;
  double wall_seconds = 0.0;
  /// Every file written to output_dir, including the summary file itself.
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;

  double metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    throw InvalidInput("run summary has no metric '" + std::string(name) + "'");
  }

  /// Flat key = value text. Timing is left out of the file so reruns stay
  /// byte-identical.
  std::string to_text(bool include_timing) const {
    std::string out = "scenario = " + scenario + "\n";
    out += "seed = " + std::to_string(seed) + "\n";
    for (const auto& [k, v] : config_echo) out += "config." + k + " = " + v + "\n";
    for (const auto& [k, v] : metrics) out += "metric." + k + " = " + format_double(v) + "\n";
    for (const auto& a : artifacts) out += "artifact = " + a + "\n";
    for (const auto& w : warnings) out += "warning = " + w + "\n";
    if (include_timing) {
      out += "output_dir = " + output_dir + "\n";
      out += "wall_clock_seconds = " + format_double(wall_seconds) + "\n";
    }
    return out;
  }
};

namespace detail {

namespace fs = std::filesystem;

class ArtifactDir {
 public:
  explicit ArtifactDir(fs::path dir) : dir_(std::move(dir)) {}

  /// Creates the directory, or clears the artifacts of a previous run recorded
  /// in its summary file. Any other content is left alone and reported.
  void prepare() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    std::set<std::string> previous;
    if (std::ifstream in(dir_ / kSummaryFile); in) {
      std::string line;
      while (std::getline(in, line)) {
        if (line.rfind("artifact = ", 0) == 0) previous.insert(line.substr(11));
      }
    }
    for (const auto& entry : fs::directory_iterator(dir_)) {
      const std::string name = entry.path().filename().string();
      if (!entry.is_regular_file() || !previous.count(name)) {
        throw IoError("output directory '" + dir_.string() + "' contains '" + name +
                      "', which is not an artifact of a previous run");
      }
    }
    for (const auto& name : previous) fs::remove(dir_ / name, ec);
  }

  void write(const std::string& name, const std::string& content) {
    write_text_file(path(name), content);
    files_.push_back(name);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Context {
  const ScenarioConfig& cfg;
  const ParamMap& p;
  RunOptions opts;
  ArtifactDir& out;
  RunSummary& summary;

  void metric(const std::string& name, double v) { summary.metrics.emplace_back(name, v); }
};

inline std::size_t steps_of(double span, double dt) {
  auto n = whole_steps(span, dt);
  if (!n) throw ConfigError("span is not a whole number of time steps");
  return *n;
}

// --- ou_relax --------------------------------------------------------------

inline void run_ou_relax(Context& ctx) {
  const auto& p = ctx.p;
  const double omega = p.real("omega");
  const double sigma = p.real("sigma");
  const double x0 = p.real("x0");
  SdeConfig sde;
  sde.dt = p.real("dt");
  sde.n_steps = steps_of(p.real("t_final"), sde.dt);
  sde.sigma = sigma;
  sde.n_particles = p.count("n_particles");
  sde.seed = ctx.cfg.seed;
  sde.x0 = FixedStart{x0};
  sde.record_stride = sde.n_steps / p.count("checkpoints");
  sde.threads = ctx.opts.threads;
  const DriftSpec drift = DriftSpec::linear(omega);

  const EnsembleMoments m = ensemble_moments(drift, sde);
  std::string csv = "t,mean,variance,mean_exact,variance_exact,mean_se,variance_se\n";
  for (std::size_t k = 0; k < m.times.size(); ++k) {
    const auto exact = ou_analytic_moments(x0, omega, sigma, m.times[k]);
    const double se_var = sde.n_particles > 1 ? m.standard_error_of_variance(k) : 0.0;
    for (double v : {m.times[k], m.mean[k], m.variance[k], exact.mean, exact.variance, m.standard_error_of_mean(k), se_var}) {
      csv += format_double(v);
      csv += ',';
    }
    csv.back() = '\n';
  }
  ctx.out.write("ou_moments.csv", csv);
  if (p.boolean("write_paths")) ctx.out.write("trajectories.csv", to_csv(simulate_ensemble(drift, sde)));

  const CsvTable t = read_csv(ctx.out.path("ou_moments.csv"));
  const auto mean = t.numeric_column("mean");
  const auto var = t.numeric_column("variance");
  const auto mean_exact = t.numeric_column("mean_exact");
  const auto var_exact = t.numeric_column("variance_exact");
  const auto mean_se = t.numeric_column("mean_se");
  const auto var_se = t.numeric_column("variance_se");
  double zm = 0.0, zv = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    if (mean_se[k] > 0.0) zm = std::max(zm, std::abs(mean[k] - mean_exact[k]) / mean_se[k]);
    if (var_se[k] > 0.0) zv = std::max(zv, std::abs(var[k] - var_exact[k]) / var_se[k]);
  }
  ctx.metric("max_mean_zscore", zm);
  ctx.metric("max_variance_zscore", zv);
  ctx.metric("terminal_mean", mean.back());
  ctx.metric("terminal_variance", var.back());
  ctx.metric("within_3se", zm <= 3.0 && zv <= 3.0 ? 1.0 : 0.0);
}

// --- fp_stationary -----------------------------------------------------------

struct StationaryDensity {
  DensityFunction rho;
  DensityFunction derivative;
};

inline StationaryDensity stationary_density(const ParamMap& p) {
  const double omega = p.real("omega");
  const double sigma = p.real("sigma");
  // exp(-omega x^2 / sigma^2) is the density that makes u = -omega x stationary
  const double k = omega / (sigma * sigma);
  if (p.string("density") == "gaussian") {
    return {[k](double x) { return std::exp(-k * x * x); },
            [k](double x) { return -2.0 * k * x * std::exp(-k * x * x); }};
  }
  const double a = 0.5 * p.real("separation");
  return {[k, a](double x) { return std::exp(-k * (x - a) * (x - a)) + std::exp(-k * (x + a) * (x + a)); },
          [k, a](double x) {
            return -2.0 * k * ((x - a) * std::exp(-k * (x - a) * (x - a)) + (x + a) * std::exp(-k * (x + a) * (x + a)));
          }};
}

inline void run_fp_stationary(Context& ctx) {
  const auto& p = ctx.p;
  const double sigma = p.real("sigma");
  const Grid1D grid(p.real("x_min"), p.real("x_max"), p.count("n_cells"));
  const auto density = stationary_density(p);
  const DriftSpec drift = drift_from_density(density.rho, sigma, {grid.x_min(), grid.x_max(), 1000}, density.derivative);
  const DensityField rho0 = DensityField::from_function(grid, density.rho);
  const double t_final = p.real("t_final");
  const double dt = p.real("dt") > 0.0 ? p.real("dt") : stable_time_step(grid, drift, sigma);
  const std::size_t n_snap = p.count("snapshots");
  std::vector<double> outputs;
  for (std::size_t k = 0; k <= n_snap; ++k) outputs.push_back(t_final * static_cast<double>(k) / static_cast<double>(n_snap));

  const FpSolution sol = fp_solve(rho0, drift, sigma, t_final, dt, outputs, parse_flux_scheme(p.string("scheme")));
  for (const auto& w : sol.warnings) ctx.summary.warnings.push_back(w);

  std::string manifest = "index,t,file\n";
  for (std::size_t k = 0; k < sol.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "density_%03zu.csv", k);
    ctx.out.write(name, to_csv(sol.snapshots[k].density));
    manifest += std::to_string(k) + "," + format_double(sol.snapshots[k].t) + "," + name + "\n";
  }
  ctx.out.write("manifest.csv", manifest);

  const CsvTable m = read_csv(ctx.out.path("manifest.csv"));
  const std::size_t file_col = m.column("file");
  std::vector<std::vector<double>> values;
  double dx = 0.0;
  for (const auto& row : m.rows) {
    const CsvTable d = read_csv(ctx.out.path(row[file_col]));
    const auto x = d.numeric_column("x");
    dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    values.push_back(d.numeric_column("rho"));
  }
  double max_mass_error = 0.0, min_density = INFINITY, l1 = 0.0;
  for (const auto& v : values) {
    double mass = 0.0;
    for (double r : v) {
      mass += r;
      min_density = std::min(min_density, r);
    }
    max_mass_error = std::max(max_mass_error, std::abs(mass * dx - 1.0));
  }
  for (std::size_t i = 0; i < values.front().size(); ++i) l1 += std::abs(values.back()[i] - values.front()[i]);
  ctx.metric("l1_change", l1 * dx);
  ctx.metric("max_mass_error", max_mass_error);
  ctx.metric("min_density", min_density);
}

// --- mc_fp_xval --------------------------------------------------------------

inline void run_mc_fp_xval(Context& ctx) {
  const auto& p = ctx.p;
  const double omega = p.real("omega");
  const double sigma = p.real("sigma");
  const double x0 = p.real("x0");
  const double t_final = p.real("t_final");
  const DriftSpec drift = DriftSpec::linear(omega);

  SdeConfig sde;
  sde.dt = p.real("dt");
  sde.n_steps = steps_of(t_final, sde.dt);
  sde.record_stride = sde.n_steps;
  sde.sigma = sigma;
  sde.n_particles = p.count("n_particles");
  sde.seed = ctx.cfg.seed;
  sde.x0 = FixedStart{x0};
  sde.threads = ctx.opts.threads;
  const TrajectoryBatch batch = simulate_ensemble(drift, sde);
  std::string endpoints = "particle,x\n";
  for (std::size_t i = 0; i < batch.n_particles; ++i) {
    endpoints += std::to_string(i) + "," + format_double(batch.at(i, batch.n_samples() - 1)) + "\n";
  }
  ctx.out.write("mc_endpoints.csv", endpoints);

  const std::size_t refine = p.count("fp_refine");
  const Grid1D fine(p.real("x_min"), p.real("x_max"), p.count("n_cells") * refine);
  const double width = p.real("fp_initial_width");
  const DensityField rho0 =
      DensityField::from_function(fine, [x0, width](double x) { return std::exp(-0.5 * (x - x0) * (x - x0) / (width * width)); });
  const FpSolution sol = fp_solve(rho0, drift, sigma, t_final, stable_time_step(fine, drift, sigma), {},
                                  parse_flux_scheme(p.string("scheme")));
  for (const auto& w : sol.warnings) ctx.summary.warnings.push_back(w);
  ctx.out.write("fp_density.csv", to_csv(coarsen(sol.snapshots.back().density, refine)));

  const DensityField fp = density_from_csv(read_csv(ctx.out.path("fp_density.csv")));
  const auto xs = read_csv(ctx.out.path("mc_endpoints.csv")).numeric_column("x");
  const HistogramResult hist = histogram_density(xs, fp.grid());
  ctx.out.write("mc_histogram.csv", to_csv(hist.density));

  ctx.metric("l1_distance", l1_distance(hist.density, fp));
  ctx.metric("out_of_range_fraction", hist.out_of_range_fraction);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(std::max<std::size_t>(xs.size(), 2) - 1);
  ctx.metric("mc_mean", mean);
  ctx.metric("fp_mean", fp.mean());
  ctx.metric("mc_variance", var);
  ctx.metric("fp_variance", fp.variance());
}

// --- stern_gerlach -----------------------------------------------------------

inline BeamConfig beam_config(const ParamMap& p) {
  BeamConfig b;
  b.mass = p.real("mass");
  b.gamma = p.real("gamma");
  b.hbar = p.real("hbar");
  b.grad_bz = p.real("grad_bz");
  b.b_z = p.real("b_z");
  b.magnet_length = p.real("magnet_length");
  b.drift_length = p.real("drift_length");
  b.v_beam = p.real("v_beam");
  b.sigma_z = p.real("sigma_z");
  return b;
}

inline void run_stern_gerlach(Context& ctx) {
  const auto& p = ctx.p;
  const Spinor state({p.real("alpha_re"), p.real("alpha_im")}, {p.real("beta_re"), p.real("beta_im")});
  const BeamConfig beam = beam_config(p);
  const std::size_t n = p.count("n_particles");
  const auto records = simulate_beam(state, beam, n, ctx.cfg.seed, ctx.opts.threads);
  ctx.out.write("plate.csv", to_csv(records));

  const auto read_back = plate_records_from_csv(read_csv(ctx.out.path("plate.csv")));
  const BeamSummary s = summarize_beam(read_back);
  ctx.out.write("plate_summary.csv", to_csv(s));

  const Deflection up = deflection(Branch::up, beam);
  const Deflection down = deflection(Branch::down, beam);
  double half_width = std::max(std::abs(up.z_final), std::abs(down.z_final)) + 6.0 * beam.sigma_z;
  if (!(half_width > 0.0)) half_width = 1.0;
  const Grid1D grid(-half_width, half_width, p.count("histogram_bins"));
  std::vector<double> zs;
  zs.reserve(read_back.size());
  for (const auto& r : read_back) zs.push_back(r.z_final);
  ctx.out.write("plate_histogram.csv", to_csv(histogram_density(zs, grid).density));
  const auto heights = read_csv(ctx.out.path("plate_histogram.csv")).numeric_column("rho");

  const double p_up = measurement_probabilities(state).p_plus;
  const double se = std::sqrt(p_up * (1.0 - p_up) / static_cast<double>(n));
  ctx.metric("up_fraction", s.up.fraction);
  ctx.metric("expected_up_fraction", p_up);
  ctx.metric("up_fraction_zscore", se > 0.0 ? std::abs(s.up.fraction - p_up) / se : 0.0);
  ctx.metric("mean_z_up", s.up.count ? s.up.mean_z : std::nan(""));
  ctx.metric("mean_z_down", s.down.count ? s.down.mean_z : std::nan(""));
  ctx.metric("expected_z_up", up.z_final);
  ctx.metric("expected_z_down", down.z_final);
  ctx.metric("n_modes", static_cast<double>(count_histogram_modes(heights)));
}

// --- momentum_limit ----------------------------------------------------------

inline void run_momentum_limit(Context& ctx) {
  const auto& p = ctx.p;
  const double t0 = p.real("t0");
  MomentumOptions mo;
  mo.tail_fraction = p.real("tail_fraction");
  mo.variance_threshold = p.real("variance_threshold");
  const DriftSpec drift = DriftSpec::time_scaled();

  std::string csv = "horizon,mean_window_variance,mean_p_hat,std_p_hat,converged_fraction\n";
  for (double T : p.list("horizons")) {
    SdeConfig sde;
    sde.dt = p.real("dt");
    sde.n_steps = steps_of(T - t0, sde.dt);
    sde.record_stride = std::max<std::size_t>(1, sde.n_steps / p.count("samples_per_path"));
    sde.sigma = p.real("sigma");
    sde.n_particles = p.count("n_paths");
    sde.seed = ctx.cfg.seed;
    sde.x0 = FixedStart{p.real("x0")};
    sde.t0 = t0;
    sde.threads = ctx.opts.threads;
    const TrajectoryBatch batch = simulate_ensemble(drift, sde);
    double sum_var = 0.0, sum_p = 0.0, sum_pp = 0.0, converged = 0.0;
    for (std::size_t i = 0; i < batch.n_particles; ++i) {
      const auto est = momentum_estimate(batch.times, batch.path(i), mo);
      sum_var += est.window_variance;
      sum_p += est.p_hat;
      sum_pp += est.p_hat * est.p_hat;
      converged += est.converged ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(batch.n_particles);
    const double mean_p = sum_p / n;
    const double std_p = n > 1 ? std::sqrt(std::max(0.0, (sum_pp - n * mean_p * mean_p) / (n - 1))) : 0.0;
    for (double v : {T, sum_var / n, mean_p, std_p, converged / n}) {
      csv += format_double(v);
      csv += ',';
    }
    csv.back() = '\n';
  }
  ctx.out.write("momentum_limit.csv", csv);

  const CsvTable t = read_csv(ctx.out.path("momentum_limit.csv"));
  const auto wv = t.numeric_column("mean_window_variance");
  bool monotone = true;
  for (std::size_t k = 1; k < wv.size(); ++k) monotone = monotone && wv[k] < wv[k - 1];
  ctx.metric("monotone_decrease", monotone ? 1.0 : 0.0);
  ctx.metric("first_mean_window_variance", wv.front());
  ctx.metric("last_mean_window_variance", wv.back());
  ctx.metric("last_mean_p_hat", t.numeric_column("mean_p_hat").back());
  ctx.metric("last_converged_fraction", t.numeric_column("converged_fraction").back());
}

// --- tracking ----------------------------------------------------------------

inline ReferenceTrajectory make_reference(const ParamMap& p, double duration) {
  const std::string& kind = p.string("reference");
  const double a = p.real("ref_amplitude");
  const double r = p.real("ref_rate");
  const double c = p.real("ref_offset");
  if (kind == "constant") return ReferenceTrajectory::constant(a, duration);
  if (kind == "ramp") return ReferenceTrajectory::ramp(r, c, duration);
  if (kind == "sine") return ReferenceTrajectory::sine(a, r, c, duration);
  return ReferenceTrajectory::exp_decay(a, r, duration);
}

inline void write_tracking_summary(Context& ctx, const TrackingReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = ctx.cfg.scenario;
  j["seed"] = ctx.cfg.seed;
  j["n_particles"] = r.n_particles;
  if (r.fitted_decay_rate) j["fitted_decay_rate"] = *r.fitted_decay_rate;
  else j["fitted_decay_rate"] = nullptr;
  j["terminal_error"] = r.terminal_error;
  j["terminal_variance"] = r.terminal_variance;
  nlohmann::ordered_json echo;
  for (const auto& [k, param] : ctx.p) echo[k] = param.text;
  j["config"] = echo;
  ctx.out.write("tracking_summary.json", j.dump(2) + "\n");
}

struct TrackingColumns {
  std::vector<double> t, e_mean, e_std;
};

inline TrackingColumns read_tracking(Context& ctx) {
  const CsvTable t = read_csv(ctx.out.path("tracking.csv"));
  return {t.numeric_column("t"), t.numeric_column("e_mean"), t.numeric_column("e_std")};
}

inline double fitted_rate_or_nan(const TrackingColumns& c) {
  try {
    return error_dynamics_fit(c.t, c.e_mean, default_fit_window(c.t.front(), c.t.back())).slope;
  } catch (const InvalidInput&) {
    return std::nan("");
  }
}

inline void run_track_particle(Context& ctx) {
  const auto& p = ctx.p;
  const double omega = p.real("omega");
  const double t_final = p.real("t_final");
  const double eta = p.real("eta");
  const double eta_hat = p.real("eta_hat");
  const double e0 = p.real("e0");
  ControlLaw law{omega, make_reference(p, t_final), [eta_hat](double) { return eta_hat; }};

  SdeConfig sde;
  sde.dt = p.real("dt");
  sde.n_steps = steps_of(t_final, sde.dt);
  sde.sigma = p.real("sigma");
  sde.seed = ctx.cfg.seed;
  sde.record_stride = p.count("record_stride");
  sde.threads = ctx.opts.threads;
  const TrackingReport report =
      simulate_controlled_particle(law, law.reference.value(0.0) + e0, [eta](double) { return eta; }, sde);
  ctx.out.write("tracking.csv", to_csv(report));
  write_tracking_summary(ctx, report);

  const auto c = read_tracking(ctx);
  // e' + omega e = eta - eta_hat  =>  e(t) = c + (e0 - c) e^{-omega t}
  const double steady = (eta - eta_hat) / omega;
  auto closed = [&](double t) { return steady + (e0 - steady) * std::exp(-omega * t); };
  double dev = 0.0;
  for (std::size_t k = 0; k < c.t.size(); ++k) dev = std::max(dev, std::abs(c.e_mean[k] - closed(c.t[k])));
  ctx.metric("terminal_error", c.e_mean.back());
  ctx.metric("expected_terminal_error", closed(c.t.back()));
  ctx.metric("max_abs_deviation", dev);
  ctx.metric("fitted_decay_rate", fitted_rate_or_nan(c));
}

inline void run_track_ensemble(Context& ctx) {
  const auto& p = ctx.p;
  const double omega = p.real("omega");
  const double sigma = p.real("sigma");
  const double t_final = p.real("t_final");
  const double e0 = p.real("e0");
  const ReferenceTrajectory ref = make_reference(p, t_final);

  SdeConfig sde;
  sde.dt = p.real("dt");
  sde.n_steps = steps_of(t_final, sde.dt);
  sde.n_particles = p.count("n_particles");
  sde.seed = ctx.cfg.seed;
  sde.x0 = FixedStart{ref.value(0.0) + e0};
  sde.record_stride = p.count("record_stride");
  sde.threads = ctx.opts.threads;
  const TrackingReport report = simulate_controlled_ensemble(ref, omega, sigma, sde);
  ctx.out.write("tracking.csv", to_csv(report));
  write_tracking_summary(ctx, report);

  const auto c = read_tracking(ctx);
  const double T = c.t.back();
  const auto ou = ou_analytic_moments(e0, omega, sigma, T);
  ctx.metric("terminal_mean_error", c.e_mean.back());
  ctx.metric("expected_terminal_mean_error", ou.mean);
  ctx.metric("clt_band", 3.0 * sigma / std::sqrt(static_cast<double>(sde.n_particles)));
  ctx.metric("terminal_error_variance", c.e_std.back() * c.e_std.back());
  ctx.metric("expected_terminal_variance", ou.variance);
  ctx.metric("stationary_variance", sigma * sigma / (2.0 * omega));
  ctx.metric("fitted_decay_rate", fitted_rate_or_nan(c));
}

}  // namespace detail

/// Runs one scenario into cfg.output_dir. Throws stochspin::Error subclasses
/// with the scenario name prefixed to the message.
inline RunSummary run_scenario(const ScenarioConfig& cfg, RunOptions opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioSpec& spec = find_scenario(cfg.scenario);
  RunSummary summary;
  summary.scenario = cfg.scenario;
  summary.seed = cfg.seed;
  summary.output_dir = cfg.output_dir;
  summary.warnings = cfg.warnings;
  for (const auto& ps : spec.params) summary.config_echo.emplace_back(ps.key, cfg.parameters.at(ps.key).text);

  detail::ArtifactDir out(cfg.output_dir);
  detail::Context ctx{cfg, cfg.parameters, opts, out, summary};
  try {
    out.prepare();
    if (cfg.scenario == "ou_relax") detail::run_ou_relax(ctx);
    else if (cfg.scenario == "fp_stationary") detail::run_fp_stationary(ctx);
    else if (cfg.scenario == "mc_fp_xval") detail::run_mc_fp_xval(ctx);
    else if (cfg.scenario == "stern_gerlach") detail::run_stern_gerlach(ctx);
    else if (cfg.scenario == "momentum_limit") detail::run_momentum_limit(ctx);
    else if (cfg.scenario == "track_particle") detail::run_track_particle(ctx);
    else detail::run_track_ensemble(ctx);

    summary.artifacts = out.files();
    summary.artifacts.emplace_back(kSummaryFile);
    std::sort(summary.artifacts.begin(), summary.artifacts.end());
    write_text_file(out.path(kSummaryFile), summary.to_text(false));
  } catch (const InvalidInput& e) {
    throw ConfigError(cfg.scenario + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.scenario + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(cfg.scenario + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(cfg.scenario + ": " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(cfg.scenario + ": " + e.what());
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace stochspin::experiment
