#pragma once

// The seven runnable scenarios: their parameters, defaults, invariants,
// artifacts and metric sets. Defaults are stored as text and go through the
// same parser as user input, so the documented default is the value used.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochspin/experiment/config.hpp"

namespace stochspin::experiment {

inline constexpr const char* kSummaryFile = "run_summary.txt";

namespace checks {

inline double as_real(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::nan("");
}

inline ParamCheck positive(std::string why) {
  return [why](const Value& v) -> std::optional<std::string> {
    if (as_real(v) > 0.0) return std::nullopt;
    return "must be > 0 (" + why + ")";
  };
}

inline ParamCheck non_negative(std::string why) {
  return [why](const Value& v) -> std::optional<std::string> {
    if (as_real(v) >= 0.0) return std::nullopt;
    return "must be >= 0 (" + why + ")";
  };
}

inline ParamCheck at_least(std::int64_t n, std::string why) {
  return [n, why](const Value& v) -> std::optional<std::string> {
    if (std::get<std::int64_t>(v) >= n) return std::nullopt;
    return "must be >= " + std::to_string(n) + " (" + why + ")";
  };
}

inline ParamCheck unit_interval(std::string why) {
  return [why](const Value& v) -> std::optional<std::string> {
    const double x = as_real(v);
    if (x > 0.0 && x <= 1.0) return std::nullopt;
    return "must lie in (0, 1] (" + why + ")";
  };
}

inline ParamCheck all_positive(std::string why) {
  return [why](const Value& v) -> std::optional<std::string> {
    for (double x : std::get<std::vector<double>>(v)) {
      if (!(x > 0.0)) return "every entry must be > 0 (" + why + ")";
    }
    return std::nullopt;
  };
}

}  // namespace checks

namespace detail {

inline ConfigIssue issue_at(const ParamMap& p, const std::string& key, std::string message) {
  return {p.at(key).line, "parameters", key, std::move(message)};
}

/// n such that n * dt reproduces span within 1e-9 relative.
inline std::optional<std::size_t> whole_steps(double span, double dt) {
  const double n = std::round(span / dt);
  if (n < 1.0 || std::abs(n * dt - span) > 1e-9 * std::max(1.0, std::abs(span))) return std::nullopt;
  return static_cast<std::size_t>(n);
}

inline void require_whole_steps(const ParamMap& p, const std::string& span_key, const std::string& dt_key,
                                IssueList& errors) {
  if (!whole_steps(p.real(span_key), p.real(dt_key))) {
    errors.push_back(issue_at(p, span_key,
                              "conflicting keys: " + span_key + " is not a whole number of " + dt_key + " steps"));
  }
}

inline void require_grid(const ParamMap& p, IssueList& errors) {
  if (!(p.real("x_min") < p.real("x_max"))) {
    errors.push_back(issue_at(p, "x_max", "conflicting keys: grid requires x_min < x_max"));
  }
}

inline ParamSpec real_param(std::string key, std::optional<std::string> def, std::string desc, ParamCheck check = {}) {
  return {std::move(key), ValueType::real, std::move(def), std::move(desc), std::move(check), {}};
}
inline ParamSpec int_param(std::string key, std::optional<std::string> def, std::string desc, ParamCheck check = {}) {
  return {std::move(key), ValueType::integer, std::move(def), std::move(desc), std::move(check), {}};
}
inline ParamSpec choice_param(std::string key, std::string def, std::string desc, std::vector<std::string> choices) {
  return {std::move(key), ValueType::string, std::move(def), std::move(desc), {}, std::move(choices)};
}

inline std::vector<ParamSpec> reference_params() {
  return {
      choice_param("reference", "constant", "reference velocity profile",
                   {"constant", "ramp", "sine", "exp_decay"}),
      real_param("ref_amplitude", "1", "constant: A; sine: A sin(r t) + c; exp_decay: A e^{-r t}"),
      real_param("ref_rate", "1", "ramp slope, sine frequency or exp_decay rate (r)"),
      real_param("ref_offset", "0", "offset c for ramp (c + r t) and sine"),
  };
}

}  // namespace detail

inline const std::vector<ScenarioSpec>& scenario_catalogue() {
  using namespace checks;
  using detail::int_param;
  using detail::choice_param;
  using detail::real_param;
  static const std::vector<ScenarioSpec> catalogue = [] {
    std::vector<ScenarioSpec> c;

    c.push_back({"ou_relax",
                 "Ornstein-Uhlenbeck relaxation dx = -omega x dt + sigma dw from a point start; ensemble moments "
                 "against the closed-form mean and variance.",
                 {
                     real_param("omega", std::nullopt, "drift rate", positive("the analytic OU moments need omega > 0")),
                     real_param("sigma", std::nullopt, "noise amplitude", non_negative("noise amplitude sigma >= 0")),
                     real_param("x0", "1", "initial position"),
                     real_param("dt", "0.001", "time step", positive("time step dt > 0")),
                     real_param("t_final", "3", "horizon", positive("horizon > 0")),
                     int_param("n_particles", "1000", "ensemble size", at_least(1, "ensemble size n_particles >= 1")),
                     int_param("checkpoints", "10", "number of recorded times after t = 0",
                               at_least(1, "at least one checkpoint")),
                     {"write_paths", ValueType::boolean, "false", "also write every path to trajectories.csv", {}, {}},
                 },
                 {"ou_moments.csv", "trajectories.csv (only with write_paths = true)"},
                 {"max_mean_zscore", "max_variance_zscore", "terminal_mean", "terminal_variance", "within_3se"},
                 [](const ParamMap& p, IssueList& errors, std::vector<std::string>&) {
                   detail::require_whole_steps(p, "t_final", "dt", errors);
                   if (auto n = detail::whole_steps(p.real("t_final"), p.real("dt")); n && *n % p.count("checkpoints") != 0) {
                     errors.push_back(detail::issue_at(p, "checkpoints",
                                                       "conflicting keys: checkpoints must divide the step count"));
                   }
                 }});

    c.push_back({"fp_stationary",
                 "Fokker-Planck evolution of a stationary density rho0 under its own drift "
                 "u = (sigma^2/2) (ln rho0)'; the density should not move.",
                 {
                     real_param("omega", std::nullopt, "harmonic rate; rho0 ~ exp(-omega x^2 / sigma^2)",
                                positive("stationary density needs omega > 0")),
                     real_param("sigma", std::nullopt, "diffusion scale", positive("diffusion scale sigma > 0")),
                     choice_param("density", "gaussian", "stationary density shape", {"gaussian", "bimodal"}),
                     real_param("separation", "3", "bimodal: distance between the two Gaussian centres",
                                positive("separation > 0")),
                     real_param("x_min", "-5", "grid left edge"),
                     real_param("x_max", "5", "grid right edge"),
                     int_param("n_cells", "512", "grid cells", at_least(16, "grid needs at least 16 cells")),
                     real_param("t_final", "1", "horizon", positive("horizon > 0")),
                     real_param("dt", "0", "time step; 0 picks 0.9 of the stability limit",
                                non_negative("dt >= 0, 0 = automatic")),
                     int_param("snapshots", "4", "snapshots after t = 0", at_least(1, "at least one snapshot")),
                     choice_param("scheme", "exponential_fitting", "drift flux discretization",
                                  {"exponential_fitting", "upwind"}),
                 },
                 {"manifest.csv", "density_000.csv ... density_NNN.csv"},
                 {"l1_change", "max_mass_error", "min_density"},
                 [](const ParamMap& p, IssueList& errors, std::vector<std::string>&) { detail::require_grid(p, errors); }});

    c.push_back({"mc_fp_xval",
                 "Monte-Carlo vs Fokker-Planck cross-validation for the OU process: histogram of Euler-Maruyama "
                 "endpoints against the finite-volume density at t_final.",
                 {
                     real_param("omega", std::nullopt, "drift rate", positive("OU drift rate omega > 0")),
                     real_param("sigma", std::nullopt, "noise amplitude", positive("diffusion scale sigma > 0")),
                     real_param("x0", "1", "initial position"),
                     real_param("t_final", "2", "horizon", positive("horizon > 0")),
                     real_param("dt", "0.001", "Euler-Maruyama time step", positive("time step dt > 0")),
                     int_param("n_particles", "100000", "ensemble size", at_least(1, "ensemble size n_particles >= 1")),
                     real_param("x_min", "-6", "grid left edge"),
                     real_param("x_max", "6", "grid right edge"),
                     int_param("n_cells", "64", "histogram cells", at_least(16, "grid needs at least 16 cells")),
                     int_param("fp_refine", "16", "Fokker-Planck cells per histogram cell",
                               at_least(1, "refinement factor >= 1")),
                     real_param("fp_initial_width", "0.05", "standard deviation of the narrow initial Gaussian",
                                positive("initial width > 0")),
                     choice_param("scheme", "exponential_fitting", "drift flux discretization",
                                  {"exponential_fitting", "upwind"}),
                 },
                 {"mc_endpoints.csv", "mc_histogram.csv", "fp_density.csv"},
                 {"l1_distance", "out_of_range_fraction", "mc_mean", "fp_mean", "mc_variance", "fp_variance"},
                 [](const ParamMap& p, IssueList& errors, std::vector<std::string>& warnings) {
                   detail::require_grid(p, errors);
                   detail::require_whole_steps(p, "t_final", "dt", errors);
                   if (errors.empty()) {
                     const double fine_dx = (p.real("x_max") - p.real("x_min")) /
                                            static_cast<double>(p.count("n_cells") * p.count("fp_refine"));
                     if (p.real("fp_initial_width") < 2.0 * fine_dx) {
                       warnings.push_back("fp_initial_width spans fewer than two Fokker-Planck cells");
                     }
                   }
                 }});

    c.push_back({"stern_gerlach",
                 "Stern-Gerlach beam: Born-rule branch sampling, ballistic deflection under F = M_z dB_z/dz and the "
                 "bimodal plate distribution.",
                 {
                     real_param("alpha_re", std::nullopt, "Re alpha (amplitude on |+>)"),
                     real_param("alpha_im", "0", "Im alpha"),
                     real_param("beta_re", std::nullopt, "Re beta (amplitude on |->)"),
                     real_param("beta_im", "0", "Im beta"),
                     real_param("mass", "1", "particle mass", positive("mass > 0")),
                     real_param("gamma", "1", "gyromagnetic ratio"),
                     real_param("hbar", "1", "action scale", positive("hbar > 0")),
                     real_param("grad_bz", "-2", "field gradient dB_z/dz (negative by convention)"),
                     real_param("b_z", "1", "field intensity", positive("field intensity b_z > 0")),
                     real_param("magnet_length", "1", "magnet length along the beam", positive("magnet_length > 0")),
                     real_param("drift_length", "1", "field-free flight to the plate", positive("drift_length > 0")),
                     real_param("v_beam", "1", "longitudinal speed", positive("v_beam > 0")),
                     real_param("sigma_z", "0.05", "transverse spread of the incoming beam",
                                non_negative("sigma_z >= 0")),
                     int_param("n_particles", "100000", "beam size", at_least(1, "beam size n_particles >= 1")),
                     int_param("histogram_bins", "200", "plate histogram cells", at_least(16, "at least 16 bins")),
                 },
                 {"plate.csv", "plate_summary.csv", "plate_histogram.csv"},
                 {"up_fraction", "expected_up_fraction", "up_fraction_zscore", "mean_z_up", "mean_z_down",
                  "expected_z_up", "expected_z_down", "n_modes"},
                 [](const ParamMap& p, IssueList& errors, std::vector<std::string>& warnings) {
                   const double n = p.real("alpha_re") * p.real("alpha_re") + p.real("alpha_im") * p.real("alpha_im") +
                                    p.real("beta_re") * p.real("beta_re") + p.real("beta_im") * p.real("beta_im");
                   if (std::abs(n - 1.0) > 1e-9) {
                     char buf[64];
                     std::snprintf(buf, sizeof buf, "%.12g", n);
                     errors.push_back(detail::issue_at(
                         p, "beta_re", std::string("conflicting keys: spinor is not normalized, |alpha|^2+|beta|^2 = ") + buf));
                   }
                   if (!(p.real("grad_bz") < 0.0)) {
                     warnings.push_back("grad_bz is not negative; deflection directions are mirrored");
                   }
                 }});

    c.push_back({"momentum_limit",
                 "Time-scaled Langevin process dx = (x/t) dt + sigma dw: x_t / t settles, and its spread over the "
                 "trailing window shrinks as the horizon grows.",
                 {
                     {"horizons", ValueType::real_list, std::nullopt, "final times T to compare, increasing",
                      checks::all_positive("horizons must be > 0"), {}},
                     int_param("n_paths", "1000", "paths per horizon", at_least(1, "n_paths >= 1")),
                     real_param("dt", "0.01", "time step", positive("time step dt > 0")),
                     real_param("t0", "1", "start time", positive("start time t0 > 0 keeps x/t finite")),
                     real_param("x0", "1", "initial position"),
                     real_param("sigma", "1", "noise amplitude", non_negative("sigma >= 0")),
                     real_param("tail_fraction", "0.5", "trailing fraction of each path used by the estimator",
                                unit_interval("tail_fraction in (0, 1]")),
                     real_param("variance_threshold", "1e-06", "window variance below which a path counts as converged",
                                positive("threshold > 0")),
                     int_param("samples_per_path", "1000", "recorded samples per path",
                               at_least(20, "the estimator needs at least 10 tail samples")),
                 },
                 {"momentum_limit.csv"},
                 {"monotone_decrease", "first_mean_window_variance", "last_mean_window_variance", "last_mean_p_hat",
                  "last_converged_fraction"},
                 [](const ParamMap& p, IssueList& errors, std::vector<std::string>&) {
                   const auto& h = p.list("horizons");
                   double prev = p.real("t0");
                   for (double T : h) {
                     if (!(T > prev)) {
                       errors.push_back(detail::issue_at(
                           p, "horizons", "conflicting keys: horizons must increase and exceed t0"));
                       return;
                     }
                     if (!detail::whole_steps(T - p.real("t0"), p.real("dt"))) {
                       errors.push_back(detail::issue_at(
                           p, "horizons", "conflicting keys: every horizon - t0 must be a whole number of dt steps"));
                       return;
                     }
                     prev = T;
                   }
                 }});

    auto tracking_params = [](bool ensemble) {
      std::vector<ParamSpec> v{
          real_param("omega", std::nullopt, "plant drift rate",
                     checks::positive("stable error dynamics require omega > 0")),
      };
      for (auto& r : detail::reference_params()) v.push_back(std::move(r));
      v.push_back(real_param("e0", "1", "initial tracking error v(0) - v_r(0)"));
      if (ensemble) {
        v.push_back(real_param("sigma", "1", "per-particle noise amplitude", checks::non_negative("sigma >= 0")));
        v.push_back(int_param("n_particles", "100000", "ensemble size", checks::at_least(2, "ensemble needs n_particles >= 2")));
      } else {
        v.push_back(real_param("eta", "0", "true constant disturbance"));
        v.push_back(real_param("eta_hat", "0", "disturbance estimate used by the compensating term"));
        v.push_back(real_param("sigma", "0", "white-noise amplitude", checks::non_negative("sigma >= 0")));
      }
      v.push_back(real_param("dt", ensemble ? "0.001" : "0.0001", "time step", checks::positive("time step dt > 0")));
      v.push_back(real_param("t_final", "3", "horizon", checks::positive("horizon > 0")));
      v.push_back(int_param("record_stride", ensemble ? "10" : "100", "keep every k-th step",
                            checks::at_least(1, "record_stride >= 1")));
      return v;
    };
    auto tracking_cross = [](const ParamMap& p, IssueList& errors, std::vector<std::string>&) {
      detail::require_whole_steps(p, "t_final", "dt", errors);
    };

    c.push_back({"track_particle",
                 "Single-particle open-loop tracking with u = omega v_r + v_r' - eta_hat on dv = (-omega v + u + eta) dt "
                 "+ sigma dw.",
                 tracking_params(false),
                 {"tracking.csv", "tracking_summary.json"},
                 {"terminal_error", "expected_terminal_error", "max_abs_deviation", "fitted_decay_rate"},
                 tracking_cross});

    c.push_back({"track_ensemble",
                 "Ensemble-mean open-loop tracking with E{u} = omega E{v_r} + E{v_r}' and i.i.d. zero-mean noise on "
                 "every particle.",
                 tracking_params(true),
                 {"tracking.csv", "tracking_summary.json"},
                 {"terminal_mean_error", "expected_terminal_mean_error", "clt_band", "terminal_error_variance",
                  "expected_terminal_variance", "stationary_variance", "fitted_decay_rate"},
                 tracking_cross});
    return c;
  }();
  return catalogue;
}

inline const ScenarioSpec& find_scenario(const std::string& name) {
  for (const auto& s : scenario_catalogue()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

inline ParseResult parse_config(std::string_view text) { return parse_config(text, scenario_catalogue()); }

/// Human-readable catalogue: parameters with types and defaults, artifacts, metrics.
inline std::string list_scenarios() {
  std::string out;
  for (const auto& s : scenario_catalogue()) {
    out += s.name + "\n";
    out += "  " + s.summary + "\n";
    out += "  parameters:\n";
    for (const auto& p : s.params) {
      std::string line = "    " + p.key;
      line.resize(std::max<std::size_t>(line.size() + 1, 26), ' ');
      line += to_string(p.type);
      line.resize(std::max<std::size_t>(line.size() + 1, 36), ' ');
      const std::string def = p.default_text ? "default " + *p.default_text : "required";
      line += def;
      line.resize(std::max<std::size_t>(line.size() + 1, 66), ' ');
      line += p.description;
      if (!p.choices.empty()) {
        line += " [";
        for (std::size_t i = 0; i < p.choices.size(); ++i) line += (i ? "|" : "") + p.choices[i];
        line += "]";
      }
      out += line + "\n";
    }
    out += "  artifacts:";
    for (const auto& a : s.artifacts) out += " " + a + ";";
    out += " " + std::string(kSummaryFile) + "\n";
    out += "  metrics:";
    for (const auto& m : s.metrics) out += " " + m;
    out += "\n\n";
  }
  return out;
}

}  // namespace stochspin::experiment
