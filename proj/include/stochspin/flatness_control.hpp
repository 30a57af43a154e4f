#pragma once

// Open-loop, flatness-based velocity control of the first-order plant
//   dv/dt = -omega v + u + eta
// for a single particle and for the mean of an ensemble.
//
// With flat output y = v the state is x = y and the input is
// u = y' + omega y - eta, so a reference v_r is tracked by
// u = omega v_r + v_r' + u_c with u_c = -eta_hat. The tracking error then obeys
// e' + omega e = eta - eta_hat.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stochspin/csv.hpp"
#include "stochspin/diffusion.hpp"
#include "stochspin/error.hpp"

namespace stochspin {

using TimeFunction = std::function<double(double)>;

class ReferenceTrajectory {
 public:
  /// Probe points used by the derivative consistency check.
  static constexpr std::size_t kProbePoints = 201;

  /// Analytic derivative; rejected unless it matches a central difference of
  /// `value` within 1e-6 (1 + |v_r'|) on a probe grid over [0, duration].
  static ReferenceTrajectory with_derivative(TimeFunction value, TimeFunction derivative, double duration) {
    ReferenceTrajectory r(std::move(value), std::move(derivative), duration);
    r.check_consistency();
    return r;
  }

  /// Derivative by central difference with h = 1e-5 * duration.
  static ReferenceTrajectory from_function(TimeFunction value, double duration) {
    if (!value) throw InvalidInput("reference trajectory needs a value function");
    const double h = 1e-5 * duration;
    TimeFunction d = [value, h](double t) { return (value(t + h) - value(t - h)) / (2.0 * h); };
    ReferenceTrajectory r(std::move(value), std::move(d), duration);
    r.check_consistency();
    return r;
  }

  static ReferenceTrajectory constant(double c, double duration) {
    return with_derivative([c](double) { return c; }, [](double) { return 0.0; }, duration);
  }
  static ReferenceTrajectory ramp(double slope, double intercept, double duration) {
    return with_derivative([=](double t) { return intercept + slope * t; }, [slope](double) { return slope; }, duration);
  }
  /// offset + amplitude sin(frequency t)
  static ReferenceTrajectory sine(double amplitude, double frequency, double offset, double duration) {
    return with_derivative([=](double t) { return offset + amplitude * std::sin(frequency * t); },
                           [=](double t) { return amplitude * frequency * std::cos(frequency * t); }, duration);
  }
  /// amplitude e^{-rate t}
  static ReferenceTrajectory exp_decay(double amplitude, double rate, double duration) {
    return with_derivative([=](double t) { return amplitude * std::exp(-rate * t); },
                           [=](double t) { return -rate * amplitude * std::exp(-rate * t); }, duration);
  }

  double value(double t) const { return value_(t); }
  double derivative(double t) const { return derivative_(t); }
  double duration() const noexcept { return duration_; }

  ReferenceTrajectory scaled(double k) const {
    auto v = value_;
    auto d = derivative_;
    return ReferenceTrajectory([v, k](double t) { return k * v(t); }, [d, k](double t) { return k * d(t); },
                               duration_);
  }

 private:
  ReferenceTrajectory(TimeFunction value, TimeFunction derivative, double duration)
      : value_(std::move(value)), derivative_(std::move(derivative)), duration_(duration) {
    if (!value_ || !derivative_) throw InvalidInput("reference trajectory needs value and derivative functions");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidInput("reference duration must be > 0");
  }

  void check_consistency() const {
    const double h = 1e-5 * duration_;
    for (std::size_t k = 0; k < kProbePoints; ++k) {
      const double t = duration_ * static_cast<double>(k) / static_cast<double>(kProbePoints - 1);
      const double fd = (value_(t + h) - value_(t - h)) / (2.0 * h);
      const double d = derivative_(t);
      if (!std::isfinite(d) || std::abs(fd - d) > 1e-6 * (1.0 + std::abs(d))) {
        throw InvalidInput("reference derivative is inconsistent with its value at t = " + format_double(t));
      }
    }
  }

  TimeFunction value_;
  TimeFunction derivative_;
  double duration_;
};

struct ControlLaw {
  double omega = 1.0;
  ReferenceTrajectory reference;
  /// Disturbance estimate; empty means zero.
  TimeFunction eta_hat;

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidInput("control law requires omega > 0");
  }
};

/// u(t) = omega v_r(t) + v_r'(t) - eta_hat(t)
inline double openloop_control(const ControlLaw& law, double t) {
  law.validate();
  if (!(t >= 0.0 && t <= law.reference.duration())) {
    throw InvalidInput("control requested at t = " + format_double(t) + " outside [0, " +
                       format_double(law.reference.duration()) + "]");
  }
  const double eta = law.eta_hat ? law.eta_hat(t) : 0.0;
  return law.omega * law.reference.value(t) + law.reference.derivative(t) - eta;
}

struct FlatTrajectory {
  std::vector<double> times;
  std::vector<double> state;
  std::vector<double> input;
};

/// State x = y and input u = y' + omega y - eta sampled at `times`.
inline FlatTrajectory flat_state_and_input(const ReferenceTrajectory& y, double omega, const TimeFunction& eta,
                                           std::span<const double> times) {
  FlatTrajectory out;
  out.times.assign(times.begin(), times.end());
  out.state.reserve(times.size());
  out.input.reserve(times.size());
  for (double t : times) {
    const double yt = y.value(t);
    out.state.push_back(yt);
    out.input.push_back(y.derivative(t) + omega * yt - (eta ? eta(t) : 0.0));
  }
  return out;
}

/// Ensemble-mean law with E{eta} = 0: t -> omega E{v_r}(t) + E{v_r}'(t).
inline TimeFunction ensemble_mean_control(const ReferenceTrajectory& mean_reference, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidInput("ensemble control requires omega > 0");
  return [mean_reference, omega](double t) { return omega * mean_reference.value(t) + mean_reference.derivative(t); };
}

struct FitWindow {
  double t_lo;
  double t_hi;
};

/// Default fit window: the middle 80% of [t_start, t_end], i.e. [0.1 T, 0.9 T] from t = 0.
inline FitWindow default_fit_window(double t_start, double t_end) {
  const double span = t_end - t_start;
  return {t_start + 0.1 * span, t_start + 0.9 * span};
}

struct DecayFit {
  double slope;
  double intercept;
  std::size_t samples;
};

/// Least-squares line through ln|e(t)| over the window. The errors must keep one
/// sign and stay non-zero inside the window.
inline DecayFit error_dynamics_fit(std::span<const double> times, std::span<const double> errors, FitWindow window) {
  if (times.size() != errors.size()) throw InvalidInput("error_dynamics_fit: times and errors differ in length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  int sign = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t < window.t_lo || t > window.t_hi) continue;
    const double e = errors[k];
    if (e == 0.0 || !std::isfinite(e)) throw InvalidInput("rejected fit window: error is zero or non-finite");
    const int s = e > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) throw InvalidInput("rejected fit window: error changes sign");
    sign = s;
    const double y = std::log(std::abs(e));
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++n;
  }
  if (n < 2) throw InvalidInput("rejected fit window: fewer than two samples");
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (!(denom > 0.0)) throw InvalidInput("rejected fit window: degenerate time samples");
  const double slope = (dn * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / dn, n};
}

struct TrackingReport {
  std::vector<double> times;
  std::vector<double> e_mean;
  std::vector<double> e_std;
  std::vector<double> u;
  /// Empty when the error changes sign or vanishes in the fit window.
  std::optional<double> fitted_decay_rate;
  double terminal_error = 0.0;
  double terminal_variance = 0.0;
  std::size_t n_particles = 1;
};

namespace detail {

inline void finish_report(TrackingReport& r, FitWindow window) {
  r.terminal_error = r.e_mean.back();
  r.terminal_variance = r.e_std.back() * r.e_std.back();
  try {
    r.fitted_decay_rate = error_dynamics_fit(r.times, r.e_mean, window).slope;
  } catch (const InvalidInput&) {
    r.fitted_decay_rate.reset();
  }
}

}  // namespace detail

/// Integrates dv = (-omega v + u(t) + eta(t)) dt + sigma dw for one particle
/// (particle 0 of cfg's seed) with u from openloop_control. `eta` is the true
/// deterministic disturbance (empty = none); cfg.sigma adds white noise.
inline TrackingReport simulate_controlled_particle(const ControlLaw& law, double v0, const TimeFunction& eta,
                                                   SdeConfig cfg, std::optional<FitWindow> window = {}) {
  law.validate();
  cfg.n_particles = 1;
  cfg.x0 = FixedStart{v0};
  cfg.validate();
  const double horizon = cfg.t0 + static_cast<double>(cfg.n_steps) * cfg.dt;
  if (cfg.t0 < 0.0 || horizon > law.reference.duration() * (1.0 + 1e-12)) {
    throw InvalidInput("simulation horizon exceeds the reference duration");
  }
  const double omega = law.omega;
  auto plant = [&](double v, double t) {
    const double u = openloop_control(law, std::min(t, law.reference.duration()));
    return -omega * v + u + (eta ? eta(t) : 0.0);
  };
  const TrajectoryBatch batch = simulate_ensemble(plant, cfg);

  TrackingReport r;
  r.times = batch.times;
  for (std::size_t s = 0; s < batch.n_samples(); ++s) {
    const double t = batch.times[s];
    r.e_mean.push_back(batch.at(0, s) - law.reference.value(t));
    r.e_std.push_back(0.0);
    r.u.push_back(openloop_control(law, std::min(t, law.reference.duration())));
  }
  detail::finish_report(r, window.value_or(default_fit_window(cfg.t0, horizon)));
  return r;
}

/// Every particle follows dv = (-omega v + u(t)) dt + sigma dw with the common
/// ensemble-mean control u; the i.i.d. noise realizes zero-mean disturbances.
/// Initial velocities come from cfg.x0. Reports the mean and spread of
/// e = v - E{v_r}.
inline TrackingReport simulate_controlled_ensemble(const ReferenceTrajectory& reference, double omega, double sigma,
                                                   SdeConfig cfg, std::optional<FitWindow> window = {}) {
  const TimeFunction control = ensemble_mean_control(reference, omega);
  cfg.sigma = sigma;
  cfg.validate();
  const double horizon = cfg.t0 + static_cast<double>(cfg.n_steps) * cfg.dt;
  if (cfg.t0 < 0.0 || horizon > reference.duration() * (1.0 + 1e-12)) {
    throw InvalidInput("simulation horizon exceeds the reference duration");
  }
  auto plant = [&](double v, double t) { return -omega * v + control(t); };
  const EnsembleMoments m = ensemble_moments(plant, cfg);

  TrackingReport r;
  r.n_particles = cfg.n_particles;
  r.times = m.times;
  for (std::size_t s = 0; s < m.times.size(); ++s) {
    const double t = m.times[s];
    r.e_mean.push_back(m.mean[s] - reference.value(t));
    r.e_std.push_back(std::sqrt(m.variance[s]));
    r.u.push_back(control(t));
  }
  detail::finish_report(r, window.value_or(default_fit_window(cfg.t0, horizon)));
  return r;
}

/// CSV: t,e_mean,e_std,u
inline std::string to_csv(const TrackingReport& r) {
  std::string out = "t,e_mean,e_std,u\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out += format_double(r.times[k]);
    out += ',';
    out += format_double(r.e_mean[k]);
    out += ',';
    out += format_double(r.e_std[k]);
    out += ',';
    out += format_double(r.u[k]);
    out += '\n';
  }
  return out;
}

}  // namespace stochspin
