#pragma once

// Euler-Maruyama integration of scalar Langevin equations
//   dx = b(x, t) dt + sigma dw
// over ensembles of independent particles, plus the x_t / t momentum estimator
// and the closed-form Ornstein-Uhlenbeck moments used as a test oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stochspin/csv.hpp"
#include "stochspin/drift.hpp"
#include "stochspin/error.hpp"
#include "stochspin/parallel.hpp"
#include "stochspin/rng.hpp"

namespace stochspin {

/// |x| beyond this is reported as an overflow, never clamped.
inline constexpr double kOverflowLimit = 1e12;

/// Particles per work unit. Fixed so reductions do not depend on the worker count.
inline constexpr std::size_t kParticleBlock = 1024;

struct FixedStart {
  double x = 0.0;
};

/// x0 ~ N(mean, sd^2), drawn from the initial-condition stream of the seed.
struct GaussianStart {
  double mean = 0.0;
  double sd = 1.0;
};

using InitialCondition = std::variant<FixedStart, GaussianStart>;

struct SdeConfig {
  double dt = 1e-3;
  std::size_t n_steps = 1000;
  /// Noise amplitude: dw = sigma * sqrt(dt) * z.
  double sigma = 1.0;
  std::size_t n_particles = 1;
  std::uint64_t seed = 0;
  InitialCondition x0 = FixedStart{0.0};
  double t0 = 0.0;
  /// Keep every k-th step (the final step is always kept).
  std::size_t record_stride = 1;
  /// Worker threads, 0 = hardware concurrency. Never changes results.
  unsigned threads = 1;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
    if (n_particles < 1) throw ConfigError("n_particles must be >= 1");
    if (!std::isfinite(t0)) throw ConfigError("t0 must be finite");
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    if (const auto* g = std::get_if<GaussianStart>(&x0); g && !(g->sd >= 0.0)) {
      throw ConfigError("initial spread must be >= 0");
    }
  }

  double time_at(std::size_t step) const noexcept { return t0 + static_cast<double>(step) * dt; }

  /// Step indices that are recorded: 0, stride, 2*stride, ..., n_steps.
  std::vector<std::size_t> recorded_steps() const {
    std::vector<std::size_t> steps;
    for (std::size_t k = 0; k < n_steps; k += record_stride) steps.push_back(k);
    steps.push_back(n_steps);
    return steps;
  }
};

struct TrajectoryBatch {
  std::vector<double> times;
  /// Row-major: paths[particle * times.size() + sample].
  std::vector<double> paths;
  std::size_t n_particles = 0;
  std::uint64_t seed_used = 0;

  std::size_t n_samples() const noexcept { return times.size(); }
  double at(std::size_t particle, std::size_t sample) const { return paths[particle * times.size() + sample]; }
  std::span<const double> path(std::size_t particle) const {
    return std::span<const double>(paths).subspan(particle * times.size(), times.size());
  }
  std::vector<double> column(std::size_t sample) const {
    std::vector<double> out(n_particles);
    for (std::size_t p = 0; p < n_particles; ++p) out[p] = at(p, sample);
    return out;
  }
};

/// x + b(x, t) dt + dW.
template <typename Drift>
double euler_maruyama_step(double x, const Drift& drift, double t, double dt, double dW) {
  if (!(dt > 0.0)) throw InvalidInput("time step must be > 0");
  if (!std::isfinite(x) || !std::isfinite(dW)) throw NumericalError("non-finite state or noise increment");
  const double next = x + drift(x, t) * dt + dW;
  if (!std::isfinite(next) || std::abs(next) > kOverflowLimit) {
    throw NumericalError("Euler-Maruyama step overflowed (x = " + std::to_string(next) + ")");
  }
  return next;
}

namespace detail {

inline double initial_position(const SdeConfig& cfg, std::size_t particle) {
  if (const auto* f = std::get_if<FixedStart>(&cfg.x0)) return f->x;
  const auto& g = std::get<GaussianStart>(cfg.x0);
  const CounterRng rng(cfg.seed, RngStream::initial_condition);
  return g.mean + g.sd * rng.normal(particle, 0);
}

/// Integrates one particle, calling record(sample_index, x) at recorded steps.
template <typename Drift, typename Record>
void integrate_particle(const Drift& drift, const SdeConfig& cfg, const CounterRng& rng, std::size_t particle,
                        Record&& record) {
  const double noise_scale = cfg.sigma * std::sqrt(cfg.dt);
  double x = initial_position(cfg, particle);
  std::size_t sample = 0;
  record(sample++, x);
  std::array<double, 2> z{};
  for (std::size_t k = 0; k < cfg.n_steps; ++k) {
    if ((k & 1u) == 0) z = rng.normal_pair(particle, k >> 1);
    const double t = cfg.time_at(k);
    const double next = x + drift(x, t) * cfg.dt + noise_scale * z[k & 1u];
    if (!std::isfinite(next) || std::abs(next) > kOverflowLimit) {
      throw NumericalError("particle " + std::to_string(particle) + " overflowed at step " + std::to_string(k + 1) +
                           " (x = " + std::to_string(next) + ")");
    }
    x = next;
    const std::size_t step = k + 1;
    if (step % cfg.record_stride == 0 || step == cfg.n_steps) record(sample++, x);
  }
}

}  // namespace detail

/// Integrates cfg.n_particles independent paths with per-particle counter-based
/// noise streams. `drift` is any callable (x, t) -> b; DriftSpec is the usual one.
template <typename Drift>
TrajectoryBatch simulate_ensemble(const Drift& drift, const SdeConfig& cfg) {
  cfg.validate();
  const auto steps = cfg.recorded_steps();
  TrajectoryBatch batch;
  batch.times.reserve(steps.size());
  for (std::size_t s : steps) batch.times.push_back(cfg.time_at(s));
  batch.n_particles = cfg.n_particles;
  batch.seed_used = cfg.seed;
  batch.paths.assign(cfg.n_particles * steps.size(), 0.0);

  const CounterRng rng(cfg.seed, RngStream::noise);
  const std::size_t width = steps.size();
  for_each_block(cfg.n_particles, kParticleBlock, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      double* row = batch.paths.data() + p * width;
      detail::integrate_particle(drift, cfg, rng, p, [row](std::size_t s, double x) { row[s] = x; });
    }
  });
  return batch;
}

/// Sample mean and unbiased variance across the ensemble at each recorded time.
struct EnsembleMoments {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::size_t n_particles = 0;

  double standard_error_of_mean(std::size_t k) const { return std::sqrt(variance[k] / static_cast<double>(n_particles)); }
  /// Standard error of the sample variance for Gaussian data.
  double standard_error_of_variance(std::size_t k) const {
    return variance[k] * std::sqrt(2.0 / static_cast<double>(n_particles - 1));
  }
};

namespace detail {

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }

  void merge(const RunningMoments& o) noexcept {
    if (o.count == 0.0) return;
    const double n = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / n;
    m2 += o.m2 + d * d * count * o.count / n;
    count = n;
  }
};

}  // namespace detail

/// Streams the ensemble without storing paths. Per-block moments are merged in
/// block order, so the result is identical for every worker count.
template <typename Drift>
EnsembleMoments ensemble_moments(const Drift& drift, const SdeConfig& cfg) {
  cfg.validate();
  const auto steps = cfg.recorded_steps();
  const std::size_t width = steps.size();
  const std::size_t n_blocks = (cfg.n_particles + kParticleBlock - 1) / kParticleBlock;
  std::vector<std::vector<detail::RunningMoments>> partial(n_blocks, std::vector<detail::RunningMoments>(width));

  const CounterRng rng(cfg.seed, RngStream::noise);
  for_each_block(cfg.n_particles, kParticleBlock, cfg.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    auto& acc = partial[b];
    for (std::size_t p = begin; p < end; ++p) {
      detail::integrate_particle(drift, cfg, rng, p, [&acc](std::size_t s, double x) { acc[s].add(x); });
    }
  });

  EnsembleMoments out;
  out.n_particles = cfg.n_particles;
  for (std::size_t s : steps) out.times.push_back(cfg.time_at(s));
  out.mean.resize(width);
  out.variance.resize(width);
  for (std::size_t s = 0; s < width; ++s) {
    detail::RunningMoments total;
    for (const auto& block : partial) total.merge(block[s]);
    out.mean[s] = total.mean;
    out.variance[s] = total.count > 1.0 ? total.m2 / (total.count - 1.0) : 0.0;
  }
  return out;
}

struct MomentumOptions {
  double tail_fraction = 0.5;
  /// Converged when the variance of x_t/t over the tail window is below this.
  double variance_threshold = 1e-6;
};

struct MomentumEstimate {
  double p_hat = 0.0;
  double window_variance = 0.0;
  std::size_t window_samples = 0;
  bool converged = false;
};

/// Mean of x_t / t over the trailing tail_fraction of a path (samples with
/// t <= 0 are skipped).
inline MomentumEstimate momentum_estimate(std::span<const double> times, std::span<const double> path,
                                          MomentumOptions opts = {}) {
  if (times.size() != path.size()) throw InvalidInput("momentum_estimate: times and path differ in length");
  if (!(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0)) {
    throw InvalidInput("tail_fraction must lie in (0, 1]");
  }
  const auto n = times.size();
  const auto tail = static_cast<std::size_t>(std::ceil(opts.tail_fraction * static_cast<double>(n)));
  std::vector<double> ratios;
  ratios.reserve(tail);
  for (std::size_t k = n - std::min(tail, n); k < n; ++k) {
    if (times[k] > 0.0) ratios.push_back(path[k] / times[k]);
  }
  if (ratios.size() < 10) {
    throw InvalidInput("momentum_estimate needs at least 10 samples with t > 0 in the tail window, got " +
                       std::to_string(ratios.size()));
  }
  detail::RunningMoments m;
  for (double r : ratios) m.add(r);
  MomentumEstimate est;
  est.p_hat = m.mean;
  est.window_variance = m.m2 / m.count;
  est.window_samples = ratios.size();
  est.converged = est.window_variance < opts.variance_threshold;
  return est;
}

struct OuMoments {
  double mean;
  double variance;
};

/// Exact moments of dx = -omega x dt + sigma dw started from a point x0:
/// mean x0 e^{-omega t}, variance sigma^2 (1 - e^{-2 omega t}) / (2 omega).
inline OuMoments ou_analytic_moments(double x0, double omega, double sigma, double t) {
  if (!(omega > 0.0)) throw InvalidInput("ou_analytic_moments requires omega > 0");
  if (!(t >= 0.0)) throw InvalidInput("ou_analytic_moments requires t >= 0");
  return {x0 * std::exp(-omega * t), -sigma * sigma * std::expm1(-2.0 * omega * t) / (2.0 * omega)};
}

/// CSV: header t,particle_0,...,particle_{N-1}; one row per recorded time.
inline std::string to_csv(const TrajectoryBatch& batch) {
  std::string out = "t";
  for (std::size_t p = 0; p < batch.n_particles; ++p) out += ",particle_" + std::to_string(p);
  out += '\n';
  for (std::size_t s = 0; s < batch.n_samples(); ++s) {
    out += format_double(batch.times[s]);
    for (std::size_t p = 0; p < batch.n_particles; ++p) {
      out += ',';
      out += format_double(batch.at(p, s));
    }
    out += '\n';
  }
  return out;
}

inline TrajectoryBatch trajectory_batch_from_csv(const CsvTable& table, std::uint64_t seed = 0) {
  if (table.header.empty() || table.header[0] != "t") throw InvalidInput("trajectory CSV must start with column 't'");
  TrajectoryBatch batch;
  batch.n_particles = table.header.size() - 1;
  batch.seed_used = seed;
  batch.times = table.numeric_column("t");
  batch.paths.assign(batch.n_particles * batch.times.size(), 0.0);
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    for (std::size_t p = 0; p < batch.n_particles; ++p) {
      batch.paths[p * batch.times.size() + s] = parse_double(table.rows[s][p + 1]);
    }
  }
  return batch;
}

}  // namespace stochspin
