#pragma once

// Explicit finite-volume solver for the 1-D Fokker-Planck equation
//   d rho / dt = (sigma^2 / 2) d^2 rho / dx^2 - d (u rho) / dx
// on a uniform grid with zero-flux walls.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stochspin/csv.hpp"
#include "stochspin/diffusion.hpp"
#include "stochspin/drift.hpp"
#include "stochspin/error.hpp"

namespace stochspin {

inline constexpr std::size_t kMinCells = 16;
inline constexpr double kMassTolerance = 1e-9;
inline constexpr double kNegativityFloor = -1e-12;
/// Mass allowed in each edge cell before a boundary warning is raised.
inline constexpr double kBoundaryMassWarning = 1e-6;

class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n_cells) : x_min_(x_min), x_max_(x_max), n_(n_cells) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
      throw InvalidInput("grid requires finite x_min < x_max");
    }
    if (n_cells < kMinCells) throw InvalidInput("grid requires at least 16 cells");
    dx_ = (x_max - x_min) / static_cast<double>(n_cells);
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n_cells() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double center(std::size_t i) const noexcept { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
  /// Face j sits between cells j-1 and j; faces 0 and n are the walls.
  double face(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

  /// Same cell count and edges equal to 1e-12 of the width, so a grid
  /// recovered from printed cell centres compares equal to the original.
  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    const double tol = 1e-12 * std::max(a.x_max_ - a.x_min_, b.x_max_ - b.x_min_);
    return a.n_ == b.n_ && std::abs(a.x_min_ - b.x_min_) <= tol && std::abs(a.x_max_ - b.x_max_) <= tol;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

/// Cell-averaged probability density; non-negative with unit mass.
class DensityField {
 public:
  DensityField(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_cells()) throw InvalidInput("density has the wrong number of cells");
    double mass = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v) || v < kNegativityFloor) throw InvalidInput("density values must be finite and >= 0");
      mass += v;
    }
    mass *= grid_.dx();
    if (std::abs(mass - 1.0) > kMassTolerance) {
      throw InvalidInput("density is not normalized (mass = " + format_double(mass) + ")");
    }
  }

  /// Scales arbitrary non-negative cell values to unit mass.
  static DensityField normalized(Grid1D grid, std::vector<double> values) {
    double total = 0.0;
    for (double v : values) total += v;
    total *= grid.dx();
    if (!(total > 0.0) || !std::isfinite(total)) throw InvalidInput("cannot normalize a density with zero mass");
    for (double& v : values) v /= total;
    return DensityField(grid, std::move(values));
  }

  /// Samples f at cell centres and normalizes.
  template <typename F>
  static DensityField from_function(Grid1D grid, F&& f) {
    std::vector<double> v(grid.n_cells());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.center(i));
    return normalized(grid, std::move(v));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double mass() const noexcept {
    double m = 0.0;
    for (double v : values_) m += v;
    return m * grid_.dx();
  }

  double mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m += grid_.center(i) * values_[i];
    return m * grid_.dx() / mass();
  }

  double variance() const noexcept {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double d = grid_.center(i) - mu;
      v += d * d * values_[i];
    }
    return v * grid_.dx() / mass();
  }

  /// Mass held by the first and last cell, the larger of the two.
  double edge_mass() const noexcept { return grid_.dx() * std::max(values_.front(), values_.back()); }

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

enum class FluxScheme {
  /// Scharfetter-Gummel (exponentially fitted) flux. Reduces to first-order
  /// upwinding when advection dominates and keeps exp-of-potential stationary
  /// states stationary on the grid.
  exponential_fitting,
  /// First-order upwind advection plus central diffusion.
  upwind,
};

inline FluxScheme parse_flux_scheme(const std::string& name) {
  if (name == "exponential_fitting" || name == "exponential") return FluxScheme::exponential_fitting;
  if (name == "upwind") return FluxScheme::upwind;
  throw InvalidInput("unknown flux scheme '" + name + "' (expected exponential_fitting or upwind)");
}

namespace detail {

/// Bernoulli function z / (e^z - 1).
inline double bernoulli(double z) noexcept {
  if (std::abs(z) < 1e-6) return 1.0 - 0.5 * z + z * z / 12.0;
  return z / std::expm1(z);
}

template <typename Drift>
double max_face_drift(const Grid1D& grid, const Drift& drift, double t) {
  double m = 0.0;
  for (std::size_t j = 1; j < grid.n_cells(); ++j) m = std::max(m, std::abs(drift(grid.face(j), t)));
  return m;
}

}  // namespace detail

struct StabilityBounds {
  double diffusion;   // dx^2 / (2 sigma^2)
  double advection;   // dx / max|u|
  double positivity;  // 1 / (sigma^2/dx^2 + 2 max|u| / dx)

  double limit() const noexcept { return std::min({diffusion, advection, positivity}); }
};

template <typename Drift>
StabilityBounds stability_bounds(const Grid1D& grid, const Drift& drift, double sigma, double t) {
  const double inf = std::numeric_limits<double>::infinity();
  const double dx = grid.dx();
  const double s2 = sigma * sigma;
  const double umax = detail::max_face_drift(grid, drift, t);
  const double rate = s2 / (dx * dx) + 2.0 * umax / dx;
  return {s2 > 0.0 ? dx * dx / (2.0 * s2) : inf, umax > 0.0 ? dx / umax : inf, rate > 0.0 ? 1.0 / rate : inf};
}

/// Largest stable step at time t, scaled by `safety`.
template <typename Drift>
double stable_time_step(const Grid1D& grid, const Drift& drift, double sigma, double t = 0.0, double safety = 0.9) {
  return safety * stability_bounds(grid, drift, sigma, t).limit();
}

/// One explicit step. Conserves mass to rounding and keeps the density
/// non-negative whenever the stability bounds hold.
template <typename Drift>
DensityField fp_step(const DensityField& rho, const Drift& drift, double sigma, double t, double dt,
                     FluxScheme scheme = FluxScheme::exponential_fitting) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("fp_step: dt must be > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("fp_step: sigma must be >= 0");
  const Grid1D& g = rho.grid();
  const auto b = stability_bounds(g, drift, sigma, t);
  const double slack = 1.0 + 1e-12;
  if (dt > b.diffusion * slack) {
    throw ConfigError("fp_step: dt = " + format_double(dt) + " violates the diffusion bound dx^2/(2 sigma^2) = " +
                      format_double(b.diffusion));
  }
  if (dt > b.advection * slack) {
    throw ConfigError("fp_step: dt = " + format_double(dt) + " violates the advective CFL bound dx/max|u| = " +
                      format_double(b.advection));
  }
  if (dt > b.positivity * slack) {
    throw ConfigError("fp_step: dt = " + format_double(dt) +
                      " violates the positivity bound 1/(sigma^2/dx^2 + 2 max|u|/dx) = " + format_double(b.positivity));
  }

  const std::size_t n = g.n_cells();
  const double dx = g.dx();
  const double diff = 0.5 * sigma * sigma;
  const auto v = rho.values();

  // flux[j] through face j; walls carry zero flux
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const double u = drift(g.face(j), t);
    const double left = v[j - 1];
    const double right = v[j];
    if (scheme == FluxScheme::upwind || diff == 0.0) {
      const double adv = u > 0.0 ? u * left : u * right;
      flux[j] = adv - diff * (right - left) / dx;
    } else {
      const double peclet = u * dx / diff;
      flux[j] = diff / dx * (detail::bernoulli(-peclet) * left - detail::bernoulli(peclet) * right);
    }
  }

  std::vector<double> next(n);
  const double ratio = dt / dx;
  for (std::size_t i = 0; i < n; ++i) next[i] = v[i] - ratio * (flux[i + 1] - flux[i]);
  return DensityField(g, std::move(next));
}

struct DensitySnapshot {
  double t;
  DensityField density;
};

struct FpSolution {
  std::vector<DensitySnapshot> snapshots;
  std::vector<std::string> warnings;
  std::size_t steps = 0;
  double dt_used = 0.0;
};

/// Integrates from t = 0 to t_final in uniform steps no longer than `dt`,
/// recording a snapshot at each requested output time (snapped to the nearest
/// step). With no output times only the final state is recorded.
template <typename Drift>
FpSolution fp_solve(const DensityField& rho0, const Drift& drift, double sigma, double t_final, double dt,
                    std::span<const double> output_times = {}, FluxScheme scheme = FluxScheme::exponential_fitting) {
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("fp_solve: t_final must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("fp_solve: dt must be > 0");
  std::vector<double> outputs(output_times.begin(), output_times.end());
  if (outputs.empty()) outputs.push_back(t_final);
  for (double t : outputs) {
    if (!(t >= 0.0 && t <= t_final * (1.0 + 1e-12))) throw ConfigError("fp_solve: output time outside [0, t_final]");
  }
  std::sort(outputs.begin(), outputs.end());

  FpSolution sol;
  const auto n_steps = t_final > 0.0 ? static_cast<std::size_t>(std::ceil(t_final / dt * (1.0 - 1e-12))) : 0;
  const double h = n_steps > 0 ? t_final / static_cast<double>(n_steps) : 0.0;
  sol.steps = n_steps;
  sol.dt_used = h;

  std::vector<std::size_t> output_steps;
  for (double t : outputs) {
    output_steps.push_back(n_steps > 0 ? static_cast<std::size_t>(std::llround(t / h)) : 0);
  }

  bool warned = false;
  auto record = [&](std::size_t k, const DensityField& rho) {
    for (std::size_t o = 0; o < output_steps.size(); ++o) {
      if (output_steps[o] != k) continue;
      sol.snapshots.push_back({outputs[o], rho});
      if (!warned && rho.edge_mass() > kBoundaryMassWarning) {
        warned = true;
        sol.warnings.push_back("boundary cell mass " + format_double(rho.edge_mass()) + " at t = " +
                               format_double(outputs[o]) + " exceeds 1e-6; widen the grid");
      }
    }
  };

  DensityField rho = rho0;
  record(0, rho);
  for (std::size_t k = 0; k < n_steps; ++k) {
    rho = fp_step(rho, drift, sigma, static_cast<double>(k) * h, h, scheme);
    record(k + 1, rho);
  }
  return sol;
}

struct HistogramResult {
  DensityField density;
  std::size_t out_of_range = 0;
  /// Fraction of samples that fell outside [x_min, x_max].
  double out_of_range_fraction = 0.0;
};

/// Normalized histogram of the in-range samples. Cells are [x_min + i dx, x_min + (i+1) dx);
/// x_max itself falls into the last cell.
inline HistogramResult histogram_density(std::span<const double> samples, const Grid1D& grid) {
  if (samples.empty()) throw InvalidInput("histogram of an empty sample");
  std::vector<double> counts(grid.n_cells(), 0.0);
  std::size_t outside = 0;
  for (double x : samples) {
    if (!(x >= grid.x_min() && x <= grid.x_max())) {
      ++outside;
      continue;
    }
    auto i = static_cast<std::size_t>((x - grid.x_min()) / grid.dx());
    counts[std::min(i, grid.n_cells() - 1)] += 1.0;
  }
  if (outside == samples.size()) throw InvalidInput("every sample lies outside the histogram grid");
  return {DensityField::normalized(grid, std::move(counts)), outside,
          static_cast<double>(outside) / static_cast<double>(samples.size())};
}

inline HistogramResult histogram_density(const TrajectoryBatch& batch, std::size_t step_index, const Grid1D& grid) {
  if (batch.n_particles == 0) throw InvalidInput("histogram of an empty batch");
  if (step_index >= batch.n_samples()) throw InvalidInput("histogram sample index out of range");
  const auto column = batch.column(step_index);
  return histogram_density(column, grid);
}

/// sum |a - b| dx over a shared grid.
inline double l1_distance(const DensityField& a, const DensityField& b) {
  if (!(a.grid() == b.grid())) throw InvalidInput("l1_distance: densities live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid().dx();
}

/// Merges groups of `factor` adjacent cells. n_cells / factor must still be >= 16.
inline DensityField coarsen(const DensityField& rho, std::size_t factor) {
  const Grid1D& g = rho.grid();
  if (factor < 1 || g.n_cells() % factor != 0) throw InvalidInput("coarsening factor must divide the cell count");
  const Grid1D coarse(g.x_min(), g.x_max(), g.n_cells() / factor);
  std::vector<double> v(coarse.n_cells(), 0.0);
  for (std::size_t i = 0; i < g.n_cells(); ++i) v[i / factor] += rho[i] / static_cast<double>(factor);
  return DensityField::normalized(coarse, std::move(v));
}

/// CSV with header x,rho and one row per cell centre.
inline std::string to_csv(const DensityField& rho) {
  std::string out = "x,rho\n";
  for (std::size_t i = 0; i < rho.values().size(); ++i) {
    out += format_double(rho.grid().center(i));
    out += ',';
    out += format_double(rho[i]);
    out += '\n';
  }
  return out;
}

/// Rebuilds a field from its CSV; the grid is recovered from the cell centres
/// and unnormalized input is rescaled.
inline DensityField density_from_csv(const CsvTable& table) {
  const auto x = table.numeric_column("x");
  auto rho = table.numeric_column("rho");
  if (x.size() < kMinCells) throw InvalidInput("density CSV has fewer than 16 cells");
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  const Grid1D grid(x.front() - 0.5 * dx, x.back() + 0.5 * dx, x.size());
  double mass = 0.0;
  for (double v : rho) mass += v;
  // keep the printed values bit-exact when they already carry unit mass
  if (std::abs(mass * grid.dx() - 1.0) <= kMassTolerance) return DensityField(grid, std::move(rho));
  return DensityField::normalized(grid, std::move(rho));
}

}  // namespace stochspin
