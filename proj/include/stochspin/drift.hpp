#pragma once

// Drift functions b(x, t) for the scalar Langevin equation dx = b(x, t) dt + dw.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "stochspin/error.hpp"

namespace stochspin {

/// b(x, t) = -omega * x (harmonic restoring force).
struct LinearDrift {
  double omega = 0.0;
  double operator()(double x, double /*t*/) const noexcept { return -omega * x; }
};

/// b(x, t) = x / max(t, t_floor). The floor keeps the drift finite at t = 0.
struct TimeScaledDrift {
  double t_floor = 1e-3;
  double operator()(double x, double t) const noexcept { return x / std::max(t, t_floor); }
};

/// b(x) linearly interpolated from samples on x_min + k * dx; held constant
/// beyond the sampled range.
struct TabulatedDrift {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  double operator()(double x, double /*t*/) const noexcept {
    const double s = (x - x_min) / dx;
    if (!(s > 0.0)) return values.front();
    const auto last = static_cast<double>(values.size() - 1);
    if (s >= last) return values.back();
    const auto k = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
  }
};

using DensityFunction = std::function<double(double)>;

/// b(x) = (sigma^2 / 2) * rho0'(x) / rho0(x), which makes rho0 a stationary
/// solution of the Fokker-Planck equation with diffusion sigma.
struct DensityDrift {
  DensityFunction density;
  /// Analytic rho0'. When empty, ln rho0 is differenced (central difference with
  /// one Richardson step), which stays well-conditioned in Gaussian tails.
  DensityFunction derivative;
  double sigma = 1.0;

  double log_derivative(double x) const {
    const double rho = density(x);
    if (!(rho > 0.0) || !std::isfinite(rho)) {
      throw InvalidInput("density-derived drift evaluated where the density is not positive (x = " +
                         std::to_string(x) + ")");
    }
    if (derivative) return derivative(x) / rho;
    const double h = 1e-3 * (1.0 + std::abs(x));
    auto log_rho = [this](double y) {
      const double r = density(y);
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidInput("density is not positive next to x = " + std::to_string(y));
      }
      return std::log(r);
    };
    const double d1 = (log_rho(x + h) - log_rho(x - h)) / (2.0 * h);
    const double d2 = (log_rho(x + 0.5 * h) - log_rho(x - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
  }

  double operator()(double x, double /*t*/) const { return 0.5 * sigma * sigma * log_derivative(x); }
};

/// One of the four drift forms. Cheap to copy; the density form shares its
/// callables.
class DriftSpec {
 public:
  using Variant = std::variant<LinearDrift, DensityDrift, TimeScaledDrift, TabulatedDrift>;

  DriftSpec() : v_(LinearDrift{}) {}

  static DriftSpec linear(double omega) {
    if (!std::isfinite(omega)) throw InvalidInput("linear drift rate must be finite");
    return DriftSpec(LinearDrift{omega});
  }

  static DriftSpec time_scaled(double t_floor = 1e-3) {
    if (!(t_floor > 0.0) || !std::isfinite(t_floor)) throw InvalidInput("time-scaled drift needs t_floor > 0");
    return DriftSpec(TimeScaledDrift{t_floor});
  }

  static DriftSpec tabulated(double x_min, double dx, std::vector<double> values) {
    if (values.size() < 2) throw InvalidInput("tabulated drift needs at least two samples");
    if (!(dx > 0.0) || !std::isfinite(dx) || !std::isfinite(x_min)) {
      throw InvalidInput("tabulated drift needs a finite x_min and dx > 0");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw InvalidInput("tabulated drift contains a non-finite sample");
    }
    return DriftSpec(TabulatedDrift{x_min, dx, std::move(values)});
  }

  /// Wraps an already-validated density drift. Prefer drift_from_density().
  static DriftSpec from_density(DensityDrift d) { return DriftSpec(std::move(d)); }

  double operator()(double x, double t) const {
    return std::visit([x, t](const auto& b) { return b(x, t); }, v_);
  }

  const Variant& variant() const noexcept { return v_; }

  std::string kind() const {
    return std::visit(
        [](const auto& b) -> std::string {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, LinearDrift>) return "linear";
          else if constexpr (std::is_same_v<T, DensityDrift>) return "from_density";
          else if constexpr (std::is_same_v<T, TimeScaledDrift>) return "time_scaled";
          else return "tabulated";
        },
        v_);
  }

 private:
  explicit DriftSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct ProbeInterval {
  double lo;
  double hi;
  std::size_t points = 1000;
};

/// Builds u(x) = (sigma^2/2) (ln rho0)'(x). The density is sampled on `domain`
/// and must be strictly positive there; it need not be normalized.
inline DriftSpec drift_from_density(DensityFunction rho0, double sigma, ProbeInterval domain,
                                    DensityFunction rho0_derivative = {}) {
  if (!rho0) throw InvalidInput("density function is empty");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("diffusion scale sigma must be >= 0");
  if (!(domain.lo < domain.hi) || domain.points < 2) throw InvalidInput("density probe interval is empty");
  for (std::size_t k = 0; k < domain.points; ++k) {
    const double x = domain.lo + (domain.hi - domain.lo) * static_cast<double>(k) / static_cast<double>(domain.points - 1);
    const double r = rho0(x);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw InvalidInput("density sample is not positive at x = " + std::to_string(x));
    }
  }
  return DriftSpec::from_density(DensityDrift{std::move(rho0), std::move(rho0_derivative), sigma});
}

}  // namespace stochspin
