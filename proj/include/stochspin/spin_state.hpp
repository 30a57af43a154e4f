#pragma once

// Two-level spin algebra: spinors over the |+>/|-> basis, the (hbar/2)-scaled
// Pauli measurement operators, the precession Hamiltonian H0 = omega0 * S_z and
// its closed-form propagator.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "stochspin/error.hpp"

namespace stochspin {

using Complex = std::complex<double>;

/// Tolerance on |alpha|^2 + |beta|^2 - 1 accepted from callers.
inline constexpr double kNormInputTolerance = 1e-9;
/// Tolerance on norm drift produced by the library itself.
inline constexpr double kNormDriftTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-14;

/// Natural units unless overridden per call.
inline constexpr double kDefaultHbar = 1.0;

enum class Axis { x, y, z };

inline Axis parse_axis(const std::string& tag) {
  if (tag == "x" || tag == "X") return Axis::x;
  if (tag == "y" || tag == "Y") return Axis::y;
  if (tag == "z" || tag == "Z") return Axis::z;
  throw InvalidInput("unknown spin axis '" + tag + "' (expected x, y or z)");
}

/// Normalized state alpha|+> + beta|->. The global phase is kept as given.
class Spinor {
 public:
  /// Throws InvalidInput unless |alpha|^2 + |beta|^2 = 1 within kNormInputTolerance.
  Spinor(Complex alpha, Complex beta) : alpha_(alpha), beta_(beta) {
    const double n = norm_squared();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kNormInputTolerance) {
      throw InvalidInput("spinor is not normalized: |alpha|^2+|beta|^2 = " + std::to_string(n));
    }
  }

  /// Rescales (alpha, beta) to unit norm; rejects the zero vector.
  static Spinor normalized(Complex alpha, Complex beta) {
    const double n = std::sqrt(std::norm(alpha) + std::norm(beta));
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("cannot normalize a zero or non-finite spinor");
    return Spinor(alpha / n, beta / n, Unchecked{});
  }

  static Spinor up() { return Spinor(1.0, 0.0); }
  static Spinor down() { return Spinor(0.0, 1.0); }

  Complex alpha() const noexcept { return alpha_; }
  Complex beta() const noexcept { return beta_; }
  double norm_squared() const noexcept { return std::norm(alpha_) + std::norm(beta_); }

  /// Component-wise equality within `tol`.
  bool equals(const Spinor& other, double tol) const noexcept {
    return std::abs(alpha_ - other.alpha_) <= tol && std::abs(beta_ - other.beta_) <= tol;
  }

  /// Equality up to a global phase: |<this|other>| = 1 within `tol`.
  bool equals_up_to_phase(const Spinor& other, double tol) const noexcept {
    const Complex overlap = std::conj(alpha_) * other.alpha_ + std::conj(beta_) * other.beta_;
    return std::abs(std::abs(overlap) - 1.0) <= tol;
  }

 private:
  struct Unchecked {};
  Spinor(Complex alpha, Complex beta, Unchecked) : alpha_(alpha), beta_(beta) {}

  friend class SpinOperator;
  friend Spinor evolve_spinor(const Spinor&, const class SpinOperator&, double);

  Complex alpha_;
  Complex beta_;
};

/// Row-major 2x2 complex matrix.
using Matrix2 = std::array<Complex, 4>;

/// Hermitian 2x2 operator carrying the hbar scale it was built with.
class SpinOperator {
 public:
  SpinOperator(const Matrix2& entries, double hbar) : m_(entries), hbar_(hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidInput("hbar must be positive and finite");
    double scale = 1.0;
    for (const auto& c : m_) scale = std::max(scale, std::abs(c));
    const double tol = kHermitianTolerance * scale;
    if (std::abs(m_[0].imag()) > tol || std::abs(m_[3].imag()) > tol ||
        std::abs(m_[1] - std::conj(m_[2])) > tol) {
      throw InvalidInput("operator is not Hermitian");
    }
  }

  const Matrix2& entries() const noexcept { return m_; }
  Complex operator()(int row, int col) const noexcept { return m_[static_cast<std::size_t>(2 * row + col)]; }
  double hbar() const noexcept { return hbar_; }

  /// Matrix-vector product. The result is generally not normalized, so it is
  /// returned as a raw amplitude pair.
  std::pair<Complex, Complex> apply(Complex a, Complex b) const noexcept {
    return {m_[0] * a + m_[1] * b, m_[2] * a + m_[3] * b};
  }
  std::pair<Complex, Complex> apply(const Spinor& s) const noexcept { return apply(s.alpha_, s.beta_); }

  /// Real eigenvalues, ascending.
  std::pair<double, double> eigenvalues() const noexcept {
    const double mean = 0.5 * (m_[0].real() + m_[3].real());
    const double half_diff = 0.5 * (m_[0].real() - m_[3].real());
    const double r = std::hypot(half_diff, std::abs(m_[1]));
    return {mean - r, mean + r};
  }

 private:
  Matrix2 m_;
  double hbar_;
};

/// (hbar/2) * sigma_axis.
inline SpinOperator pauli(Axis axis, double hbar = kDefaultHbar) {
  if (!(hbar > 0.0)) throw InvalidInput("hbar must be positive");
  const double h = 0.5 * hbar;
  const Complex i{0.0, 1.0};
  switch (axis) {
    case Axis::x:
      return SpinOperator({0.0, h, h, 0.0}, hbar);
    case Axis::y:
      return SpinOperator({0.0, -i * h, i * h, 0.0}, hbar);
    case Axis::z:
      return SpinOperator({h, 0.0, 0.0, -h}, hbar);
  }
  throw InvalidInput("invalid spin axis");
}

inline SpinOperator pauli(const std::string& axis, double hbar = kDefaultHbar) {
  return pauli(parse_axis(axis), hbar);
}

/// H0 = omega0 * S_z. omega0 may take any sign (e.g. omega0 = -gamma * B_z).
inline SpinOperator spin_hamiltonian(double omega0, double hbar = kDefaultHbar) {
  const double h = 0.5 * hbar * omega0;
  return SpinOperator({h, 0.0, 0.0, -h}, hbar);
}

struct MeasurementProbabilities {
  double p_plus;
  double p_minus;
};

inline MeasurementProbabilities measurement_probabilities(const Spinor& state) {
  if (std::abs(state.norm_squared() - 1.0) > kNormInputTolerance) {
    throw InvalidInput("measurement on a non-normalized spinor");
  }
  return {std::norm(state.alpha()), std::norm(state.beta())};
}

/// Applies U = exp(-i H t / hbar). For H = h0 I + h.sigma the propagator is
/// e^{-i h0 t/hbar} (cos(|h| t/hbar) I - i sin(|h| t/hbar) h.sigma/|h|), which is
/// the eigendecomposition written out for the 2x2 case.
inline Spinor evolve_spinor(const Spinor& state, const SpinOperator& H, double duration) {
  if (!std::isfinite(duration)) throw InvalidInput("evolution duration must be finite");
  const Matrix2& m = H.entries();
  const double h0 = 0.5 * (m[0].real() + m[3].real());
  const double hz = 0.5 * (m[0].real() - m[3].real());
  const double hx = m[2].real();
  const double hy = m[2].imag();
  const double theta = duration / H.hbar();
  const double r = std::sqrt(hx * hx + hy * hy + hz * hz);

  const double c = std::cos(r * theta);
  // sin(r theta)/r, continuous at r = 0
  const double s_over_r = r > 0.0 ? std::sin(r * theta) / r : theta;
  const Complex i{0.0, 1.0};
  const Complex u00 = c - i * s_over_r * hz;
  const Complex u11 = c + i * s_over_r * hz;
  const Complex u01 = -i * s_over_r * Complex(hx, -hy);
  const Complex u10 = -i * s_over_r * Complex(hx, hy);
  const Complex phase = std::polar(1.0, -h0 * theta);

  const Complex a = state.alpha_;
  const Complex b = state.beta_;
  return Spinor(phase * (u00 * a + u01 * b), phase * (u10 * a + u11 * b), Spinor::Unchecked{});
}

struct EnergyPair {
  double e_plus;
  double e_minus;
};

/// E+- = +-hbar * omega0 / 2.
inline EnergyPair energy_levels(double omega0, double hbar = kDefaultHbar) {
  if (!(hbar > 0.0)) throw InvalidInput("hbar must be positive");
  const double e = 0.5 * hbar * omega0;
  return {e, -e};
}

}  // namespace stochspin
