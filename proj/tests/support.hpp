#pragma once

// Test-side oracles and random generators. Nothing here calls into the
// library's own numerics, so agreement is evidence rather than tautology.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>

namespace oracle {

using Complex = std::complex<double>;
using Mat2 = std::array<Complex, 4>;

inline Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

/// exp(A) by scaling and squaring around a 30-term Taylor series.
inline Mat2 expm(Mat2 a) {
  double norm = 0.0;
  for (const auto& z : a) norm = std::max(norm, std::abs(z));
  int squarings = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& z : a) z *= scale;
  Mat2 sum{1.0, 0.0, 0.0, 1.0};
  Mat2 term = sum;
  for (int k = 1; k <= 30; ++k) {
    term = mul(term, a);
    for (auto& z : term) z /= static_cast<double>(k);
    for (int i = 0; i < 4; ++i) sum[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) sum = mul(sum, sum);
  return sum;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// OU moments by quadrature: E x_t = x0 - omega int_0^t E x_s ds solved as
/// x0 e^{-omega t}; Var = sigma^2 int_0^t e^{-2 omega (t - s)} ds.
inline std::pair<double, double> ou_moments_quadrature(double x0, double omega, double sigma, double t) {
  const double var = sigma * sigma * simpson([&](double s) { return std::exp(-2.0 * omega * (t - s)); }, 0.0, t);
  return {x0 * std::exp(-omega * t), var};
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle

namespace gen {

/// Seeded source for property tests. Every failure message should carry the
/// case index so a failing case can be replayed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_); }
  std::complex<double> complex(double scale = 1.0) { return {scale * normal(), scale * normal()}; }

  /// Uniform point on the Bloch sphere, as a (alpha, beta) pair with unit norm.
  std::pair<std::complex<double>, std::complex<double>> unit_spinor() {
    auto a = complex();
    auto b = complex();
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    return {a / n, b / n};
  }

  /// Hermitian 2x2 matrix with entries of order `scale`.
  oracle::Mat2 hermitian(double scale = 1.0) {
    const double d0 = scale * normal();
    const double d1 = scale * normal();
    const auto off = complex(scale);
    return {d0, std::conj(off), off, d1};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gen
