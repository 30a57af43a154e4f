#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stochspin/spin_state.hpp"
#include "support.hpp"

using namespace stochspin;
using Complex = std::complex<double>;

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

Spinor eigvec(Axis a, bool plus) {
  switch (a) {
    case Axis::x:
      return Spinor(kSqrtHalf, plus ? kSqrtHalf : -kSqrtHalf);
    case Axis::y:
      return Spinor(kSqrtHalf, plus ? Complex(0, kSqrtHalf) : Complex(0, -kSqrtHalf));
    default:
      return plus ? Spinor::up() : Spinor::down();
  }
}

oracle::Mat2 scaled_exponent(const oracle::Mat2& h, double t, double hbar) {
  oracle::Mat2 a;
  for (int i = 0; i < 4; ++i) a[i] = Complex(0, -t / hbar) * h[i];
  return a;
}

}  // namespace

TEST(Spinor, RejectsNonNormalizedInput) {
  EXPECT_THROW(Spinor(1.0, 1.0), InvalidInput);
  EXPECT_THROW(Spinor(0.0, 0.0), InvalidInput);
  EXPECT_NO_THROW(Spinor(1.0 + 1e-10, 0.0));
}

TEST(Spinor, NormalizedRescales) {
  const Spinor s = Spinor::normalized(3.0, 4.0);
  EXPECT_NEAR(s.alpha().real(), 0.6, 1e-15);
  EXPECT_NEAR(s.beta().real(), 0.8, 1e-15);
  EXPECT_THROW(Spinor::normalized(0.0, 0.0), InvalidInput);
}

TEST(Spinor, PhaseEquivalence) {
  const Spinor a(0.6, 0.8);
  const Complex ph = std::polar(1.0, 1.234);
  const Spinor b(ph * 0.6, ph * 0.8);
  EXPECT_FALSE(a.equals(b, 1e-12));
  EXPECT_TRUE(a.equals_up_to_phase(b, 1e-12));
}

TEST(Pauli, EigenrelationsAreExact) {
  for (double hbar : {1.0, 1.054571817e-34, 2.5}) {
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      const SpinOperator S = pauli(a, hbar);
      for (bool plus : {true, false}) {
        const Spinor v = eigvec(a, plus);
        const auto [ra, rb] = S.apply(v);
        const double lambda = (plus ? 0.5 : -0.5) * hbar;
        EXPECT_LE(std::abs(ra - lambda * v.alpha()), 1e-14 * hbar);
        EXPECT_LE(std::abs(rb - lambda * v.beta()), 1e-14 * hbar);
      }
      const auto [l0, l1] = S.eigenvalues();
      EXPECT_NEAR(std::max(l0, l1), 0.5 * hbar, 1e-14 * hbar);
      EXPECT_NEAR(std::min(l0, l1), -0.5 * hbar, 1e-14 * hbar);
    }
  }
}

TEST(Pauli, CommutationRelation) {
  // [S_x, S_y] = i hbar S_z
  const double hbar = 1.0;
  const auto sx = pauli(Axis::x, hbar).entries();
  const auto sy = pauli(Axis::y, hbar).entries();
  const auto sz = pauli(Axis::z, hbar).entries();
  const auto xy = oracle::mul(sx, sy);
  const auto yx = oracle::mul(sy, sx);
  for (int i = 0; i < 4; ++i) EXPECT_LE(std::abs(xy[i] - yx[i] - Complex(0, hbar) * sz[i]), 1e-15);
}

TEST(Pauli, AxisParsing) {
  EXPECT_EQ(parse_axis("x"), Axis::x);
  EXPECT_EQ(parse_axis("z"), Axis::z);
  EXPECT_THROW(parse_axis("w"), InvalidInput);
  EXPECT_THROW(pauli("q"), InvalidInput);
  EXPECT_THROW(pauli(Axis::x, 0.0), InvalidInput);
}

TEST(SpinOperator, RejectsNonHermitian) {
  EXPECT_THROW(SpinOperator({1.0, 2.0, 3.0, 1.0}, 1.0), InvalidInput);
  EXPECT_THROW(SpinOperator({Complex(1, 1), 0.0, 0.0, 1.0}, 1.0), InvalidInput);
  EXPECT_NO_THROW(SpinOperator({1.0, Complex(0, 2), Complex(0, -2), -1.0}, 1.0));
}

TEST(Hamiltonian, EnergyLevels) {
  const auto e = energy_levels(3.0, 2.0);
  EXPECT_DOUBLE_EQ(e.e_plus, 3.0);
  EXPECT_DOUBLE_EQ(e.e_minus, -3.0);
  const auto [l0, l1] = spin_hamiltonian(3.0, 2.0).eigenvalues();
  EXPECT_NEAR(std::max(l0, l1), 3.0, 1e-14);
  EXPECT_NEAR(std::min(l0, l1), -3.0, 1e-14);
}

TEST(Measurement, BornRule) {
  const auto p = measurement_probabilities(Spinor(0.6, 0.8));
  EXPECT_NEAR(p.p_plus, 0.36, 1e-15);
  EXPECT_NEAR(p.p_minus, 0.64, 1e-15);
}

TEST(Evolve, HalfPeriodFlipMatchesMatrixExponential) {
  // exp(-i S_x t / hbar) at t = pi hbar is -i sigma_x
  const SpinOperator H = pauli(Axis::x);
  const double t = std::numbers::pi;
  const Spinor out = evolve_spinor(Spinor::up(), H, t);
  const auto U = oracle::expm(scaled_exponent(H.entries(), t, 1.0));
  EXPECT_LE(std::abs(out.alpha() - U[0]), 1e-10);
  EXPECT_LE(std::abs(out.beta() - U[2]), 1e-10);
  EXPECT_TRUE(out.equals_up_to_phase(Spinor::down(), 1e-10));
}

TEST(Evolve, PreservesNormRandomCases) {
  gen::Gen g(20240601);
  for (int k = 0; k < 10000; ++k) {
    const auto [a, b] = g.unit_spinor();
    const Spinor s(a, b);
    const SpinOperator H(g.hermitian(g.uniform(0.01, 10.0)), g.uniform(0.1, 3.0));
    const Spinor out = evolve_spinor(s, H, g.uniform(-20.0, 20.0));
    ASSERT_NEAR(out.norm_squared(), 1.0, 1e-12) << "case " << k;
  }
}

TEST(Evolve, AgreesWithTaylorExpm) {
  gen::Gen g(7);
  for (int k = 0; k < 2000; ++k) {
    const auto [a, b] = g.unit_spinor();
    const double hbar = g.uniform(0.5, 2.0);
    const auto h = g.hermitian(g.uniform(0.1, 3.0));
    const double t = g.uniform(-5.0, 5.0);
    const Spinor out = evolve_spinor(Spinor(a, b), SpinOperator(h, hbar), t);
    const auto U = oracle::expm(scaled_exponent(h, t, hbar));
    ASSERT_LE(std::abs(out.alpha() - (U[0] * a + U[1] * b)), 1e-10) << "case " << k;
    ASSERT_LE(std::abs(out.beta() - (U[2] * a + U[3] * b)), 1e-10) << "case " << k;
  }
}

TEST(Evolve, SemigroupProperty) {
  gen::Gen g(11);
  for (int k = 0; k < 1000; ++k) {
    const auto [a, b] = g.unit_spinor();
    const SpinOperator H(g.hermitian(), 1.0);
    const double t1 = g.uniform(-3.0, 3.0);
    const double t2 = g.uniform(-3.0, 3.0);
    const Spinor two = evolve_spinor(evolve_spinor(Spinor(a, b), H, t1), H, t2);
    const Spinor one = evolve_spinor(Spinor(a, b), H, t1 + t2);
    ASSERT_TRUE(two.equals(one, 1e-12)) << "case " << k;
  }
}

TEST(Evolve, ZeroDurationIsIdentityAndStationaryStatesOnlyGainPhase) {
  const Spinor s(0.6, Complex(0, 0.8));
  EXPECT_TRUE(evolve_spinor(s, pauli(Axis::y), 0.0).equals(s, 0.0));
  const SpinOperator H = spin_hamiltonian(2.0);
  const Spinor up = evolve_spinor(Spinor::up(), H, 1.7);
  EXPECT_TRUE(up.equals_up_to_phase(Spinor::up(), 1e-14));
  // phase e^{-i E+ t / hbar} with E+ = omega0 / 2
  EXPECT_NEAR(std::arg(up.alpha()), -1.7, 1e-14);
  EXPECT_THROW(evolve_spinor(s, H, std::nan("")), InvalidInput);
}

TEST(Evolve, ProbabilitiesConservedUnderZHamiltonian) {
  gen::Gen g(3);
  for (int k = 0; k < 500; ++k) {
    const auto [a, b] = g.unit_spinor();
    const Spinor s(a, b);
    const Spinor out = evolve_spinor(s, spin_hamiltonian(g.uniform(-5, 5)), g.uniform(0, 10));
    ASSERT_NEAR(measurement_probabilities(out).p_plus, measurement_probabilities(s).p_plus, 1e-13);
  }
}
