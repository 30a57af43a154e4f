#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "stochspin/diffusion.hpp"
#include "stochspin/drift.hpp"
#include "stochspin/fokker_planck.hpp"
#include "support.hpp"

using namespace stochspin;

namespace {

DensityField gaussian(const Grid1D& g, double mu, double sd) {
  return DensityField::from_function(g, [=](double x) { return std::exp(-0.5 * (x - mu) * (x - mu) / (sd * sd)); });
}

double l1_change_bimodal(std::size_t n, FluxScheme scheme) {
  const double a = 1.5;
  auto rho = [a](double x) { return std::exp(-(x - a) * (x - a)) + std::exp(-(x + a) * (x + a)); };
  const Grid1D g(-7, 7, n);
  const auto u = drift_from_density(rho, 1.0, {-7, 7});
  const auto rho0 = DensityField::from_function(g, rho);
  const auto sol = fp_solve(rho0, u, 1.0, 1.0, stable_time_step(g, u, 1.0), {}, scheme);
  return l1_distance(sol.snapshots.back().density, rho0);
}

}  // namespace

TEST(Grid, Geometry) {
  const Grid1D g(-1, 1, 20);
  EXPECT_DOUBLE_EQ(g.dx(), 0.1);
  EXPECT_DOUBLE_EQ(g.center(0), -0.95);
  EXPECT_DOUBLE_EQ(g.face(20), 1.0);
  EXPECT_THROW(Grid1D(0, 1, kMinCells - 1), InvalidInput);
  EXPECT_THROW(Grid1D(1, 0, 32), InvalidInput);
}

TEST(DensityField, Validation) {
  const Grid1D g(0, 1, 16);
  EXPECT_THROW(DensityField(g, std::vector<double>(16, 0.5)), InvalidInput);
  std::vector<double> neg(16, 1.0);
  neg[3] = -0.1;
  EXPECT_THROW(DensityField::normalized(g, neg), InvalidInput);
  EXPECT_THROW(DensityField(g, std::vector<double>(15, 1.0)), InvalidInput);
  EXPECT_NEAR(DensityField::normalized(g, std::vector<double>(16, 3.0)).mass(), 1.0, 1e-15);
}

TEST(FpStep, StabilityBoundViolationsNameTheBound) {
  const Grid1D g(-5, 5, 100);
  const auto rho = gaussian(g, 0, 1);
  const auto b = stability_bounds(g, DriftSpec::linear(1.0), 1.0, 0.0);
  EXPECT_NEAR(b.diffusion, 0.1 * 0.1 / 2, 1e-15);
  try {
    fp_step(rho, DriftSpec::linear(1.0), 1.0, 0.0, 2 * b.limit());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bound"), std::string::npos);
  }
  try {
    fp_step(rho, DriftSpec::linear(100.0), 0.0, 0.0, 0.01);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("CFL"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(fp_step(rho, DriftSpec::linear(1.0), 1.0, 0.0, b.limit()));
}

TEST(FpStep, MassAndPositivityPropertyOverRandomDrifts) {
  gen::Gen gen(31);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = gen.index(16, 200);
    const Grid1D g(-4, 4, n);
    std::vector<double> table(9);
    for (auto& v : table) v = gen.uniform(-3, 3);
    const auto u = DriftSpec::tabulated(-4, 1.0, table);
    const double sigma = gen.uniform(0.0, 2.0);
    std::vector<double> init(n);
    for (auto& v : init) v = gen.uniform(0, 1) < 0.3 ? 0.0 : gen.uniform(0, 1);
    init[n / 2] += 1.0;
    DensityField rho = DensityField::normalized(g, init);
    const double dt = stable_time_step(g, u, sigma);
    for (int s = 0; s < 200; ++s) {
      for (const auto scheme : {FluxScheme::exponential_fitting, FluxScheme::upwind}) {
        const auto next = fp_step(rho, u, sigma, 0.0, dt, scheme);
        ASSERT_NEAR(next.mass(), 1.0, 1e-9) << "case " << k;
        for (double v : next.values()) ASSERT_GE(v, 0.0) << "case " << k;
        if (scheme == FluxScheme::exponential_fitting) rho = next;
      }
    }
  }
}

TEST(FpSolve, GaussianStationaryUnderItsOwnDrift) {
  const Grid1D g(-5, 5, 512);
  const auto rho = [](double x) { return std::exp(-x * x); };
  const auto u = drift_from_density(rho, 1.0, {-5, 5});
  const auto rho0 = DensityField::from_function(g, rho);
  const auto sol = fp_solve(rho0, u, 1.0, 1.0, stable_time_step(g, u, 1.0));
  EXPECT_LT(l1_distance(sol.snapshots.back().density, rho0), 1e-3);
  EXPECT_NEAR(sol.snapshots.back().density.mass(), 1.0, 1e-9);
}

TEST(FpSolve, RefinementReducesStationaryDefect) {
  const double fit_coarse = l1_change_bimodal(128, FluxScheme::exponential_fitting);
  const double fit_fine = l1_change_bimodal(256, FluxScheme::exponential_fitting);
  EXPECT_GT(fit_coarse / fit_fine, 3.0) << fit_coarse << " " << fit_fine;
  const double up_coarse = l1_change_bimodal(128, FluxScheme::upwind);
  const double up_fine = l1_change_bimodal(256, FluxScheme::upwind);
  EXPECT_GT(up_coarse / up_fine, 1.8) << up_coarse << " " << up_fine;
  EXPECT_LT(fit_fine, up_fine);
}

TEST(FpSolve, PureDiffusionVarianceGrowth) {
  const Grid1D g(-10, 10, 800);
  const auto rho0 = gaussian(g, 0.0, 0.5);
  const double sigma = 0.8, T = 1.5;
  const auto sol = fp_solve(rho0, DriftSpec::linear(0.0), sigma, T, stable_time_step(g, DriftSpec::linear(0.0), sigma));
  const auto& end = sol.snapshots.back().density;
  EXPECT_NEAR(end.variance() - rho0.variance(), sigma * sigma * T, 2e-3);
  EXPECT_NEAR(end.mean(), 0.0, 1e-12);
}

TEST(FpSolve, OuTransientMatchesAnalyticMoments) {
  const Grid1D g(-6, 6, 1024);
  const double w = 0.05;
  const auto rho0 = gaussian(g, 1.0, w);
  const auto u = DriftSpec::linear(1.0);
  const auto sol = fp_solve(rho0, u, 1.0, 1.0, stable_time_step(g, u, 1.0));
  const auto& end = sol.snapshots.back().density;
  const double decay = std::exp(-2.0);
  const auto [mean, var] = oracle::ou_moments_quadrature(1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(end.mean(), mean, 2e-3);
  EXPECT_NEAR(end.variance(), var + w * w * decay, 5e-3);
}

TEST(FpSolve, SnapshotsAndWarnings) {
  const Grid1D g(-2, 2, 64);
  const auto rho0 = gaussian(g, 1.6, 0.2);
  const std::vector<double> times{0.0, 0.1, 0.3};
  const auto u = DriftSpec::linear(0.0);
  const auto sol = fp_solve(rho0, u, 1.0, 0.3, stable_time_step(g, u, 1.0), times);
  ASSERT_EQ(sol.snapshots.size(), 3u);
  EXPECT_DOUBLE_EQ(sol.snapshots[0].t, 0.0);
  EXPECT_NEAR(sol.snapshots[2].t, 0.3, 1e-12);
  EXPECT_EQ(sol.warnings.size(), 1u);
  const std::vector<double> bad{0.5};
  EXPECT_THROW(fp_solve(rho0, u, 1.0, 0.3, 0.001, bad), ConfigError);
}

TEST(Histogram, NormalizesInRangeMassAndCountsOutliers) {
  const Grid1D g(0, 1, 16);
  const std::vector<double> xs{0.01, 0.02, 0.5, 0.99, 1.5, -0.1};
  const auto h = histogram_density(xs, g);
  EXPECT_EQ(h.out_of_range, 2u);
  EXPECT_NEAR(h.out_of_range_fraction, 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(h.density.mass(), 1.0, 1e-15);
  EXPECT_NEAR(h.density[0], 0.5 / g.dx(), 1e-12);
}

TEST(Coarsen, PreservesMassAndMean) {
  const Grid1D g(-3, 3, 256);
  const auto rho = gaussian(g, 0.4, 0.7);
  const auto c = coarsen(rho, 16);
  EXPECT_EQ(c.grid().n_cells(), 16u);
  EXPECT_NEAR(c.mass(), 1.0, 1e-14);
  // coarse cell centres shift the quadrature points, so the mean moves slightly
  EXPECT_NEAR(c.mean(), rho.mean(), 1e-4);
  EXPECT_THROW(coarsen(rho, 3), InvalidInput);
}

TEST(L1Distance, GridMismatchThrows) {
  EXPECT_THROW(l1_distance(gaussian(Grid1D(0, 1, 16), 0.5, 0.1), gaussian(Grid1D(0, 1, 32), 0.5, 0.1)), InvalidInput);
}

TEST(DensityCsv, RoundTripIsExact) {
  const auto rho = gaussian(Grid1D(-1.3, 2.9, 37), 0.2, 0.9);
  const auto path = (std::filesystem::temp_directory_path() / "stochspin_rho.csv").string();
  write_text_file(path, to_csv(rho));
  const auto back = density_from_csv(read_csv(path));
  EXPECT_TRUE(back.grid() == rho.grid());
  for (std::size_t i = 0; i < 37; ++i) EXPECT_EQ(back[i], rho[i]);
  std::filesystem::remove(path);
}

TEST(McVsFp, HistogramConvergesToDensity) {
  const double x0 = 1.0, T = 1.0;
  SdeConfig c;
  c.dt = 1e-3;
  c.n_steps = 1000;
  c.record_stride = 1000;
  c.n_particles = 40000;
  c.seed = 5;
  c.x0 = FixedStart{x0};
  c.threads = 0;
  const auto batch = simulate_ensemble(DriftSpec::linear(1.0), c);
  const Grid1D fine(-5, 5, 512);
  const auto sol = fp_solve(gaussian(fine, x0, 0.05), DriftSpec::linear(1.0), 1.0, T,
                            stable_time_step(fine, DriftSpec::linear(1.0), 1.0));
  const auto fp = coarsen(sol.snapshots.back().density, 16);
  const auto h = histogram_density(batch, batch.n_samples() - 1, fp.grid());
  EXPECT_LT(l1_distance(h.density, fp), 0.05);
}
