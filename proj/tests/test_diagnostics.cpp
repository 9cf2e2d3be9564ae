#include "spvar/diagnostics.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace spvar;

namespace {

// Energy, Nehari and Pohozaev-with-k identities held with equality; the
// solution (alpha, gamma, delta) is the extreme triple at level c.
Eigen::Vector3d extreme_triple(double c, double k, double p) {
  Eigen::Matrix3d A;
  A << 0.5, 0.25, -1.0 / (p + 1.0),  //
      1.0, 1.0, -1.0,                 //
      -0.5, -(5.0 + 2.0 * k) / 4.0, 3.0 / (p + 1.0);
  return A.colPivHouseholderQr().solve(Eigen::Vector3d(c, 0.0, 0.0));
}

}  // namespace

TEST(TripleBounds, ReferenceValues) {
  const TripleBounds b = triple_bounds(1.0, 0.0, 2.5);
  EXPECT_NEAR(b.delta_max, 10.5, 1e-12);
  EXPECT_NEAR(b.gamma_max, 5.0, 1e-12);
  const TripleBounds z = triple_bounds(0.0, 0.0, 2.5);
  EXPECT_EQ(z.delta_max, 0.0);
  EXPECT_EQ(z.gamma_max, 0.0);
}

TEST(TripleBounds, AgreeWithLinearSystem) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pd(2.05, 2.95), cd(0.1, 20.0), kd(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double p = pd(rng), c = cd(rng);
    const double k = -2.0 * (p - 2.0) / (p - 1.0) * 0.95 + kd(rng);
    const TripleBounds b = triple_bounds(c, k, p);
    const Eigen::Vector3d x = extreme_triple(c, k, p);
    EXPECT_NEAR(b.delta_max, x[2], 1e-9 * std::abs(x[2])) << p << " " << k;
    EXPECT_NEAR(b.gamma_max, x[1], 1e-9 * std::abs(x[1])) << p << " " << k;
    // Homogeneous of degree one in c.
    const TripleBounds b2 = triple_bounds(2.0 * c, k, p);
    EXPECT_NEAR(b2.delta_max, 2.0 * b.delta_max, 1e-12 * b2.delta_max);
  }
}

TEST(TripleBounds, Rejections) {
  try {
    triple_bounds(1.0, -0.8, 2.5);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("k below admissible threshold -2(p-2)/(p-1) = -2/3"), std::string::npos);
  }
  EXPECT_THROW(triple_bounds(1.0, 0.0, 3.0), std::invalid_argument);
  EXPECT_THROW(triple_bounds(-1.0, 0.0, 2.5), std::invalid_argument);
}

TEST(LowerBound, Coefficients) {
  EXPECT_NEAR(lower_bound_coefficient(0.0, 2.5), 1.0 / 10.5, 1e-15);
  EXPECT_NEAR(lower_bound_coefficient(0.0, 3.0), 0.25, 1e-15);
  EXPECT_NEAR(lower_bound_coefficient(5.0, 4.0), 0.3, 1e-15);
  for (double p = 2.05; p < 4.99; p += 0.1)
    for (double k : {-0.05, 0.0, 0.5, 2.0}) {
      if (2.0 * (p - 2.0) + k * (p - 1.0) <= 0.0) continue;
      EXPECT_GT(lower_bound_coefficient(k, p), 0.0) << p << " " << k;
    }
  SobolevEstimate S;
  S.p = 2.5;
  S.S_hat = 3.0;
  const double c1 = lower_bound_C(0.0, 2.5, S);
  S.S_hat = 6.0;
  EXPECT_NEAR(lower_bound_C(0.0, 2.5, S), std::pow(2.0, 3.5 / 1.5) * c1, 1e-12 * c1);
  S.S_hat = 0.0;
  EXPECT_THROW(lower_bound_C(0.0, 2.5, S), std::invalid_argument);
}

TEST(Sobolev, CubicMatchesGroundStateQuotient) {
  // The minimiser is the decoupled ground state Q, whose quotient is B^{(p-1)/(p+1)}
  // with B = int Q^{p+1}.
  const oracle::Kwong k = oracle::kwong(3.0);
  const double B = k.radial_integral([](double u) { return u * u * u * u; });
  const SobolevEstimate S = sobolev_estimate(make_grid(32, 6.0), 3.0);
  EXPECT_NEAR(S.S_hat, std::sqrt(B), 1e-2 * std::sqrt(B));
  EXPECT_GT(S.iterations, 0);
  // Any trial field bounds the estimate from above.
  const Grid g = make_grid(32, 6.0);
  for (double w : {0.7, 1.0, 1.5}) EXPECT_GE(sobolev_quotient(gaussian_seed(g, {}, 1.0, w), 3.0), S.S_hat);
  EXPECT_THROW(sobolev_estimate(g, 5.0), std::invalid_argument);
}

TEST(Sobolev, QuotientIsScaleInvariantInAmplitude) {
  const Grid g = make_grid(16, 4.0);
  const ScalarField u = gaussian_seed(g, {}, 1.0, 1.0);
  EXPECT_NEAR(sobolev_quotient(3.0 * u, 2.5), sobolev_quotient(u, 2.5), 1e-12 * sobolev_quotient(u, 2.5));
}

TEST(DecayFit, PureExponential) {
  const Grid g = make_grid(64, 8.0);
  const ScalarField u = ScalarField::sample(g, [](const Vec3& x) { return std::exp(-norm(x)); });
  const DecayFit f = decay_fit(u, make_constant(1.0), {0.0, 0.0, 0.0});
  EXPECT_NEAR(f.gamma_fit, 1.0, 1e-3);
  EXPECT_NEAR(f.shell_inner, 4.0, 1e-12);
  EXPECT_NEAR(f.shell_outer, 7.2, 1e-12);
}

TEST(DecayFit, StretchedExponentialRecovered) {
  const Grid g = make_grid(64, 8.0);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ad(1.2, 1.6), bd(0.5, 1.0);
  for (int t = 0; t < 10; ++t) {
    const double alpha = ad(rng), B = bd(rng);
    const ScalarField u =
        ScalarField::sample(g, [&](const Vec3& x) { return std::exp(-B * std::pow(1.0 + norm(x), alpha)); });
    const DecayFit f = decay_fit(u, make_coercive_power(1.0, 2.0), {0.0, 0.0, 0.0});
    EXPECT_NEAR(f.alpha_fit, alpha, 1e-2 * alpha);
    EXPECT_NEAR(f.stretch_coefficient, B, 2e-2 * B);
  }
  const ScalarField u = ScalarField::sample(g, [](const Vec3& x) { return std::exp(-std::pow(1.0 + norm(x), 1.5)); });
  EXPECT_NEAR(decay_fit(u, make_coercive_power(1.0, 2.0), {0.0, 0.0, 0.0}).alpha_fit, 1.5, 2e-2);
}

TEST(DecayFit, VanishingShellThrows) {
  const Grid g = make_grid(16, 4.0);
  const ScalarField u = ScalarField::sample(g, [](const Vec3& x) { return norm(x) < 1.0 ? 1.0 : 0.0; });
  EXPECT_THROW(decay_fit(u, make_constant(1.0), {0.0, 0.0, 0.0}), std::runtime_error);
}

TEST(TripleIdentity, ZeroRecord) {
  const Grid g = make_grid(8, 2.0);
  ProblemParams pp;
  pp.p = 2.5;
  const TripleIdentity t = check_triple_consistency(make_record(ScalarField(g), make_constant(1.0), pp), 0.0);
  EXPECT_EQ(t.alpha, 0.0);
  EXPECT_EQ(t.gamma, 0.0);
  EXPECT_EQ(t.delta, 0.0);
  EXPECT_EQ(t.residual_energy, 0.0);
  EXPECT_EQ(t.residual_nehari, 0.0);
}

TEST(TripleIdentity, ConvergedCoerciveSolution) {
  const Grid g = make_grid(32, 4.0);
  ProblemParams pp;
  pp.p = 2.5;
  const ChargeDensity cd = make_coercive_power(1.0, 2.0, 0.0);
  const SolutionRecord rec = mountain_pass_solve(cd, pp, gaussian_seed(g, {}, 2.0 * peak_lower_bound(pp), 1.0));
  ASSERT_TRUE(rec.converged);
  const TripleIdentity t = check_triple_consistency(rec, 0.0);
  const double scale = t.alpha + t.gamma + t.delta;
  EXPECT_LT(t.residual_energy, 1e-12 * scale);
  EXPECT_LT(t.residual_nehari, 1e-6 * scale);
  EXPECT_TRUE(t.bounds_applicable);
  EXPECT_TRUE(t.bounds_ok);
  EXPECT_LE(t.delta, t.bounds.delta_max);
  EXPECT_LE(t.gamma, t.bounds.gamma_max);
  EXPECT_GT(t.slack_pohozaev, -2e-2 * scale);
}
