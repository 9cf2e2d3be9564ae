#include "spvar/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace spvar;

namespace {

// Root of a + t^2 gamma = t^{p-1} delta by plain bisection.
double bisect_ray(double a, double gamma, double delta, double p) {
  auto f = [&](double t) { return a + t * t * gamma - std::pow(t, p - 1) * delta; };
  double lo = 1e-6, hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(NehariProject, MatchesBisectionOracle) {
  const Grid g = make_grid(16, 4.0);
  const ScalarField u = gaussian_seed(g, {0.2, 0.0, -0.1}, 0.8, 1.2);
  for (const ChargeDensity& cd : {make_constant(0.0), make_constant(1.0), make_coercive_power(1.0, 2.0)}) {
    for (double p : {3.5, 4.0, 4.5}) {
      ProblemParams pp;
      pp.p = p;
      pp.mu = 0.8;
      const FieldIntegrals fi = field_integrals(u, cd, pp);
      const double t = nehari_project(u, cd, pp);
      const double oracle = bisect_ray(fi.grad_sq + fi.mass, fi.coulomb, pp.mu * fi.power, p);
      EXPECT_NEAR(t, oracle, 1e-10 * oracle) << cd.describe() << " p=" << p;
      const ScalarField v = t * u;
      const FieldIntegrals fv = field_integrals(v, cd, pp);
      EXPECT_LT(std::abs(nehari_value(v, cd, pp)), 1e-10 * (fv.grad_sq + fv.mass));
      // Projecting a point already on the manifold is the identity.
      EXPECT_NEAR(nehari_project(v, cd, pp), 1.0, 1e-10);
    }
  }
}

TEST(NehariProject, ClosedFormWithoutCharge) {
  const Grid g = make_grid(16, 4.0);
  const ScalarField u = gaussian_seed(g, {}, 1.3, 1.0);
  ProblemParams pp;
  pp.p = 4.0;
  const FieldIntegrals fi = field_integrals(u, make_constant(0.0), pp);
  EXPECT_NEAR(nehari_project(u, make_constant(0.0), pp), std::pow((fi.grad_sq + fi.mass) / fi.power, 1.0 / 3.0), 1e-12);
}

TEST(NehariProject, RejectsIllPosedRegimes) {
  const Grid g = make_grid(8, 2.0);
  ProblemParams pp;
  pp.p = 3.0;
  try {
    nehari_project(gaussian_seed(g, {}, 1.0, 1.0), make_constant(1.0), pp);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("Nehari projection not well-posed"), std::string::npos);
  }
  pp.p = 4.0;
  EXPECT_THROW(nehari_project(ScalarField(g), make_constant(1.0), pp), std::invalid_argument);
  EXPECT_THROW(nehari_project(-1.0 * gaussian_seed(g, {}, 1.0, 1.0), make_constant(1.0), pp), std::invalid_argument);
}

TEST(Solvers, TrivialSeedRejected) {
  const Grid g = make_grid(8, 2.0);
  ProblemParams pp;
  pp.p = 4.0;
  try {
    ground_state_nehari(make_constant(1.0), pp, ScalarField(g));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("trivial seed"), std::string::npos);
  }
  pp.p = 2.5;
  EXPECT_THROW(mountain_pass_solve(make_constant(1.0), pp, ScalarField(g)), std::invalid_argument);
  pp.p = 5.0;
  EXPECT_THROW(mountain_pass_solve(make_constant(1.0), pp, gaussian_seed(g, {}, 1.0, 1.0)), std::invalid_argument);
}

TEST(Solvers, NehariGroundStateWithoutCharge) {
  // p = 4, rho = 0: the decoupled ground state, whose energy the radial oracle fixes.
  // Its core is about 0.2 wide, so the grid has to be fine.
  const Grid g = make_grid(64, 4.0);
  ProblemParams pp;
  pp.p = 4.0;
  const SolutionRecord rec = ground_state_nehari(make_constant(0.0), pp, gaussian_seed(g, {}, 2.0, 1.5));
  ASSERT_TRUE(rec.converged) << rec.status;
  EXPECT_LT(rec.residual_l2, 1e-8);
  const oracle::Kwong k = oracle::kwong(4.0);
  const double I = k.radial_integral([](double u) { return 0.3 * std::pow(u, 5.0); });
  EXPECT_NEAR(rec.energy.total, I, 5e-3 * I);
  // The core falls between cell centres, so the grid maximum only brackets u0.
  EXPECT_GE(rec.u.max(), peak_lower_bound(pp));
  EXPECT_LE(rec.u.max(), k.u0);
  EXPECT_LT(rec.nehari_residual, 1e-6 * rec.h1_norm_sq);
}

TEST(Solvers, MountainPassCoercive) {
  const Grid g = make_grid(32, 4.0);
  ProblemParams pp;
  pp.p = 2.5;
  const ChargeDensity cd = make_coercive_power(1.0, 2.0);
  const SolutionRecord rec = mountain_pass_solve(cd, pp, gaussian_seed(g, {}, 2.0 * peak_lower_bound(pp), 1.0));
  ASSERT_TRUE(rec.converged) << rec.status;
  EXPECT_LT(rec.residual_l2, 1e-8);
  EXPECT_GT(rec.energy.total, 0.0);
  EXPECT_GE(rec.u.max(), peak_lower_bound(pp) - 1e-10);
  EXPECT_LT(rec.nehari_residual, 1e-6 * rec.h1_norm_sq);
  // The solution is a critical point on its scaling path: the path maximum is at t = 1.
  EXPECT_NEAR(path_family_max(rec.u, cd, pp, 0.8, 1.25), rec.energy.total, 1e-3 * rec.energy.total);
}

TEST(Solvers, BumpLowersEnergyBelowConstantBackground) {
  const Grid g = make_grid(32, 5.0);
  ProblemParams pp;
  pp.p = 3.5;
  const ScalarField seed = gaussian_seed(g, {}, 2.0 * peak_lower_bound(pp), 1.0);
  const SolutionRecord bump = mountain_pass_solve(make_bumped_constant(1.0, 0.5, 1.0, {}), pp, seed);
  const SolutionRecord flat = mountain_pass_solve(make_constant(1.0), pp, seed);
  ASSERT_TRUE(bump.converged && flat.converged);
  EXPECT_LT(bump.energy.total, flat.energy.total);
}

TEST(MuContinuation, ValidatesGrid) {
  const Grid g = make_grid(8, 2.0);
  const ScalarField seed = gaussian_seed(g, {}, 1.0, 1.0);
  ProblemParams pp;
  pp.p = 2.5;
  EXPECT_THROW(mu_continuation(make_constant(1.0), pp, {}, seed), std::invalid_argument);
  EXPECT_THROW(mu_continuation(make_constant(1.0), pp, {0.4, 1.0}, seed), std::invalid_argument);
  EXPECT_THROW(mu_continuation(make_constant(1.0), pp, {0.8, 0.6}, seed), std::invalid_argument);
}

TEST(MuContinuation, LevelsDecreaseInMu) {
  const Grid g = make_grid(32, 4.0);
  ProblemParams pp;
  pp.p = 2.5;
  const ChargeDensity cd = make_coercive_power(1.0, 2.0);
  const ContinuationResult r =
      mu_continuation(cd, pp, {0.5, 0.75, 1.0}, gaussian_seed(g, {}, 2.0 * std::pow(2.0, 1.0 / 1.5), 1.0));
  ASSERT_TRUE(r.complete);
  ASSERT_EQ(r.c_values.size(), 3u);
  EXPECT_TRUE(r.monotone_ok);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_LE(r.c_values[i], r.c_values[i - 1] + 1e-6);
  for (const SolutionRecord& rec : r.records) EXPECT_EQ(rec.params.p, 2.5);
}

TEST(Solvers, HelpersAndRecord) {
  ProblemParams pp;
  pp.p = 3.0;
  pp.lambda = 4.0;
  pp.mu = 1.0;
  EXPECT_NEAR(peak_lower_bound(pp), 2.0, 1e-15);
  const ChargeDensity half = scale_charge(make_coercive_power(1.0, 2.0), 0.5);
  EXPECT_NEAR(eval_rho(half, {1.0, 0.0, 0.0}), 1.0, 1e-15);
  EXPECT_EQ(eval_rho(scale_charge(make_constant(3.0), 0.0), {0.3, 0.0, 0.0}), 0.0);
  const Grid g = make_grid(16, 4.0);
  const ScalarField s = gaussian_seed(g, {0.5, 0.0, 0.0}, 2.0, 1.0);
  // Nearest cell centre sits a quarter cell-width off in every axis.
  EXPECT_NEAR(s.max(), 2.0 * std::exp(-3.0 * 0.0625), 1e-12);
  const SolutionRecord rec = make_record(s, make_constant(1.0), pp);
  EXPECT_EQ(rec.energy.total, energy(s, make_constant(1.0), pp).total);
  EXPECT_NEAR(rec.nehari_residual, std::abs(nehari_value(s, make_constant(1.0), pp)), 1e-12);
  EXPECT_FALSE(rec.converged);
}
