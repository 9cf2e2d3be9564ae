#include "spvar/coulomb.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spvar;

namespace {

constexpr double pi = std::numbers::pi;

// Independent discrete kernel: 1/(4 pi |x|) between cell centres and the
// cell average of 1/(4 pi |x|) on the diagonal.
double kernel(int di, int dj, int dk, double h) {
  if (di == 0 && dj == 0 && dk == 0) return (3.0 * std::log(2.0 + std::sqrt(3.0)) - pi / 2.0) / (4.0 * pi * h);
  return 1.0 / (4.0 * pi * h * std::sqrt(double(di * di + dj * dj + dk * dk)));
}

// h^6 sum_ij q_i K_ij q_j.
double direct_energy(const ScalarField& q) {
  const Grid& g = q.grid();
  const int n = g.n();
  const double h = g.spacing();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double qa = q[g.index(i, j, k)];
        if (qa == 0.0) continue;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) s += qa * q[g.index(a, b, c)] * kernel(i - a, j - b, k - c, h);
      }
  return s * std::pow(h, 6);
}

ScalarField gaussian(const Grid& g, double s = 1.0) {
  return ScalarField::sample(g, [s](const Vec3& x) { return std::exp(-dot(x, x) / (2.0 * s * s)); });
}

}  // namespace

TEST(Coulomb, CellAverageConstant) {
  EXPECT_NEAR(kUnitCubeInverseDistance, 3.0 * std::log(2.0 + std::sqrt(3.0)) - pi / 2.0, 1e-15);
  EXPECT_EQ(kOmega, 4.0 * pi);
}

TEST(Coulomb, DirectZeroAndSingleCell) {
  const Grid g = make_grid(8, 2.0);
  const ScalarField z = poisson_direct(ScalarField(g));
  EXPECT_EQ(z.max_abs(), 0.0);
  ScalarField q(g);
  const std::size_t src = g.index(3, 4, 2);
  q[src] = 1.0;
  const ScalarField phi = poisson_direct(q);
  const double h3 = g.cell_volume();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k)
        EXPECT_NEAR(phi[g.index(i, j, k)], h3 * kernel(i - 3, j - 4, k - 2, g.spacing()), 1e-15);
  EXPECT_THROW(poisson_direct(ScalarField(make_grid(32, 1.0))), std::invalid_argument);
}

TEST(Coulomb, FftMatchesDirect) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Grid g = make_grid(8, 3.0, {0.5, -1.0, 0.25});
  for (int t = 0; t < 20; ++t) {
    const ScalarField q = ScalarField::sample(g, [&](const Vec3&) { return uni(rng); });
    const ScalarField a = poisson_fft(q), b = poisson_direct(q);
    EXPECT_LT((a - b).max_abs() / b.max_abs(), 1e-10);
  }
  const ScalarField q = gaussian(g);
  EXPECT_LT((poisson_fft(q) - poisson_direct(q)).max_abs() / poisson_direct(q).max_abs(), 1e-10);
}

TEST(Coulomb, PointChargeFarField) {
  const Grid g = make_grid(32, 8.0);
  ScalarField q(g);
  const std::size_t src = g.index(16, 16, 16);
  q[src] = 1.0 / g.cell_volume();  // unit charge
  const ScalarField phi = poisson_fft(q);
  const Vec3 c = g.point(src);
  for (int i : {0, 2, 5, 28, 31}) {
    const std::size_t idx = g.index(i, 16, 16);
    const double r = norm(g.point(idx) - c);
    EXPECT_NEAR(phi[idx] * 4.0 * pi * r, 1.0, 1e-3) << r;
  }
}

TEST(Coulomb, UniformBall) {
  const Grid g = make_grid(64, 2.0);
  const double R = 1.0;
  const ScalarField q = ScalarField::sample(g, [R](const Vec3& x) { return dot(x, x) < R * R ? 1.0 : 0.0; });
  const double Q = integrate(q);
  const ScalarField phi = poisson_fft(q);
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const double r = norm(g.point(i));
    if (std::abs(r - R) < 0.15) continue;  // staircase surface
    const double exact = r > R ? Q / (4.0 * pi * r) : Q * (3.0 * R * R - r * r) / (8.0 * pi * R * R * R);
    EXPECT_NEAR(phi[i], exact, 1e-2 * exact) << r;
  }
}

TEST(Coulomb, EnergyMatchesDirectDoubleSum) {
  const Grid g = make_grid(16, 4.0);
  const ScalarField u = gaussian(g);
  const CoulombSolution cs = coulomb_energy(u, make_constant(1.0));
  const double d = direct_energy(hadamard(u, u));
  EXPECT_NEAR(cs.coulomb_energy, d, 1e-8 * d);
}

TEST(Coulomb, ZeroAndQuarticScaling) {
  const Grid g = make_grid(32, 4.0);
  const ChargeDensity cd = make_coercive_power(1.0, 2.0);
  const CoulombSolution z = coulomb_energy(ScalarField(g), cd);
  EXPECT_EQ(z.coulomb_energy, 0.0);
  EXPECT_EQ(z.dirichlet_energy, 0.0);
  const ScalarField u = gaussian(g, 0.8);
  const double d1 = coulomb_energy(u, cd).coulomb_energy;
  const double d2 = coulomb_energy(2.0 * u, cd).coulomb_energy;
  EXPECT_NEAR(d2, 16.0 * d1, 1e-12 * 16.0 * d1);
}

TEST(Coulomb, GaussianClosedForm) {
  // D(u) for u = e^{-r^2/2}, rho = 1 is (pi^2/4) sqrt(2/pi); the grid value is O(h^2) off.
  const Grid g = make_grid(64, 6.0);
  const double exact = pi * pi / 4.0 * std::sqrt(2.0 / pi);
  const CoulombSolution cs = coulomb_energy(gaussian(g), make_constant(1.0));
  EXPECT_NEAR(cs.coulomb_energy, exact, 2e-3 * exact);
}

TEST(Coulomb, EnergyIdentity) {
  const Grid g = make_grid(64, 4.0);
  const ScalarField u = gaussian(g);
  const CoulombSolution cs = coulomb_energy(u, make_constant(1.0));
  EXPECT_LT(std::abs(cs.dirichlet_energy - cs.coulomb_energy) / cs.coulomb_energy, 1e-3);
}

TEST(Coulomb, ReflectionSymmetryAndPositivity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Grid g = make_grid(16, 3.0);
  const ChargeDensity cd = make_coercive_power(1.0, 1.5);
  for (int t = 0; t < 5; ++t) {
    const ScalarField u = ScalarField::sample(g, [&](const Vec3& x) { return uni(rng) * std::exp(-dot(x, x) / 4.0); });
    ScalarField r(g);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        for (int k = 0; k < 16; ++k) r[g.index(i, j, k)] = u[g.index(15 - i, 15 - j, 15 - k)];
    const double a = coulomb_energy(u, cd).coulomb_energy, b = coulomb_energy(r, cd).coulomb_energy;
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, b, 1e-12 * a);
    EXPECT_GE(coulomb_potential(u, cd).min(), 0.0);
  }
}

TEST(Coulomb, HardyLittlewoodSobolev) {
  // Sharp constant for int int f f / |x - y| <= C ||f||_{6/5}^2 in R^3.
  const double C = std::sqrt(pi) * std::tgamma(1.0) / std::tgamma(2.5) *
                   std::pow(std::tgamma(1.5) / std::tgamma(3.0), -2.0 / 3.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0.2, 1.5);
  const Grid g = make_grid(32, 5.0);
  const ChargeDensity cd = make_coercive_power(1.0, 2.0);
  for (int t = 0; t < 5; ++t) {
    const double s = uni(rng), a = uni(rng);
    const ScalarField u = ScalarField::sample(g, [&](const Vec3& x) {
      return std::exp(-dot(x, x) / (2 * s * s)) + a * std::exp(-dot(x - Vec3{1, 0, 0}, x - Vec3{1, 0, 0}));
    });
    const ScalarField q = hadamard(sample_rho(cd, g), hadamard(u, u));
    const double d = coulomb_energy(u, cd).coulomb_energy;
    const double nq = norm(q, NormKind::Lq, 1.2);
    EXPECT_LE(d, C / (4.0 * pi) * nq * nq);
  }
}
