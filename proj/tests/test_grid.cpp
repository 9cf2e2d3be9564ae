#include "spvar/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spvar;

namespace {
double gauss(const Vec3& x, double s = 1.0) { return std::exp(-dot(x, x) / s); }
}  // namespace

TEST(Grid, SpacingAndFirstCoordinate) {
  Grid g = make_grid(8, 4.0);
  EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
  EXPECT_DOUBLE_EQ(g.coord(0, 0), -3.5);
  EXPECT_DOUBLE_EQ(make_grid(16, 8.0).spacing(), 1.0);
}

TEST(Grid, RejectsBadSizes) {
  try {
    make_grid(7, 4.0);
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n must be power of two"), std::string::npos);
  }
  EXPECT_THROW(make_grid(4, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(8, 0.0), std::invalid_argument);
  EXPECT_THROW(make_grid(8, -1.0), std::invalid_argument);
}

TEST(Grid, FieldValidation) {
  Grid g = make_grid(8, 1.0);
  EXPECT_THROW(ScalarField(g, std::vector<double>(7)), std::invalid_argument);
  std::vector<double> v(g.size(), 0.0);
  v[3] = std::nan("");
  EXPECT_THROW(ScalarField(g, v), std::invalid_argument);
}

TEST(Integrate, BoxVolumeAndZero) {
  Grid g = make_grid(8, 1.0);
  EXPECT_NEAR(integrate(ScalarField::sample(g, [](const Vec3&) { return 1.0; })), 8.0, 1e-14);
  EXPECT_EQ(integrate(ScalarField(g)), 0.0);
}

TEST(Integrate, Gaussian) {
  Grid g = make_grid(64, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return gauss(x); });
  EXPECT_NEAR(integrate(f), std::pow(std::numbers::pi, 1.5), 1e-6);
}

TEST(Integrate, Linear) {
  Grid g = make_grid(16, 3.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  ScalarField f(g), h(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = nd(rng);
    h[i] = nd(rng);
  }
  const double a = 1.7, b = -0.3;
  const double lhs = integrate(a * f + b * h);
  const double rhs = a * integrate(f) + b * integrate(h);
  EXPECT_NEAR(lhs, rhs, 1e-13 * (std::abs(a * integrate(f)) + std::abs(b * integrate(h)) + 1.0));
}

TEST(Gradient, GaussianMatchesClosedForm) {
  Grid g = make_grid(64, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return gauss(x); });
  auto grad = gradient_field(f);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.point(i);
    for (int a = 0; a < 3; ++a) err = std::max(err, std::abs(grad[a][i] + 2.0 * x[a] * gauss(x)));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Gradient, WindowedSine) {
  const double L = 8.0;
  Grid g = make_grid(64, L);
  const double k = std::numbers::pi / L;
  auto w = [](const Vec3& x) { return std::exp(-dot(x, x) / 4.0); };
  auto f = ScalarField::sample(g, [&](const Vec3& x) { return std::sin(k * x[0]) * w(x); });
  auto d = gradient_field(f)[0];
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.point(i);
    if (norm(x) > L / 2) continue;
    const double exact = (k * std::cos(k * x[0]) - 0.5 * x[0] * std::sin(k * x[0])) * w(x);
    err = std::max(err, std::abs(d[i] - exact));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Gradient, ConstantGivesZero) {
  Grid g = make_grid(16, 2.0);
  auto f = ScalarField::sample(g, [](const Vec3&) { return 3.0; });
  for (const auto& c : gradient_field(f)) EXPECT_LT(c.max_abs(), 1e-12);
}

TEST(Gradient, ParsevalConsistency) {
  Grid g = make_grid(32, 6.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) {
    return std::exp(-dot(x, x) / 2.0) * (1.0 + 0.3 * x[0] - 0.2 * x[1] * x[2]);
  });
  auto grad = gradient_field(f);
  double real_space = 0.0;
  for (const auto& c : grad) real_space += inner(c, c);
  EXPECT_NEAR(gradient_energy(f), real_space, 1e-10 * real_space);
}

TEST(Norm, ZeroAndGaussian) {
  Grid g = make_grid(64, 8.0);
  ScalarField z(g);
  EXPECT_EQ(norm(z, NormKind::L2), 0.0);
  EXPECT_EQ(norm(z, NormKind::H1), 0.0);
  EXPECT_EQ(norm(z, NormKind::Lq, 3.0), 0.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return std::exp(-dot(x, x) / 2.0); });
  const double pi32 = std::pow(std::numbers::pi, 1.5);
  EXPECT_NEAR(std::pow(norm(f, NormKind::L2), 2), pi32, 1e-8);
  EXPECT_THROW(norm(f, NormKind::Lq, 0.5), std::invalid_argument);
}

// H1 norm^2 of exp(-r^2/2) by a 1D radial integral: 4 pi int (u^2 + u'^2) r^2 dr.
TEST(Norm, H1GaussianAgainstRadialQuadrature) {
  const int m = 200000;
  const double R = 12.0, dr = R / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = (i + 0.5) * dr;
    const double u = std::exp(-r * r / 2.0);
    s += (u * u + r * r * u * u) * r * r;
  }
  const double oracle = 4.0 * std::numbers::pi * s * dr;
  Grid g = make_grid(64, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return std::exp(-dot(x, x) / 2.0); });
  EXPECT_NEAR(std::pow(norm(f, NormKind::H1), 2), oracle, 1e-8 * oracle);
}

TEST(Shift, IntegerCellShiftPreservesIntegralsAndNorms) {
  Grid g = make_grid(32, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) {
    const double r2 = dot(x, x);
    return r2 < 9.0 ? std::pow(9.0 - r2, 3) * (1.0 + 0.1 * x[0]) : 0.0;
  });
  auto s = shift_cells(f, {3, -2, 1});
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  EXPECT_LT(rel(integrate(s), integrate(f)), 1e-12);
  EXPECT_LT(rel(norm(s, NormKind::L2), norm(f, NormKind::L2)), 1e-12);
  EXPECT_LT(rel(norm(s, NormKind::Lq, 3.0), norm(f, NormKind::Lq, 3.0)), 1e-12);
  EXPECT_LT(rel(norm(s, NormKind::H1), norm(f, NormKind::H1)), 1e-12);
}

TEST(Resample, SpectralTranslationAndRescale) {
  Grid g = make_grid(32, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return gauss(x, 2.0); });
  const Vec3 off{0.3, -0.2, 0.45};
  auto t = translate_spectral(f, off);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(t[i] - gauss(g.point(i) - off, 2.0)));
  EXPECT_LT(err, 1e-8);
  auto r = rescale_about(f, 1.3, {0.0, 0.0, 0.0});
  err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(r[i] - gauss(1.3 * g.point(i), 2.0)));
  EXPECT_LT(err, 1e-8);
}

TEST(Resample, TrilinearExactOnLinear) {
  Grid g = make_grid(8, 2.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2]; });
  const Vec3 p{0.1, -0.33, 0.7};
  EXPECT_NEAR(sample_trilinear(f, p), 1.0 + 0.1 + 0.66 + 0.35, 1e-13);
  EXPECT_EQ(sample_trilinear(f, {5.0, 0.0, 0.0}), 0.0);
}

TEST(Shell, MassFraction) {
  Grid g = make_grid(16, 8.0);
  auto f = ScalarField::sample(g, [](const Vec3& x) { return gauss(x); });
  EXPECT_LT(boundary_shell_mass_fraction(f), 1e-15);
  auto one = ScalarField::sample(g, [](const Vec3&) { return 1.0; });
  EXPECT_NEAR(boundary_shell_mass_fraction(one), 1.0 - std::pow(12.0 / 16.0, 3), 1e-14);
  EXPECT_EQ(boundary_shell_mass_fraction(ScalarField(g)), 0.0);
}
