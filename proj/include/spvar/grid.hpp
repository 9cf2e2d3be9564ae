// Uniform cell-centred 3D grid, scalar fields and spectral calculus.
//
// Fields live on the box [c - L, c + L]^3 sampled at cell centres, so no grid
// point ever coincides with the box centre. Derivatives are spectral (the box
// is treated as periodic); callers are expected to work with fields that decay
// to ~0 well before the box faces, and the boundary-shell helpers report how
// well that assumption holds.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spvar {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a);
Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& a);

class Grid {
 public:
  /// Throws std::invalid_argument unless n is a power of two >= 8 and L > 0.
  Grid(int n, double half_width, Vec3 center = {0.0, 0.0, 0.0});

  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return 2.0 * half_width_ / n_; }
  double cell_volume() const;
  const Vec3& center() const { return center_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  double coord(int i, int axis) const {
    return center_[axis] - half_width_ + (i + 0.5) * spacing();
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  Vec3 point(int i, int j, int k) const { return {coord(i, 0), coord(j, 1), coord(k, 2)}; }
  Vec3 point(std::size_t idx) const;

  bool operator==(const Grid& other) const = default;

 private:
  int n_;
  double half_width_;
  Vec3 center_;
};

Grid make_grid(int n, double half_width, Vec3 center = {0.0, 0.0, 0.0});

class ScalarField {
 public:
  explicit ScalarField(Grid grid);
  /// Throws std::invalid_argument on a length mismatch or a non-finite value.
  ScalarField(Grid grid, std::vector<double> values);

  static ScalarField sample(const Grid& grid, const std::function<double(const Vec3&)>& f);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

  double max_abs() const;
  double max() const;
  double min() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);
ScalarField positive_part(const ScalarField& f);

/// Midpoint rule: h^3 * sum of values.
double integrate(const ScalarField& f);
/// h^3 * sum f g.
double inner(const ScalarField& f, const ScalarField& g);

std::array<ScalarField, 3> gradient_field(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);
/// Integral of |grad f|^2, evaluated in Fourier space with the same symbol as
/// gradient_field and laplacian.
double gradient_energy(const ScalarField& f);
/// Applies (-a*Laplacian + b)^{-1}; requires b > 0.
ScalarField solve_screened_poisson(const ScalarField& f, double a, double b);

/// Largest |f| over the cells within `layers` of a box face.
double boundary_shell_max(const ScalarField& f, int layers = 2);
/// Fraction of the integral of f^2 carried by the boundary shell (0 for f = 0).
double boundary_shell_mass_fraction(const ScalarField& f, int layers = 2);

enum class NormKind { L2, H1, Lq };
/// Throws std::invalid_argument for q < 1 with NormKind::Lq.
double norm(const ScalarField& f, NormKind kind, double q = 2.0);

/// Integer-cell translation with zero fill: result(x) = f(x - shift*h).
ScalarField shift_cells(const ScalarField& f, const std::array<int, 3>& shift);
/// Sub-cell translation by Fourier phase factors: result(x) = f(x - offset).
ScalarField translate_spectral(const ScalarField& f, const Vec3& offset);
/// result(x) = f(pivot + t (x - pivot)) through separable band-limited
/// interpolation; points mapped outside the box read as zero.
ScalarField rescale_about(const ScalarField& f, double t, const Vec3& pivot);
/// Trilinear interpolation; zero outside the sampled cell-centre hull.
double sample_trilinear(const ScalarField& f, const Vec3& x);
/// Resamples f onto `target` with `map` sending target points to f's coordinates.
ScalarField resample_trilinear(const ScalarField& f, const Grid& target,
                               const std::function<Vec3(const Vec3&)>& map);

}  // namespace spvar
