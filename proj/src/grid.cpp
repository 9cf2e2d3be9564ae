#include "spvar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace spvar {

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}

// Wavenumber of FFT index i on an n-point axis of length 2L, with the Nyquist
// mode mapped to zero so that odd-order symbols stay real-valued.
double wavenumber(int i, int n, double half_width) {
  if (i == n / 2) return 0.0;
  return std::numbers::pi * detail::frequency_index(i, n) / half_width;
}

// Multiplies the spectrum of f by symbol(kx, ky, kz) and transforms back.
template <class Symbol>
ScalarField apply_symbol(const ScalarField& f, Symbol symbol) {
  const Grid& g = f.grid();
  const int n = g.n();
  auto& ws = detail::cubic_workspace(n);
  std::copy(f.values().begin(), f.values().end(), ws.real().begin());
  ws.forward();
  auto spec = ws.spectrum();
  const int nh = n / 2 + 1;
  const double L = g.half_width();
  for (int i = 0; i < n; ++i) {
    const double kx = wavenumber(i, n, L);
    for (int j = 0; j < n; ++j) {
      const double ky = wavenumber(j, n, L);
      std::complex<double>* row = &spec[(static_cast<std::size_t>(i) * n + j) * nh];
      for (int k = 0; k < nh; ++k) row[k] *= symbol(kx, ky, wavenumber(k, n, L));
    }
  }
  ws.inverse();
  std::vector<double> out(ws.real().begin(), ws.real().end());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (double& v : out) v *= scale;
  return ScalarField(g, std::move(out));
}

}  // namespace

Grid::Grid(int n, double half_width, Vec3 center) : n_(n), half_width_(half_width), center_(center) {
  if (n < 8 || !is_power_of_two(n)) throw std::invalid_argument("n must be power of two and >= 8");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("box half-width L must be positive");
}

double Grid::cell_volume() const {
  const double h = spacing();
  return h * h * h;
}

Vec3 Grid::point(std::size_t idx) const {
  const auto n = static_cast<std::size_t>(n_);
  const int k = static_cast<int>(idx % n);
  const int j = static_cast<int>((idx / n) % n);
  const int i = static_cast<int>(idx / (n * n));
  return point(i, j, k);
}

Grid make_grid(int n, double half_width, Vec3 center) { return Grid(n, half_width, center); }

ScalarField::ScalarField(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("field contains a non-finite value");
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(const Vec3&)>& f) {
  std::vector<double> v(grid.size());
  const int n = grid.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) v[grid.index(i, j, k)] = f(grid.point(i, j, k));
  return ScalarField(grid, std::move(v));
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ScalarField positive_part(const ScalarField& f) {
  ScalarField out = f;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

std::array<ScalarField, 3> gradient_field(const ScalarField& f) {
  const std::complex<double> I(0.0, 1.0);
  return {apply_symbol(f, [&](double kx, double, double) { return I * kx; }),
          apply_symbol(f, [&](double, double ky, double) { return I * ky; }),
          apply_symbol(f, [&](double, double, double kz) { return I * kz; })};
}

ScalarField laplacian(const ScalarField& f) {
  return apply_symbol(f, [](double kx, double ky, double kz) {
    return std::complex<double>(-(kx * kx + ky * ky + kz * kz), 0.0);
  });
}

double gradient_energy(const ScalarField& f) { return -inner(f, laplacian(f)); }

ScalarField solve_screened_poisson(const ScalarField& f, double a, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("screened Poisson solve needs b > 0");
  return apply_symbol(f, [a, b](double kx, double ky, double kz) {
    return std::complex<double>(1.0 / (a * (kx * kx + ky * ky + kz * kz) + b), 0.0);
  });
}

namespace {
bool in_shell(const Grid& g, int i, int j, int k, int layers) {
  const int n = g.n();
  auto edge = [&](int x) { return x < layers || x >= n - layers; };
  return edge(i) || edge(j) || edge(k);
}
}  // namespace

double boundary_shell_max(const ScalarField& f, int layers) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k)
        if (in_shell(g, i, j, k, layers)) m = std::max(m, std::abs(f[g.index(i, j, k)]));
  return m;
}

double boundary_shell_mass_fraction(const ScalarField& f, int layers) {
  const Grid& g = f.grid();
  double shell = 0.0, total = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) {
        const double v = f[g.index(i, j, k)];
        total += v * v;
        if (in_shell(g, i, j, k, layers)) shell += v * v;
      }
  return total > 0.0 ? shell / total : 0.0;
}

double norm(const ScalarField& f, NormKind kind, double q) {
  switch (kind) {
    case NormKind::L2:
      return std::sqrt(inner(f, f));
    case NormKind::H1:
      return std::sqrt(inner(f, f) + gradient_energy(f));
    case NormKind::Lq: {
      if (!(q >= 1.0)) throw std::invalid_argument("Lq norm requires q >= 1");
      double s = 0.0;
      for (double v : f.values()) s += std::pow(std::abs(v), q);
      return std::pow(s * f.grid().cell_volume(), 1.0 / q);
    }
  }
  return 0.0;
}

ScalarField shift_cells(const ScalarField& f, const std::array<int, 3>& shift) {
  const Grid& g = f.grid();
  const int n = g.n();
  ScalarField out(g);
  for (int i = 0; i < n; ++i) {
    const int si = i - shift[0];
    if (si < 0 || si >= n) continue;
    for (int j = 0; j < n; ++j) {
      const int sj = j - shift[1];
      if (sj < 0 || sj >= n) continue;
      for (int k = 0; k < n; ++k) {
        const int sk = k - shift[2];
        if (sk < 0 || sk >= n) continue;
        out[g.index(i, j, k)] = f[g.index(si, sj, sk)];
      }
    }
  }
  return out;
}

ScalarField translate_spectral(const ScalarField& f, const Vec3& offset) {
  return apply_symbol(f, [&](double kx, double ky, double kz) {
    return std::polar(1.0, -(kx * offset[0] + ky * offset[1] + kz * offset[2]));
  });
}

namespace {
// Periodic band-limited interpolation weight for an even number of samples,
// s measured in cells from the sample.
double periodic_sinc(double s, int n) {
  if (std::abs(s) < 1e-12) return 1.0;
  const double a = std::numbers::pi * s;
  const double t = std::tan(a / n);
  if (std::abs(t) < 1e-300) return 1.0;
  return std::sin(a) / (n * t);
}
}  // namespace

ScalarField rescale_about(const ScalarField& f, double t, const Vec3& pivot) {
  const Grid& g = f.grid();
  const int n = g.n();
  const double h = g.spacing();
  // weights[a][i*n + j]: contribution of source sample j to target sample i on axis a.
  std::array<std::vector<double>, 3> weights;
  for (int a = 0; a < 3; ++a) {
    weights[a].assign(static_cast<std::size_t>(n) * n, 0.0);
    const double lo = g.center()[a] - g.half_width();
    const double hi = g.center()[a] + g.half_width();
    for (int i = 0; i < n; ++i) {
      const double xs = pivot[a] + t * (g.coord(i, a) - pivot[a]);
      if (xs < lo || xs > hi) continue;
      for (int j = 0; j < n; ++j)
        weights[a][static_cast<std::size_t>(i) * n + j] = periodic_sinc((xs - g.coord(j, a)) / h, n);
    }
  }
  std::vector<double> cur(f.values().begin(), f.values().end());
  std::vector<double> next(cur.size());
  const auto N = static_cast<std::size_t>(n);
  // Axis 2 (contiguous), then 1, then 0.
  for (std::size_t ij = 0; ij < N * N; ++ij)
    for (std::size_t k = 0; k < N; ++k) {
      double s = 0.0;
      const double* w = &weights[2][k * N];
      for (std::size_t m = 0; m < N; ++m) s += w[m] * cur[ij * N + m];
      next[ij * N + k] = s;
    }
  std::swap(cur, next);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      const double* w = &weights[1][j * N];
      for (std::size_t k = 0; k < N; ++k) {
        double s = 0.0;
        for (std::size_t m = 0; m < N; ++m) s += w[m] * cur[(i * N + m) * N + k];
        next[(i * N + j) * N + k] = s;
      }
    }
  std::swap(cur, next);
  for (std::size_t i = 0; i < N; ++i) {
    const double* w = &weights[0][i * N];
    for (std::size_t jk = 0; jk < N * N; ++jk) {
      double s = 0.0;
      for (std::size_t m = 0; m < N; ++m) s += w[m] * cur[m * N * N + jk];
      next[i * N * N + jk] = s;
    }
  }
  return ScalarField(g, std::move(next));
}

double sample_trilinear(const ScalarField& f, const Vec3& x) {
  const Grid& g = f.grid();
  const int n = g.n();
  const double h = g.spacing();
  std::array<int, 3> i0{};
  std::array<double, 3> w{};
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] - (g.center()[a] - g.half_width())) / h - 0.5;
    if (s < 0.0 || s > n - 1) return 0.0;
    i0[a] = std::min(static_cast<int>(std::floor(s)), n - 2);
    w[a] = s - i0[a];
  }
  double v = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const double wt = (di ? w[0] : 1 - w[0]) * (dj ? w[1] : 1 - w[1]) * (dk ? w[2] : 1 - w[2]);
        v += wt * f[g.index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
      }
  return v;
}

ScalarField resample_trilinear(const ScalarField& f, const Grid& target,
                               const std::function<Vec3(const Vec3&)>& map) {
  return ScalarField::sample(target, [&](const Vec3& x) { return sample_trilinear(f, map(x)); });
}

}  // namespace spvar
