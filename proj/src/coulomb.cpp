#include "spvar/coulomb.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fft.hpp"

namespace spvar {

double green_kernel(int di, int dj, int dk, double h) {
  if (di == 0 && dj == 0 && dk == 0) return kUnitCubeInverseDistance / (kOmega * h);
  const double r = h * std::sqrt(static_cast<double>(di * di + dj * dj + dk * dk));
  return 1.0 / (kOmega * r);
}

namespace {

constexpr int kPadSlot = 1;

// Spectrum of the padded kernel; real because the kernel is even.
const std::vector<double>& kernel_spectrum(int n, double h) {
  thread_local std::map<std::pair<int, std::uint64_t>, std::unique_ptr<std::vector<double>>> cache;
  auto& entry = cache[{n, std::bit_cast<std::uint64_t>(h)}];
  if (entry) return *entry;
  const int m = 2 * n;
  auto& ws = detail::cubic_workspace(m, kPadSlot);
  auto real = ws.real();
  for (int i = 0; i < m; ++i) {
    const int di = i < n ? i : i - m;
    for (int j = 0; j < m; ++j) {
      const int dj = j < n ? j : j - m;
      for (int k = 0; k < m; ++k) {
        const int dk = k < n ? k : k - m;
        real[(static_cast<std::size_t>(i) * m + j) * m + k] = green_kernel(di, dj, dk, h);
      }
    }
  }
  ws.forward();
  auto spec = ws.spectrum();
  entry = std::make_unique<std::vector<double>>(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) (*entry)[i] = spec[i].real();
  return *entry;
}

}  // namespace

ScalarField poisson_fft(const ScalarField& q) {
  const Grid& g = q.grid();
  const int n = g.n();
  const int m = 2 * n;
  const auto& kspec = kernel_spectrum(n, g.spacing());
  auto& ws = detail::cubic_workspace(m, kPadSlot);
  auto real = ws.real();
  std::fill(real.begin(), real.end(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* src = &q.values()[g.index(i, j, 0)];
      std::copy(src, src + n, &real[(static_cast<std::size_t>(i) * m + j) * m]);
    }
  ws.forward();
  auto spec = ws.spectrum();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kspec[i];
  ws.inverse();
  // Inverse FFT normalisation times the h^3 quadrature weight.
  const double scale = g.cell_volume() / (static_cast<double>(m) * m * m);
  std::vector<double> out(g.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* src = &real[(static_cast<std::size_t>(i) * m + j) * m];
      double* dst = &out[g.index(i, j, 0)];
      for (int k = 0; k < n; ++k) dst[k] = scale * src[k];
    }
  return ScalarField(g, std::move(out));
}

ScalarField poisson_direct(const ScalarField& q) {
  const Grid& g = q.grid();
  const int n = g.n();
  if (n > 16) throw std::invalid_argument("poisson_direct: grid too large (n > 16)");
  const double h = g.spacing();
  ScalarField phi(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) s += green_kernel(i - a, j - b, k - c, h) * q[g.index(a, b, c)];
        phi[g.index(i, j, k)] = s * g.cell_volume();
      }
  return phi;
}

namespace {

struct Multipole {
  double Q = 0.0;
  Vec3 p{0.0, 0.0, 0.0};
  double quad[3][3] = {};
};

Multipole moments(const ScalarField& q) {
  const Grid& g = q.grid();
  Multipole m;
  const double dv = g.cell_volume();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double w = q[idx] * dv;
    if (w == 0.0) continue;
    const Vec3 y = g.point(idx) - g.center();
    const double r2 = dot(y, y);
    m.Q += w;
    for (int a = 0; a < 3; ++a) {
      m.p[a] += w * y[a];
      for (int b = 0; b < 3; ++b) m.quad[a][b] += w * (3.0 * y[a] * y[b] - (a == b ? r2 : 0.0));
    }
  }
  return m;
}

// Potential and gradient of the truncated multipole series at y (relative to
// the expansion centre).
void multipole_field(const Multipole& m, const Vec3& y, double& phi, Vec3& grad) {
  const double r2 = dot(y, y);
  const double r = std::sqrt(r2);
  const double r3 = r2 * r, r5 = r3 * r2, r7 = r5 * r2;
  const double py = dot(m.p, y);
  Vec3 Qy{0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) Qy[a] += m.quad[a][b] * y[b];
  const double yQy = dot(y, Qy);
  phi = (m.Q / r + py / r3 + 0.5 * yQy / r5) / kOmega;
  for (int a = 0; a < 3; ++a)
    grad[a] = (-m.Q * y[a] / r3 + m.p[a] / r3 - 3.0 * py * y[a] / r5 + Qy[a] / r5 -
               2.5 * yQy * y[a] / r7) /
              kOmega;
}

// Composite 30-point Gauss-Legendre rule on `panels` equal pieces of [a, b].
template <class F>
double panel_gauss(F f, double a, double b, int panels) {
  double s = 0.0;
  const double w = (b - a) / panels;
  for (int i = 0; i < panels; ++i)
    s += boost::math::quadrature::gauss<double, 30>::integrate(f, a + i * w, a + (i + 1) * w);
  return s;
}

// -oint phi d_n phi over the box surface with outward normal n: the Dirichlet
// energy of the multipole field outside the box.
double exterior_energy(const Multipole& m, double L) {
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    for (int sign : {-1, 1}) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      auto face = [&](double s, double t) {
        Vec3 y{};
        y[axis] = sign * L;
        y[u] = s;
        y[v] = t;
        double phi;
        Vec3 gr;
        multipole_field(m, y, phi, gr);
        return -phi * sign * gr[axis];
      };
      total += panel_gauss(
          [&](double s) { return panel_gauss([&](double t) { return face(s, t); }, -L, L, 4); }, -L, L, 4);
    }
  return total;
}

}  // namespace

double dirichlet_energy(const ScalarField& q) {
  if (q.max_abs() == 0.0) return 0.0;
  const auto dq = gradient_field(q);
  double box = 0.0;
  for (const auto& c : dq) {
    const ScalarField dphi = poisson_fft(c);
    box += inner(dphi, dphi);
  }
  return box + exterior_energy(moments(q), q.grid().half_width());
}

ScalarField coulomb_potential(const ScalarField& u, const ChargeDensity& cd) {
  return poisson_fft(hadamard(sample_rho(cd, u.grid()), hadamard(u, u)));
}

CoulombSolution coulomb_energy(const ScalarField& u, const ChargeDensity& cd) {
  const ScalarField q = hadamard(sample_rho(cd, u.grid()), hadamard(u, u));
  ScalarField phi = poisson_fft(q);
  const double d = inner(q, phi);
  const double dir = dirichlet_energy(q);
  return {std::move(phi), dir, d};
}

}  // namespace spvar
