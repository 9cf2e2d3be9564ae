#include "spvar/functional.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <stdexcept>

namespace spvar {

void ProblemParams::validate() const {
  if (!(p > 1.0 && p <= 5.0)) throw std::invalid_argument("p must lie in (1, 5]");
  if (!(mu >= 0.5 && mu <= 1.0)) throw std::invalid_argument("mu must lie in [1/2, 1]");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (poh && (poh->b < 0.0 || poh->c < 0.0 || poh->d < 0.0))
    throw std::invalid_argument("Pohozaev coefficients must be nonnegative");
}

PohozaevCoefficients ProblemParams::pohozaev_coefficients() const {
  return poh ? *poh : PohozaevCoefficients{lambda, 1.0, mu};
}

namespace {

double power_integral(const ScalarField& u, const ProblemParams& pp) {
  double s = 0.0;
  for (double v : u.values()) {
    const double w = pp.absolute_value ? std::abs(v) : std::max(v, 0.0);
    if (w > 0.0) s += std::pow(w, pp.p + 1.0);
  }
  return s * u.grid().cell_volume();
}

}  // namespace

FieldIntegrals field_integrals(const ScalarField& u, const ScalarField& phi, const ChargeDensity& cd,
                               const ProblemParams& pp) {
  FieldIntegrals fi;
  fi.grad_sq = gradient_energy(u);
  fi.mass = inner(u, u);
  const ScalarField q = hadamard(sample_rho(cd, u.grid()), hadamard(u, u));
  fi.coulomb = inner(q, phi);
  fi.power = power_integral(u, pp);
  return fi;
}

FieldIntegrals field_integrals(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  return field_integrals(u, coulomb_potential(u, cd), cd, pp);
}

EnergyBreakdown assemble_energy(const FieldIntegrals& fi, const ProblemParams& pp) {
  EnergyBreakdown e;
  e.kinetic = 0.5 * (pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass);
  e.coulomb_quarter = 0.25 * fi.coulomb;
  e.potential = pp.mu / (pp.p + 1.0) * fi.power;
  e.total = e.kinetic + e.coulomb_quarter - e.potential;
  e.e_norm = std::sqrt(fi.grad_sq + fi.mass + std::sqrt(kOmega * std::max(fi.coulomb, 0.0)));
  return e;
}

EnergyBreakdown energy(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  return assemble_energy(field_integrals(u, cd, pp), pp);
}

EnergyBreakdown limit_energy(const ScalarField& u, double rho_inf, const ProblemParams& pp) {
  return energy(u, make_constant(rho_inf), pp);
}

ScalarField first_variation(const ScalarField& u, const ScalarField& phi, const ChargeDensity& cd,
                            const ProblemParams& pp) {
  const Grid& g = u.grid();
  ScalarField out = laplacian(u);
  out *= -pp.eps * pp.eps;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = u[i];
    const double w = pp.absolute_value ? std::abs(v) : std::max(v, 0.0);
    const double nl = w > 0.0 ? std::pow(w, pp.p - 1.0) * (pp.absolute_value ? v : w) : 0.0;
    out[i] += pp.lambda * v + eval_rho(cd, g.point(i)) * phi[i] * v - pp.mu * nl;
  }
  return out;
}

ScalarField first_variation(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  return first_variation(u, coulomb_potential(u, cd), cd, pp);
}

double nehari_value(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  const FieldIntegrals fi = field_integrals(u, cd, pp);
  return pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass + fi.coulomb - pp.mu * fi.power;
}

PohozaevResult pohozaev_residual(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  const auto [b, c, d] = pp.pohozaev_coefficients();
  const Grid& g = u.grid();
  const ScalarField phi = coulomb_potential(u, cd);
  double mass = 0.0, coul = 0.0, weight = 0.0, power = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = u[i];
    if (v == 0.0) continue;
    const Vec3 x = g.point(i);
    mass += v * v;
    coul += eval_rho(cd, x) * phi[i] * v * v;
    weight += phi[i] * v * v * dot(x, grad_rho(cd, x));
    power += std::pow(std::abs(v), pp.p + 1.0);
  }
  const double dv = g.cell_volume();
  PohozaevResult r;
  r.kinetic = 0.5 * pp.eps * pp.eps * gradient_energy(u);
  r.value = r.kinetic + dv * (1.5 * b * mass + 1.25 * c * coul + 0.5 * c * weight - 3.0 * d / (pp.p + 1.0) * power);
  r.shell_fraction = boundary_shell_mass_fraction(u);
  r.reliable = r.shell_fraction < kPohozaevShellThreshold;
  return r;
}

ScalarField scale_path_field(const ScalarField& u, double t) {
  ScalarField v = rescale_about(u, t, u.grid().center());
  v *= t * t;
  return v;
}

namespace {
// Radius about the grid centre that holds all but 1e-8 of int u^2.
double support_radius(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<std::pair<double, double>> rw;
  rw.reserve(g.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = u[i] * u[i];
    total += w;
    rw.emplace_back(norm(g.point(i) - g.center()), w);
  }
  std::sort(rw.begin(), rw.end());
  double acc = 0.0;
  for (const auto& [r, w] : rw) {
    acc += w;
    if (acc >= (1.0 - 1e-8) * total) return r;
  }
  return rw.back().first;
}
}  // namespace

double scale_path_energy(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("scale path parameter t must be positive");
  if (support_radius(u) / t < 4.0 * u.grid().spacing())
    throw std::invalid_argument("rescaled support degenerates below 4 cells");
  return energy(scale_path_field(u, t), cd, pp).total;
}

double e_norm(const ScalarField& u, const ChargeDensity& cd) {
  ProblemParams pp;
  return energy(u, cd, pp).e_norm;
}

}  // namespace spvar
