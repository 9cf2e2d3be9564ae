// Radial ground states of the limit problems
//   -u'' - (2/r) u' + (lambda + rho_inf phi(r)) u = mu u^p,  u'(0) = 0, u -> 0,
// with phi the Newtonian potential of rho_inf u^2 (absent when rho_inf = 0).
#pragma once

#include <string>
#include <vector>

#include "spvar/functional.hpp"
#include "spvar/grid.hpp"

namespace spvar {

struct RadialOptions {
  double dr = 1e-3;
  double tol = 1e-13;         // ODE integrator tolerance (abs and rel)
  double coupling_tol = 1e-10;
  int max_coupling_iter = 200;
};

struct RadialProfile {
  double p = 3.0, mu = 1.0, lambda = 1.0, rho_inf = 0.0;
  double dr = 1e-3;
  std::vector<double> u;       // u(i dr), i = 0 .. cut
  std::vector<double> du;      // u'(i dr)
  std::vector<double> phi;     // radial potential on the same points (zero for rho_inf = 0)
  double tail_rate = 1.0;      // u ~ u(r_c) (r_c/r)^tail_power exp(-tail_rate (r - r_c))
  double tail_power = 1.0;     // past the table; the Coulomb tail adds rho_inf M/(2 tail_rate)
  double charge_moment = 0.0;  // int_0^inf rho_inf u^2 s^2 ds; phi = charge_moment / r far out
  double limit_energy = 0.0;   // I^infinity of the profile
  double ode_residual = 0.0;   // max |u'' + 2u'/r - V u + mu u^p| / max(V u, mu u^p) on the table
  int coupling_iterations = 0;

  double u0() const { return u.front(); }
  double cutoff() const { return dr * static_cast<double>(u.size() - 1); }
  /// Piecewise cubic Hermite on the table, exponential tail beyond it.
  double value_at(double r) const;
  double derivative_at(double r) const;
  double potential_at(double r) const;
  /// Samples u(|x - center|) on the grid.
  ScalarField sample(const Grid& grid, const Vec3& center) const;
};

/// Throws std::invalid_argument for lambda <= 0 or p outside (1, 5), and
/// std::runtime_error when no shooting bracket exists in (lambda^{1/(p-1)}, 1e3).
RadialProfile radial_limit_ground_state(const ProblemParams& pp, double rho_inf,
                                        const RadialOptions& opt = {});

/// Plain-text `r value` table with a `#` header line holding the parameters.
void write_radial_table(const RadialProfile& prof, const std::string& path, int stride = 10);
std::vector<std::pair<double, double>> read_radial_table(const std::string& path);

}  // namespace spvar
