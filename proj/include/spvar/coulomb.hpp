// Free-space Newtonian potential phi = q * 1/(4 pi |x|) on a cell-centred grid.
#pragma once

#include <numbers>

#include "spvar/charge.hpp"
#include "spvar/grid.hpp"

namespace spvar {

inline constexpr double kOmega = 4.0 * std::numbers::pi;

/// Mean of 1/|x| over the unit cube [-1/2, 1/2]^3, i.e. 3 ln(2 + sqrt 3) - pi/2.
inline constexpr double kUnitCubeInverseDistance = 2.3800773639795536;

/// Discrete Green's kernel between cells offset by (di, dj, dk) on spacing h.
/// The self term uses the cell average of 1/(4 pi |x|).
double green_kernel(int di, int dj, int dk, double h);

/// h^3 sum_j K(i-j) q_j, evaluated with a zero-padded (2n)^3 FFT.
ScalarField poisson_fft(const ScalarField& q);
/// Same sum evaluated directly; throws std::invalid_argument for n > 16.
ScalarField poisson_direct(const ScalarField& q);

struct CoulombSolution {
  ScalarField phi;
  double dirichlet_energy;  // integral over R^3 of |grad phi|^2
  double coulomb_energy;    // D(u) = integral of rho phi u^2
};

/// phi_u for the charge rho u^2.
ScalarField coulomb_potential(const ScalarField& u, const ChargeDensity& cd);
CoulombSolution coulomb_energy(const ScalarField& u, const ChargeDensity& cd);

/// Integral of |grad phi|^2 over R^3 for phi = G * q: the box part uses
/// grad phi = G * grad q, the exterior part the quadrupole expansion of q.
double dirichlet_energy(const ScalarField& q);

}  // namespace spvar
