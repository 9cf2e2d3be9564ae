// Closed-form bounds for critical points and the measurements they are
// checked against: the (alpha, gamma, delta) system, the energy lower bounds,
// a numerical Sobolev constant and far-field decay fits.
#pragma once

#include <string>

#include "spvar/charge.hpp"
#include "spvar/grid.hpp"
#include "spvar/solvers.hpp"

namespace spvar {

struct TripleBounds {
  double delta_max = 0.0;
  double gamma_max = 0.0;
};

/// Upper bounds on delta = mu int u^{p+1} and gamma = D(u) for a critical
/// point at level c, valid when k rho <= (x, grad rho):
///   delta <= c (3+2k)(p+1) / (2(p-2) + k(p-1)),
///   gamma <= -2c(p-5) / (2(p-2) + k(p-1)).
/// Requires p in (2, 3) and c >= 0; a nonpositive denominator throws
/// std::invalid_argument("k below admissible threshold ...").
TripleBounds triple_bounds(double c, double k, double p);

struct SobolevEstimate {
  double p = 3.0;
  double S_hat = 0.0;  // Rayleigh quotient of the final iterate; an upper bound for S_{p+1}
  std::string method;
  int iterations = 0;
};

/// Coefficient multiplying S^{(p+1)/(p-1)}: (p-1)/(2(p+1)) for p in [3, 5),
/// (2(p-2) + k(p-1)) / ((3+2k)(p+1)) for p in (2, 3).
double lower_bound_coefficient(double k, double p);
/// Lower bound for the energy of any nontrivial nonnegative solution (lambda = eps = 1, mu <= 1).
double lower_bound_C(double k, double p, const SobolevEstimate& S);

/// Minimises ||u||_{H^1}^2 / ||u||_{L^{p+1}}^2 over fields on `grid` by
/// preconditioned descent from a Gaussian at the grid centre. p in (1, 5).
SobolevEstimate sobolev_estimate(const Grid& grid, double p, double tol = 1e-10, int max_iter = 2000);
/// The same quotient for a given field.
double sobolev_quotient(const ScalarField& u, double p);

struct DecayFit {
  double gamma_fit = 0.0;  // log u ~ a - gamma (1+r)
  double alpha_fit = 0.0;  // log u ~ a - B (1+r)^alpha
  double stretch_coefficient = 0.0;  // B
  bool inequality_ok = false;
  double u_bound_constant = 0.0;    // C in u <= C exp(-sqrt(A)(1+r)^alpha)
  double rho_u2_bound_constant = 0.0;
  double worst_u_ratio = 0.0;       // max over the shell of u / (C exp(...)); <= 1 when the bound holds
  double worst_rho_u2_ratio = 0.0;
  double shell_inner = 0.0, shell_outer = 0.0;
  int bins = 0;
};

/// Fits the shell-averaged profile on radii [L/2, 0.9 L] about `center` and
/// checks the pointwise decay bounds implied by cd.decay, with constants
/// taken on the innermost bin. Throws std::runtime_error when u is not
/// positive on enough of the shell to fit.
DecayFit decay_fit(const ScalarField& u, const ChargeDensity& cd);
DecayFit decay_fit(const ScalarField& u, const ChargeDensity& cd, const Vec3& center);

struct TripleIdentity {
  double alpha = 0.0;  // int(eps^2 |grad u|^2 + lambda u^2)
  double gamma = 0.0;  // D(u)
  double delta = 0.0;  // mu int u_+^{p+1}
  double c = 0.0;
  double k = 0.0;
  double p = 0.0;
  double residual_energy = 0.0;  // |alpha/2 + gamma/4 - delta/(p+1) - c|
  double residual_nehari = 0.0;  // |alpha + gamma - delta|
  double slack_pohozaev = 0.0;   // 3 delta/(p+1) - alpha/2 - (5+2k)/4 gamma, >= 0 under the k-condition
  bool bounds_applicable = false;  // p in (2, 3) with admissible k
  TripleBounds bounds;
  bool bounds_ok = true;
};

TripleIdentity check_triple_consistency(const SolutionRecord& rec, double k);

}  // namespace spvar
