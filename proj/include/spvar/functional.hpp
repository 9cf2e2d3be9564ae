// Energy functional I(u) = 1/2 int(eps^2 |grad u|^2 + lambda u^2) + D(u)/4
//                          - mu/(p+1) int u_+^{p+1}
// and the identities built from it.
#pragma once

#include <optional>

#include "spvar/charge.hpp"
#include "spvar/coulomb.hpp"
#include "spvar/grid.hpp"

namespace spvar {

struct PohozaevCoefficients {
  double b, c, d;
  bool operator==(const PohozaevCoefficients&) const = default;
};

struct ProblemParams {
  double p = 3.0;
  double mu = 1.0;
  double lambda = 1.0;
  double eps = 1.0;
  /// Coefficients of -Lap u + b u + c rho phi u = d u^p. Unset means
  /// (lambda, 1, mu), the system actually being solved.
  std::optional<PohozaevCoefficients> poh;
  /// Use |u|^{p+1} instead of u_+^{p+1} in the potential term.
  bool absolute_value = false;

  /// Throws std::invalid_argument unless p in (1,5], mu in [1/2,1], lambda, eps > 0.
  void validate() const;
  PohozaevCoefficients pohozaev_coefficients() const;
  bool operator==(const ProblemParams&) const = default;
};

struct EnergyBreakdown {
  double kinetic = 0.0;          // 1/2 int(eps^2 |grad u|^2 + lambda u^2)
  double coulomb_quarter = 0.0;  // D(u)/4
  double potential = 0.0;        // mu/(p+1) int u_+^{p+1}
  double total = 0.0;
  double e_norm = 0.0;
};

/// The integrals every functional value is assembled from.
struct FieldIntegrals {
  double grad_sq = 0.0;  // int |grad u|^2
  double mass = 0.0;     // int u^2
  double coulomb = 0.0;  // D(u)
  double power = 0.0;    // int u_+^{p+1} (or |u|^{p+1})
};

FieldIntegrals field_integrals(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);
FieldIntegrals field_integrals(const ScalarField& u, const ScalarField& phi, const ChargeDensity& cd,
                               const ProblemParams& pp);
EnergyBreakdown assemble_energy(const FieldIntegrals& fi, const ProblemParams& pp);

EnergyBreakdown energy(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);
/// I^infinity: the functional with rho replaced by the constant rho_inf.
EnergyBreakdown limit_energy(const ScalarField& u, double rho_inf, const ProblemParams& pp);

/// -eps^2 Lap u + lambda u + rho phi_u u - mu u_+^p.
ScalarField first_variation(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);
ScalarField first_variation(const ScalarField& u, const ScalarField& phi, const ChargeDensity& cd,
                            const ProblemParams& pp);

/// I'(u)u = int(eps^2 |grad u|^2 + lambda u^2) + D(u) - mu int u_+^{p+1}.
double nehari_value(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);

struct PohozaevResult {
  double value = 0.0;
  double kinetic = 0.0;  // eps^2/2 int |grad u|^2, the natural scale for value
  double shell_fraction = 0.0;
  bool reliable = true;  // boundary-shell mass of u^2 below kPohozaevShellThreshold
};
inline constexpr double kPohozaevShellThreshold = 1e-8;

/// eps^2/2 int|grad u|^2 + 3b/2 int u^2 + 5c/4 int rho phi u^2
///   + c/2 int phi u^2 (x, grad rho) - 3d/(p+1) int |u|^{p+1}.
PohozaevResult pohozaev_residual(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);

/// t^2 u(c + t(x - c)) with c the grid centre.
ScalarField scale_path_field(const ScalarField& u, double t);
/// I(t^2 u(t .)); throws std::invalid_argument for t <= 0 or when the
/// rescaled support shrinks below four cells.
double scale_path_energy(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp, double t);

double e_norm(const ScalarField& u, const ChargeDensity& cd);

}  // namespace spvar
