// Critical points of the energy functional: Nehari ground states for p > 3,
// mountain-pass candidates for p in (2, 5) and mu-continuation.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spvar/charge.hpp"
#include "spvar/functional.hpp"
#include "spvar/grid.hpp"

namespace spvar {

struct SolverOptions {
  double tol = 1e-8;       // on ||first_variation||_2 / ||u||_2
  int max_iter = 10000;    // descent steps, or Newton steps summed over continuation stages
  double armijo = 1e-4;
  int divergence_window = 50;
  int max_newton = 60;     // per Newton solve
  double krylov_tol = 1e-4;
  int krylov_max = 300;
  int krylov_restart = 60;
  bool homotopy_fallback = true;
  double max_shift_cells = 4.0;  // cap on the translation part of a Newton step, in grid cells
};

struct SolutionRecord {
  ScalarField u;
  ScalarField phi;
  ProblemParams params{};
  ChargeDensity rho{};
  std::string rho_tag{};
  EnergyBreakdown energy{};
  FieldIntegrals integrals{};
  double residual_l2 = 0.0;
  double nehari_residual = 0.0;    // |I'(u)u|
  double pohozaev_residual = 0.0;  // P(u)
  double pohozaev_kinetic = 0.0;   // eps^2/2 int |grad u|^2
  bool pohozaev_reliable = false;
  double h1_norm_sq = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Largest energy found along t -> t^2 u(t .), an upper bound for the
  /// min-max level when the path runs from near 0 to negative energy.
  double path_upper_bound = std::nan("");
  double path_gap = std::nan("");  // path_upper_bound - energy.total
  std::string status{};
};

/// Evaluates every record field for a given u.
SolutionRecord make_record(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);

/// Unique t > 0 with t u on the Nehari manifold. Throws std::invalid_argument
/// for p <= 3 or u_+ = 0.
double nehari_project(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp);

/// Projected preconditioned descent on the Nehari manifold; p in (3, 5).
SolutionRecord ground_state_nehari(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt = {});

/// Damped Newton-Krylov on the Euler-Lagrange equation from the ray-maximising
/// rescaling of the seed, with a coupling homotopy rho -> s rho from the
/// decoupled ground state as fallback; p in (2, 5).
SolutionRecord mountain_pass_solve(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt = {});

/// max over t in [t_lo, t_hi] of scale_path_energy, restricted to admissible t.
double path_family_max(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp, double t_lo = 0.25,
                       double t_hi = 4.0);

struct ContinuationResult {
  std::vector<double> mu_values;
  std::vector<double> c_values;
  std::vector<SolutionRecord> records;
  bool monotone_ok = false;
  bool complete = false;  // every inner solve converged
};

/// Warm-started mountain-pass solves along an ascending mu grid in [1/2, 1].
ContinuationResult mu_continuation(const ChargeDensity& cd, const ProblemParams& pp_base,
                                   const std::vector<double>& mu_grid, const ScalarField& seed,
                                   const SolverOptions& opt = {});

/// A Gaussian bump amplitude * exp(-|x - c|^2 / width^2).
ScalarField gaussian_seed(const Grid& grid, const Vec3& center, double amplitude, double width);

/// rho scaled by s (s = 0 gives the zero density).
ChargeDensity scale_charge(const ChargeDensity& cd, double s);

/// (lambda/mu)^{1/(p-1)}: lower bound for the maximum of any positive solution.
double peak_lower_bound(const ProblemParams& pp);

}  // namespace spvar
