// The eps-scaled system -eps^2 Lap u + lambda u + rho phi_u u = mu u_+^p:
// solves along an eps sweep, locates the concentration point and measures
// the rescaled profile w(y) = u(x_peak + eps y) against the decoupled
// ground state.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spvar/charge.hpp"
#include "spvar/grid.hpp"
#include "spvar/radial.hpp"
#include "spvar/solvers.hpp"

namespace spvar {

/// Throws std::invalid_argument for eps outside (0, 1] or, when grad rho grows
/// like e^{b|x|}, for eps >= sqrt(lambda)/b.
void require_semiclassical_admissible(const ChargeDensity& cd, const ProblemParams& pp);

/// Mountain-pass solve of the eps-scaled system. Throws std::invalid_argument
/// for eps outside (0, 1], a trivial seed, or (exponentially growing grad rho)
/// eps >= sqrt(lambda)/b.
SolutionRecord solve_semiclassical(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt = {});

struct ConcentrationReport {
  double eps = 0.0;
  Vec3 x_peak{};
  double peak_value = 0.0;
  Vec3 grad_rho_at_peak{};
  Vec3 rho_grad_product{};  // rho(x_peak) grad rho(x_peak)
  Vec3 claim3_integral{};
  double claim3_ratio = 0.0;  // |claim3| / (max|grad rho| * int int rho w^2 w^2 / 4 pi |x-y|)
  bool peak_bound_ok = false;
  double rescaled_profile_distance = 0.0;  // ||w - w_0||_2 / ||w_0||_2
  double kwong_residual = 0.0;             // ||-Lap w + lambda w - w_+^p||_2 / ||w||_2
  double mass_radius_99 = 0.0;             // radius about x_peak holding 99% of int u^2
  bool decay_barrier_ok = false;           // w <= C |y|^-1 exp(-sqrt(lambda)/2 |y|) on [L/2, 0.9 L]
  double decay_barrier_constant = 0.0;
};

/// Argmax of u refined by a three-point parabola along each axis.
Vec3 interpolated_peak(const ScalarField& u);

/// The profile w(y) = u(x_peak + eps y) on a grid of the same size centred at
/// the origin with half-width L/eps.
ScalarField rescaled_profile(const ScalarField& u, const Vec3& x_peak, double eps);

ConcentrationReport concentration_report(const SolutionRecord& rec, const ChargeDensity& cd);
/// Same, reusing a precomputed decoupled ground state of -Lap w + lambda w = w^p.
ConcentrationReport concentration_report(const SolutionRecord& rec, const ChargeDensity& cd,
                                         const RadialProfile& oracle);

/// int int w^2(y) rho(x0 + eps y) w^2(x) grad rho(x0 + eps x) / (4 pi |x - y|)
/// in the rescaled frame about the interpolated peak.
Vec3 claim3_integral(const SolutionRecord& rec, const ChargeDensity& cd);

/// The same double integral from frame arrays: a = rho w^2 and b_i = w^2 d_i rho.
/// Averaged with its mirror image in the first axis, so reflecting the arrays
/// negates the first component bit for bit.
Vec3 claim3_frame_integral(const ScalarField& a, const std::array<ScalarField, 3>& b);

struct ExpansionResult {
  std::vector<double> eps;
  std::vector<double> scaled_difference;  // eps^-3 I_eps(u_eps) - I_0(u)
  double slope = 0.0;                     // coefficient of eps^2
  double predicted = 0.0;                 // rho(x0)^2 D*(u)
  double rel_err = 0.0;
  double d_star = 0.0;                    // int int u^2 u^2 / (4 pi |x - y|)
  double quarter_predicted = 0.0;         // rho(x0)^2 D*(u) / 4, the Coulomb term's own weight
  double quarter_rel_err = 0.0;
};

/// Rescales the fixed profile u (sampled on a grid centred at the origin) to
/// u_eps(x) = u((x - x0)/eps) and fits the eps^2 coefficient of
/// eps^-3 I_eps(u_eps) - I_0(u) by least squares (with an eps^4 term when
/// there are at least three points). Needs >= 3 values of eps in (0, 1/2].
ExpansionResult expansion_check(const ScalarField& u, const ChargeDensity& cd, const Vec3& x0,
                                const std::vector<double>& eps_list, const ProblemParams& pp = {});

struct UniformBound {
  double sup_linf = 0.0;
  bool gidas_spruck_flag = false;  // no upward trend in ||u_eps||_inf as eps decreases
  double mann_kendall_z = 0.0;
};

/// Mann-Kendall test (one-sided, 5%) for growth of the peak values taken in
/// order of decreasing eps. Needs at least three records.
UniformBound uniform_bound_probe(const std::vector<SolutionRecord>& sweep);

struct SweepOptions {
  int n = 64;
  double L_ref = 8.0;  // grid half-width in units of eps
  Vec3 seed_center{0.0, 0.0, 0.0};
  SolverOptions solver;
  /// Solve every eps from its own Gaussian seed on a grid centred at
  /// seed_center, spread over this many threads. Off by default: the
  /// warm-start chain is sequential.
  bool independent_seeds = false;
  int workers = 1;
};

struct SweepResult {
  std::vector<SolutionRecord> records;
  std::vector<ConcentrationReport> reports;
  bool complete = false;
};

/// Solves for each eps in the (descending) list on an n^3 grid of half-width
/// eps * L_ref. The first grid is centred on the seed centre, later grids on
/// the previous peak, each warm-started from the previous solution rescaled.
/// Stops at the first non-converged solve. With independent seeds every eps
/// is attempted and reports exist for the converged ones only.
SweepResult semiclassical_sweep(const ChargeDensity& cd, const ProblemParams& pp, const std::vector<double>& eps_list,
                                const SweepOptions& opt = {});

}  // namespace spvar
