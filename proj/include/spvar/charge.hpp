// Analytic charge densities rho(x) with exact gradients.
#pragma once

#include <limits>
#include <string>

#include "spvar/grid.hpp"

namespace spvar {

enum class ChargeVariant { Constant, CoercivePower, BumpedConstant, ExpCoercive };

/// Decay constants (A, alpha, beta) for the far-field estimate
/// u <= C exp(-sqrt(A) (1+|x|)^alpha) and the companion bound on rho u^2.
struct DecayMetadata {
  double A = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  bool operator==(const DecayMetadata&) const = default;
};

/// |grad rho(x)| = O(|x|^a e^{b|x|}); super_exponential marks families that
/// outgrow every such bound.
struct GradientGrowth {
  double a = 0.0;
  double b = 0.0;
  bool super_exponential = false;
};

struct ChargeDensity {
  ChargeVariant variant = ChargeVariant::Constant;
  // Constant:        rho = rho0
  // CoercivePower:   rho = rho0 (1+|x|^2)^{s/2}
  // BumpedConstant:  rho = rho0 - a exp(-|x-xb|^2/sigma^2),  0 < a < rho0
  // ExpCoercive:     rho = rho0 exp(beta (1+|x|)^alpha)
  double rho0 = 1.0;
  double s = 0.0;
  double a = 0.0;
  double sigma = 1.0;
  Vec3 xb{0.0, 0.0, 0.0};
  double beta = 0.0;
  double alpha = 1.0;
  double k = 0.0;
  DecayMetadata decay;

  /// +infinity for the coercive families.
  double rho_inf() const;
  bool coercive() const { return rho_inf() == std::numeric_limits<double>::infinity(); }
  GradientGrowth gradient_growth() const;
  std::string describe() const;
  bool operator==(const ChargeDensity&) const = default;
};

/// Constructors validate parameters (std::invalid_argument) and fill the decay
/// metadata with defaults that satisfy beta < 2 sqrt(A).
ChargeDensity make_constant(double rho_inf, double k = 0.0);
ChargeDensity make_coercive_power(double rho0, double s, double k = 0.0);
ChargeDensity make_bumped_constant(double rho_inf, double a, double sigma, Vec3 xb, double k = 0.0);
ChargeDensity make_exp_coercive(double rho0, double beta, double alpha, double k = 0.0);

double eval_rho(const ChargeDensity& cd, const Vec3& x);
Vec3 grad_rho(const ChargeDensity& cd, const Vec3& x);

ScalarField sample_rho(const ChargeDensity& cd, const Grid& grid);
/// (x, grad rho(x)) with x measured from the origin.
ScalarField sample_radial_derivative(const ChargeDensity& cd, const Grid& grid);

struct KConditionResult {
  bool holds;
  double worst_margin;  // min over grid points of (x, grad rho) - k rho
};
KConditionResult verify_k_condition(const ChargeDensity& cd, const Grid& sample);

/// -2(p-2)/(p-1): k must exceed this for the low-p existence theory.
double k_threshold(double p);
/// The threshold as a short fraction when it is one ("-2/3" at p = 2.5).
std::string format_k_threshold(double p);
/// "k below admissible threshold -2(p-2)/(p-1) = -2/3 (k = -0.8, p = 2.5)"
std::string k_threshold_message(double k, double p);

}  // namespace spvar
