#include "spvar/charge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace spvar {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

double ChargeDensity::rho_inf() const {
  switch (variant) {
    case ChargeVariant::Constant:
    case ChargeVariant::BumpedConstant:
      return rho0;
    case ChargeVariant::CoercivePower:
    case ChargeVariant::ExpCoercive:
      return std::numeric_limits<double>::infinity();
  }
  return rho0;
}

GradientGrowth ChargeDensity::gradient_growth() const {
  switch (variant) {
    case ChargeVariant::Constant:
    case ChargeVariant::BumpedConstant:
      return {0.0, 0.0, false};
    case ChargeVariant::CoercivePower:
      return {s - 1.0, 0.0, false};
    case ChargeVariant::ExpCoercive:
      if (alpha > 1.0) return {0.0, 0.0, true};
      // e^{beta (1+r)^alpha} with alpha < 1 is o(e^{b r}) for every b > 0;
      // report the alpha = 1 rate as a safe bound.
      return {0.0, beta, false};
  }
  return {};
}

std::string ChargeDensity::describe() const {
  switch (variant) {
    case ChargeVariant::Constant:
      return fmt::format("constant(rho_inf={:.17g})", rho0);
    case ChargeVariant::CoercivePower:
      return fmt::format("coercive_power(rho0={:.17g},s={:.17g})", rho0, s);
    case ChargeVariant::BumpedConstant:
      return fmt::format("bumped_constant(rho_inf={:.17g},a={:.17g},sigma={:.17g},xb=[{:.17g},{:.17g},{:.17g}])",
                         rho0, a, sigma, xb[0], xb[1], xb[2]);
    case ChargeVariant::ExpCoercive:
      return fmt::format("exp_coercive(rho0={:.17g},beta={:.17g},alpha={:.17g})", rho0, beta, alpha);
  }
  return "unknown";
}

ChargeDensity make_constant(double rho_inf, double k) {
  require(rho_inf >= 0.0 && std::isfinite(rho_inf), "constant density must be finite and >= 0");
  ChargeDensity cd;
  cd.variant = ChargeVariant::Constant;
  cd.rho0 = rho_inf;
  cd.k = k;
  // Only the L2-type decay applies; the solution decays like e^{-sqrt(lambda+rho phi) r}.
  cd.decay = {rho_inf / 2.0, 0.5, std::sqrt(rho_inf / 2.0)};
  return cd;
}

ChargeDensity make_coercive_power(double rho0, double s, double k) {
  require(rho0 > 0.0, "coercive power density needs rho0 > 0");
  require(s > 0.0, "coercive power density needs s > 0");
  ChargeDensity cd;
  cd.variant = ChargeVariant::CoercivePower;
  cd.rho0 = rho0;
  cd.s = s;
  cd.k = k;
  // rho |x|^{1-2 alpha} -> rho0 for alpha = (s+1)/2. The effective potential
  // is rho phi ~ rho0 Q |x|^{s-1}/(4 pi), so A is taken well below rho0.
  const double A = rho0 / 16.0;
  cd.decay = {A, 0.5 * (s + 1.0), std::sqrt(A)};
  return cd;
}

ChargeDensity make_bumped_constant(double rho_inf, double a, double sigma, Vec3 xb, double k) {
  require(a > 0.0 && a < rho_inf, "bumped density needs 0 < a < rho_inf");
  require(sigma > 0.0, "bumped density needs sigma > 0");
  ChargeDensity cd;
  cd.variant = ChargeVariant::BumpedConstant;
  cd.rho0 = rho_inf;
  cd.a = a;
  cd.sigma = sigma;
  cd.xb = xb;
  cd.k = k;
  cd.decay = {rho_inf / 2.0, 0.5, std::sqrt(rho_inf / 2.0)};
  return cd;
}

ChargeDensity make_exp_coercive(double rho0, double beta, double alpha, double k) {
  require(rho0 > 0.0, "exponential density needs rho0 > 0");
  require(beta > 0.0, "exponential density needs beta > 0");
  require(alpha > 0.0, "exponential density needs alpha > 0");
  ChargeDensity cd;
  cd.variant = ChargeVariant::ExpCoercive;
  cd.rho0 = rho0;
  cd.beta = beta;
  cd.alpha = alpha;
  cd.k = k;
  // beta < 2 sqrt(A) keeps rho u^2 decaying.
  cd.decay = {beta * beta, alpha, beta};
  return cd;
}

double eval_rho(const ChargeDensity& cd, const Vec3& x) {
  switch (cd.variant) {
    case ChargeVariant::Constant:
      return cd.rho0;
    case ChargeVariant::CoercivePower:
      return cd.rho0 * std::pow(1.0 + dot(x, x), 0.5 * cd.s);
    case ChargeVariant::BumpedConstant: {
      const Vec3 d = x - cd.xb;
      return cd.rho0 - cd.a * std::exp(-dot(d, d) / (cd.sigma * cd.sigma));
    }
    case ChargeVariant::ExpCoercive:
      return cd.rho0 * std::exp(cd.beta * std::pow(1.0 + norm(x), cd.alpha));
  }
  return 0.0;
}

Vec3 grad_rho(const ChargeDensity& cd, const Vec3& x) {
  switch (cd.variant) {
    case ChargeVariant::Constant:
      return {0.0, 0.0, 0.0};
    case ChargeVariant::CoercivePower: {
      const double f = cd.rho0 * cd.s * std::pow(1.0 + dot(x, x), 0.5 * cd.s - 1.0);
      return f * x;
    }
    case ChargeVariant::BumpedConstant: {
      const Vec3 d = x - cd.xb;
      const double s2 = cd.sigma * cd.sigma;
      return (2.0 * cd.a / s2 * std::exp(-dot(d, d) / s2)) * d;
    }
    case ChargeVariant::ExpCoercive: {
      const double r = norm(x);
      if (r == 0.0) return {0.0, 0.0, 0.0};
      const double f = eval_rho(cd, x) * cd.beta * cd.alpha * std::pow(1.0 + r, cd.alpha - 1.0) / r;
      return f * x;
    }
  }
  return {0.0, 0.0, 0.0};
}

ScalarField sample_rho(const ChargeDensity& cd, const Grid& grid) {
  return ScalarField::sample(grid, [&](const Vec3& x) { return eval_rho(cd, x); });
}

ScalarField sample_radial_derivative(const ChargeDensity& cd, const Grid& grid) {
  return ScalarField::sample(grid, [&](const Vec3& x) { return dot(x, grad_rho(cd, x)); });
}

KConditionResult verify_k_condition(const ChargeDensity& cd, const Grid& sample) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Vec3 x = sample.point(i);
    worst = std::min(worst, dot(x, grad_rho(cd, x)) - cd.k * eval_rho(cd, x));
  }
  return {worst >= 0.0, worst};
}

double k_threshold(double p) { return -2.0 * (p - 2.0) / (p - 1.0); }

std::string format_k_threshold(double p) {
  const double v = k_threshold(p);
  for (int q = 1; q <= 1000; ++q) {
    const double num = std::round(v * q);
    if (std::abs(num / q - v) <= 1e-12 * std::max(1.0, std::abs(v)))
      return q == 1 ? fmt::format("{}", num) : fmt::format("{}/{}", num, q);
  }
  return fmt::format("{:.6g}", v);
}

std::string k_threshold_message(double k, double p) {
  return fmt::format("k below admissible threshold -2(p-2)/(p-1) = {} (k = {:.6g}, p = {:.6g})", format_k_threshold(p), k,
                     p);
}

}  // namespace spvar
