#include "spvar/diagnostics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spvar/functional.hpp"

namespace spvar {

namespace {

double admissibility_denominator(double k, double p) { return 2.0 * (p - 2.0) + k * (p - 1.0); }

void require_admissible(double k, double p) {
  if (!(admissibility_denominator(k, p) > 0.0))
    throw std::invalid_argument(k_threshold_message(k, p));
}

}  // namespace

TripleBounds triple_bounds(double c, double k, double p) {
  if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("triple bounds need p in (2, 3)");
  if (!(c >= 0.0)) throw std::invalid_argument("energy level c must be nonnegative");
  require_admissible(k, p);
  const double den = admissibility_denominator(k, p);
  return {c * (3.0 + 2.0 * k) * (p + 1.0) / den, -2.0 * c * (p - 5.0) / den};
}

double lower_bound_coefficient(double k, double p) {
  if (p >= 3.0 && p < 5.0) return (p - 1.0) / (2.0 * (p + 1.0));
  if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("lower bound needs p in (2, 5)");
  require_admissible(k, p);
  return admissibility_denominator(k, p) / ((3.0 + 2.0 * k) * (p + 1.0));
}

double lower_bound_C(double k, double p, const SobolevEstimate& S) {
  if (!(S.S_hat > 0.0)) throw std::invalid_argument("Sobolev estimate must be positive");
  return lower_bound_coefficient(k, p) * std::pow(S.S_hat, (p + 1.0) / (p - 1.0));
}

namespace {

struct Quotient {
  double A, B, Q;
};

Quotient quotient_parts(const ScalarField& u, double p) {
  double b = 0.0;
  for (double v : u.values()) b += std::pow(std::abs(v), p + 1.0);
  b *= u.grid().cell_volume();
  const double a = gradient_energy(u) + inner(u, u);
  return {a, b, a / std::pow(b, 2.0 / (p + 1.0))};
}

}  // namespace

double sobolev_quotient(const ScalarField& u, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  return quotient_parts(u, p).Q;
}

SobolevEstimate sobolev_estimate(const Grid& grid, double p, double tol, int max_iter) {
  if (!(p > 1.0 && p < 5.0)) throw std::invalid_argument("Sobolev estimate needs p in (1, 5)");
  ScalarField u = gaussian_seed(grid, grid.center(), 1.0, std::sqrt(2.0));
  Quotient q = quotient_parts(u, p);
  double step = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    // Gradient of Q up to the positive factor 2/B^{2/(p+1)}, then (-Lap + 1)^{-1}.
    ScalarField nl(grid);
    for (std::size_t i = 0; i < u.size(); ++i) nl[i] = std::pow(std::abs(u[i]), p - 1.0) * u[i];
    ScalarField g = u - (q.A / q.B) * solve_screened_poisson(nl, 1.0, 1.0);
    // <grad, d> in the H^1 pairing equals the preconditioned residual norm.
    const double slope = gradient_energy(g) + inner(g, g);
    if (slope <= tol * tol * q.A) break;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries, step *= 0.5) {
      ScalarField v = u - step * g;
      const Quotient qv = quotient_parts(v, p);
      const double scale = 2.0 / std::pow(q.B, 2.0 / (p + 1.0));
      if (qv.Q <= q.Q - 1e-4 * step * scale * slope) {
        const double m = v.max_abs();
        u = (1.0 / m) * std::move(v);
        q = quotient_parts(u, p);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    step = std::min(1.0, 2.0 * step);
  }
  return {p, q.Q, "preconditioned Rayleigh descent from a Gaussian", it};
}

namespace {

struct ShellBin {
  double r = 0.0;
  double sum = 0.0;
  int count = 0;
};

// Least squares y ~ a + b x; returns {a, b, sse}.
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - a - b * x[i], 2);
  return {a, b, sse};
}

}  // namespace

DecayFit decay_fit(const ScalarField& u, const ChargeDensity& cd) { return decay_fit(u, cd, u.grid().center()); }

DecayFit decay_fit(const ScalarField& u, const ChargeDensity& cd, const Vec3& center) {
  const Grid& g = u.grid();
  const double L = g.half_width(), h = g.spacing();
  DecayFit out;
  out.shell_inner = 0.5 * L;
  out.shell_outer = 0.9 * L;
  const int nb = std::max(1, static_cast<int>(std::floor((out.shell_outer - out.shell_inner) / h)));
  const double bw = (out.shell_outer - out.shell_inner) / nb;
  std::vector<ShellBin> bins(nb);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = norm(g.point(i) - center);
    if (r < out.shell_inner || r > out.shell_outer) continue;
    const int b = std::min(nb - 1, static_cast<int>((r - out.shell_inner) / bw));
    bins[b].r += r;
    bins[b].sum += u[i];
    ++bins[b].count;
  }
  std::vector<double> xs, ys;
  for (const ShellBin& b : bins) {
    if (b.count == 0 || !(b.sum > 0.0)) continue;
    xs.push_back(1.0 + b.r / b.count);
    ys.push_back(std::log(b.sum / b.count));
  }
  out.bins = static_cast<int>(xs.size());
  if (xs.size() < 3) throw std::runtime_error("u vanishes on the fit shell; cannot fit decay");

  out.gamma_fit = -linear_fit(xs, ys)[1];

  auto stretched_sse = [&](double alpha) {
    std::vector<double> xa(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xa[i] = std::pow(xs[i], alpha);
    return linear_fit(xa, ys);
  };
  double lo = 0.05, hi = 6.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = stretched_sse(c)[2], fd = stretched_sse(d)[2];
  for (int i = 0; i < 100; ++i) {
    if (fc < fd) {
      hi = d, d = c, fd = fc;
      c = hi - gr * (hi - lo);
      fc = stretched_sse(c)[2];
    } else {
      lo = c, c = d, fc = fd;
      d = lo + gr * (hi - lo);
      fd = stretched_sse(d)[2];
    }
  }
  out.alpha_fit = 0.5 * (lo + hi);
  out.stretch_coefficient = -stretched_sse(out.alpha_fit)[1];

  // Pointwise bounds u <= C1 exp(-sqrt(A)(1+r)^a) and
  // rho u^2 <= C2 exp((beta - 2 sqrt(A))(1+r)^a), constants from the inner bin.
  const DecayMetadata& md = cd.decay;
  const double sa = std::sqrt(md.A);
  auto u_env = [&](double r) { return std::exp(-sa * std::pow(1.0 + r, md.alpha)); };
  auto q_env = [&](double r) { return std::exp((md.beta - 2.0 * sa) * std::pow(1.0 + r, md.alpha)); };
  const double inner_edge = out.shell_inner + bw;
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.point(i);
    const double r = norm(x - center);
    if (r < out.shell_inner || r > inner_edge || u[i] <= 0.0) continue;
    c1 = std::max(c1, u[i] / u_env(r));
    c2 = std::max(c2, eval_rho(cd, x) * u[i] * u[i] / q_env(r));
  }
  out.u_bound_constant = c1;
  out.rho_u2_bound_constant = c2;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.point(i);
    const double r = norm(x - center);
    if (r < out.shell_inner || r > out.shell_outer || u[i] <= 0.0) continue;
    out.worst_u_ratio = std::max(out.worst_u_ratio, u[i] / (c1 * u_env(r)));
    out.worst_rho_u2_ratio = std::max(out.worst_rho_u2_ratio, eval_rho(cd, x) * u[i] * u[i] / (c2 * q_env(r)));
  }
  // Relative slack for round-off in the ratio itself.
  out.inequality_ok = c1 > 0.0 && out.worst_u_ratio <= 1.0 + 1e-9 && out.worst_rho_u2_ratio <= 1.0 + 1e-9;
  return out;
}

TripleIdentity check_triple_consistency(const SolutionRecord& rec, double k) {
  const ProblemParams& pp = rec.params;
  const FieldIntegrals& fi = rec.integrals;
  TripleIdentity t;
  t.k = k;
  t.p = pp.p;
  t.alpha = pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass;
  t.gamma = fi.coulomb;
  t.delta = pp.mu * fi.power;
  t.c = rec.energy.total;
  const double p1 = pp.p + 1.0;
  t.residual_energy = std::abs(0.5 * t.alpha + 0.25 * t.gamma - t.delta / p1 - t.c);
  t.residual_nehari = std::abs(t.alpha + t.gamma - t.delta);
  t.slack_pohozaev = 3.0 * t.delta / p1 - 0.5 * t.alpha - (5.0 + 2.0 * k) / 4.0 * t.gamma;
  t.bounds_applicable = pp.p > 2.0 && pp.p < 3.0 && admissibility_denominator(k, pp.p) > 0.0 && t.c >= 0.0;
  if (t.bounds_applicable) {
    t.bounds = triple_bounds(t.c, k, pp.p);
    const double tol = 1e-6 * std::max({t.alpha, t.gamma, t.delta});
    t.bounds_ok = t.delta <= t.bounds.delta_max + tol && t.gamma <= t.bounds.gamma_max + tol;
  }
  return t;
}

}  // namespace spvar
