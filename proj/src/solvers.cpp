#include "spvar/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>
#include <unsupported/Eigen/IterativeSolvers>

#include "spvar/coulomb.hpp"
#include "spvar/radial.hpp"

namespace spvar {

namespace {

bool trivial(const ScalarField& u) {
  for (double v : u.values())
    if (v > 0.0) return false;
  return true;
}

bool zero_density(const ChargeDensity& cd) { return cd.variant == ChargeVariant::Constant && cd.rho0 == 0.0; }

ScalarField potential_of(const ScalarField& u, const ChargeDensity& cd) {
  return zero_density(cd) ? ScalarField(u.grid()) : coulomb_potential(u, cd);
}

double relative_residual(const ScalarField& g, const ScalarField& u) {
  const double nu = norm(u, NormKind::L2);
  return nu > 0.0 ? norm(g, NormKind::L2) / nu : std::numeric_limits<double>::infinity();
}

ScalarField clip(ScalarField u) {
  for (double& v : u.values()) v = std::max(v, 0.0);
  return u;
}

}  // namespace

double peak_lower_bound(const ProblemParams& pp) { return std::pow(pp.lambda / pp.mu, 1.0 / (pp.p - 1.0)); }

ScalarField gaussian_seed(const Grid& grid, const Vec3& center, double amplitude, double width) {
  return ScalarField::sample(grid, [&](const Vec3& x) {
    const Vec3 d = x - center;
    return amplitude * std::exp(-dot(d, d) / (width * width));
  });
}

ChargeDensity scale_charge(const ChargeDensity& cd, double s) {
  if (s == 0.0) return make_constant(0.0, cd.k);
  ChargeDensity out = cd;
  out.rho0 *= s;
  out.a *= s;
  return out;
}

SolutionRecord make_record(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  SolutionRecord rec{u, potential_of(u, cd)};
  rec.params = pp;
  rec.rho = cd;
  rec.rho_tag = cd.describe();
  rec.integrals = field_integrals(u, rec.phi, cd, pp);
  rec.energy = assemble_energy(rec.integrals, pp);
  const FieldIntegrals& fi = rec.integrals;
  rec.residual_l2 = relative_residual(first_variation(u, rec.phi, cd, pp), u);
  rec.nehari_residual = std::abs(pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass + fi.coulomb - pp.mu * fi.power);
  const PohozaevResult poh = pohozaev_residual(u, cd, pp);
  rec.pohozaev_residual = poh.value;
  rec.pohozaev_kinetic = poh.kinetic;
  rec.pohozaev_reliable = poh.reliable;
  rec.h1_norm_sq = fi.grad_sq + fi.mass;
  return rec;
}

// ---------------------------------------------------------------- Nehari

namespace {

struct RayCoefficients {
  double a, gamma, delta;  // I'(tu)(tu) = t^2 a + t^4 gamma - t^{p+1} delta
};

RayCoefficients ray_coefficients(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  const FieldIntegrals fi = field_integrals(u, potential_of(u, cd), cd, pp);
  return {pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass, fi.coulomb, pp.mu * fi.power};
}

// Root of a + gamma t^2 - delta t^{p-1} for p > 3.
double nehari_root(const RayCoefficients& rc, double p) {
  auto f = [&](double t) { return rc.a + rc.gamma * t * t - rc.delta * std::pow(t, p - 1.0); };
  double lo = 0.0, hi = 1.0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e150) throw std::runtime_error("Nehari projection: no sign change");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-6 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  // Safeguarded Newton polish: fall back to bisection whenever a step leaves the bracket.
  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double ft = f(t);
    if (std::abs(ft) <= 1e-14 * rc.a) break;
    (ft > 0.0 ? lo : hi) = t;
    const double df = 2.0 * rc.gamma * t - rc.delta * (p - 1.0) * std::pow(t, p - 2.0);
    double next = t - ft / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

}  // namespace

double nehari_project(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp) {
  if (pp.p <= 3.0) throw std::invalid_argument("Nehari projection not well-posed in this regime (p <= 3)");
  if (trivial(u)) throw std::invalid_argument("Nehari projection needs u_+ not identically zero");
  return nehari_root(ray_coefficients(u, cd, pp), pp.p);
}

SolutionRecord ground_state_nehari(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt) {
  pp.validate();
  if (!(pp.p > 3.0 && pp.p < 5.0)) throw std::invalid_argument("Nehari ground state needs p in (3, 5)");
  if (trivial(seed)) throw std::invalid_argument("trivial seed: u_+ is identically zero");
  const double eps2 = pp.eps * pp.eps;

  ScalarField u = clip(seed);
  u *= nehari_project(u, cd, pp);
  double e_cur = energy(u, cd, pp).total;
  double step = 1.0;
  int rises = 0;
  int it = 0;
  bool converged = false;
  for (; it < opt.max_iter; ++it) {
    const ScalarField phi = potential_of(u, cd);
    const ScalarField g = first_variation(u, phi, cd, pp);
    if (relative_residual(g, u) < opt.tol) {
      converged = true;
      break;
    }
    ScalarField d = solve_screened_poisson(g, eps2, pp.lambda);
    d *= -1.0;
    const double slope = inner(g, d);
    step = std::min(1.0, 2.0 * step);
    const double m_cur = -slope;  // <g, P g>
    bool accepted = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      ScalarField v = clip(u + step * d);
      if (trivial(v)) continue;
      v *= nehari_root(ray_coefficients(v, cd, pp), pp.p);
      const double e_new = energy(v, cd, pp).total;
      bool ok = e_new <= e_cur + opt.armijo * step * slope;
      // Once the predicted decrease is below the round-off of the energy sum,
      // fall back to requiring a smaller preconditioned residual.
      if (!ok && std::abs(step * slope) < 1e-11 * std::abs(e_cur)) {
        const ScalarField gv = first_variation(v, cd, pp);
        ok = inner(gv, solve_screened_poisson(gv, eps2, pp.lambda)) < m_cur;
      }
      if (ok) {
        rises = e_new > e_cur ? rises + 1 : 0;
        u = std::move(v);
        e_cur = e_new;
        accepted = true;
        break;
      }
    }
    if (!accepted || rises >= opt.divergence_window) break;
  }
  SolutionRecord rec = make_record(u, cd, pp);
  rec.iterations = it;
  rec.converged = converged && rec.residual_l2 < opt.tol;
  rec.status = rec.converged ? "converged" : (it >= opt.max_iter ? "max_iter" : "stalled");
  return rec;
}

// ---------------------------------------------------------- Newton-Krylov

namespace {

// Linearisation of the Euler-Lagrange operator at u.
struct Linearization {
  Grid grid;
  double eps2, lambda;
  bool coupled;
  ScalarField diag;   // lambda + rho phi - mu p u_+^{p-1}
  ScalarField rho_u;  // rho u

  ScalarField apply(const ScalarField& v) const {
    ScalarField out = laplacian(v);
    out *= -eps2;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += diag[i] * v[i];
    if (coupled) {
      ScalarField q = hadamard(rho_u, v);
      q *= 2.0;
      const ScalarField w = poisson_fft(q);
      for (std::size_t i = 0; i < v.size(); ++i) out[i] += rho_u[i] * w[i];
    }
    return out;
  }
};

Linearization linearize(const ScalarField& u, const ScalarField& phi, const ChargeDensity& cd, const ProblemParams& pp) {
  const Grid& g = u.grid();
  Linearization lin{g, pp.eps * pp.eps, pp.lambda, !zero_density(cd), ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = eval_rho(cd, g.point(i));
    const double w = pp.absolute_value ? std::abs(u[i]) : std::max(u[i], 0.0);
    const double nl = w > 0.0 ? pp.mu * pp.p * std::pow(w, pp.p - 1.0) : 0.0;
    lin.diag[i] = pp.lambda + rho * phi[i] - nl;
    lin.rho_u[i] = rho * u[i];
  }
  return lin;
}

}  // namespace
}  // namespace spvar

// Matrix-free adaptor so Eigen's GMRES can drive the linearisation.
namespace spvar::detail {
class JacobianOperator;
}

namespace Eigen::internal {
template <>
struct traits<spvar::detail::JacobianOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace spvar::detail {

class JacobianOperator : public Eigen::EigenBase<JacobianOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  explicit JacobianOperator(const Linearization& lin) : lin_(&lin) {}
  Eigen::Index rows() const { return static_cast<Eigen::Index>(lin_->grid.size()); }
  Eigen::Index cols() const { return rows(); }

  template <typename Rhs>
  Eigen::Product<JacobianOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<JacobianOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    ScalarField v(lin_->grid, std::vector<double>(x.data(), x.data() + x.size()));
    const ScalarField out = lin_->apply(v);
    return Eigen::Map<const Eigen::VectorXd>(out.values().data(), x.size());
  }
  const Linearization& lin() const { return *lin_; }

 private:
  const Linearization* lin_;
};

// (-eps^2 Lap + lambda)^{-1}, applied spectrally.
class ScreenedPoissonPreconditioner {
 public:
  using MatrixType = JacobianOperator;
  ScreenedPoissonPreconditioner() = default;
  template <typename M>
  explicit ScreenedPoissonPreconditioner(const M& m) {
    compute(m);
  }
  ScreenedPoissonPreconditioner& analyzePattern(const JacobianOperator&) { return *this; }
  ScreenedPoissonPreconditioner& factorize(const JacobianOperator& m) { return compute(m); }
  ScreenedPoissonPreconditioner& compute(const JacobianOperator& m) {
    lin_ = &m.lin();
    return *this;
  }
  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd bb = b;
    ScalarField f(lin_->grid, std::vector<double>(bb.data(), bb.data() + bb.size()));
    const ScalarField out = solve_screened_poisson(f, lin_->eps2, lin_->lambda);
    return Eigen::Map<const Eigen::VectorXd>(out.values().data(), bb.size());
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const Linearization* lin_ = nullptr;
};

}  // namespace spvar::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<spvar::detail::JacobianOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<spvar::detail::JacobianOperator, Rhs,
                                generic_product_impl<spvar::detail::JacobianOperator, Rhs>> {
  using Scalar = typename Product<spvar::detail::JacobianOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const spvar::detail::JacobianOperator& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    dst.noalias() += alpha * lhs.multiply(rhs);
  }
};
}  // namespace Eigen::internal

namespace spvar {

namespace {

struct NewtonOutcome {
  ScalarField u;
  bool converged;
  int iterations;
  double residual;
};

// Near-translation-invariant problems give the Jacobian tiny eigenvalues along
// grad u, and the Newton step then carries a shift -t.grad u large enough that
// its second-order error swamps the residual. Removes that component from d
// and returns t (capped at max_shift), to be applied as an exact translation.
Vec3 split_translation(ScalarField& d, const ScalarField& u, double max_shift) {
  const auto gu = gradient_field(u);
  Eigen::Matrix3d G;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    b(i) = -inner(d, gu[i]);
    for (int j = 0; j < 3; ++j) G(i, j) = inner(gu[i], gu[j]);
  }
  Eigen::Vector3d t = G.ldlt().solve(b);
  for (int i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += t(i) * gu[i][k];
  if (t.norm() > max_shift) t *= max_shift / t.norm();
  return {t(0), t(1), t(2)};
}

// <F, P F> / <u, u>: the merit function of the line search. Normalising by
// the size of u keeps the search away from the trivial solution.
double merit(const ScalarField& g, const ScalarField& u, double eps2, double lambda) {
  return inner(g, solve_screened_poisson(g, eps2, lambda)) / inner(u, u);
}

NewtonOutcome newton_krylov(ScalarField u, const ChargeDensity& cd, const ProblemParams& pp, const SolverOptions& opt,
                            int budget) {
  const double eps2 = pp.eps * pp.eps;
  ScalarField phi = potential_of(u, cd);
  ScalarField g = first_variation(u, phi, cd, pp);
  double res = relative_residual(g, u);
  double m = merit(g, u, eps2, pp.lambda);
  int it = 0;
  for (; it < std::min(opt.max_newton, budget); ++it) {
    if (res < opt.tol) return {std::move(u), true, it, res};
    const Linearization lin = linearize(u, phi, cd, pp);
    detail::JacobianOperator J(lin);
    Eigen::GMRES<detail::JacobianOperator, detail::ScreenedPoissonPreconditioner> gmres;
    gmres.setTolerance(opt.krylov_tol);
    gmres.setMaxIterations(opt.krylov_max);
    gmres.set_restart(opt.krylov_restart);
    gmres.compute(J);
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(g.values().data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd dx = gmres.solve(rhs);
    ScalarField d(u.grid(), std::vector<double>(dx.data(), dx.data() + dx.size()));
    ScalarField d_perp = d;
    const Vec3 shift = split_translation(d_perp, u, opt.max_shift_cells * u.grid().spacing());
    // Tiny shifts are left in the linear step, which is then exact enough.
    const bool translate = norm(shift) > 1e-3 * u.grid().spacing();
    if (translate) d = std::move(d_perp);

    bool accepted = false;
    for (double s = 1.0; s >= 1.0 / 1024.0; s *= 0.5) {
      // No clipping here: the nonlinearity only sees u_+, and the discrete
      // solution may want tiny negative values in its tail.
      ScalarField v = u + s * d;
      if (translate) v = translate_spectral(v, s * shift);
      if (trivial(v)) continue;
      ScalarField phi_v = potential_of(v, cd);
      ScalarField g_v = first_variation(v, phi_v, cd, pp);
      const double m_v = merit(g_v, v, eps2, pp.lambda);
      if (m_v <= (1.0 - 2.0 * opt.armijo * s) * m) {
        u = std::move(v);
        phi = std::move(phi_v);
        g = std::move(g_v);
        m = m_v;
        res = relative_residual(g, u);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return {std::move(u), res < opt.tol, it, res};
}

// Scale t > 0 maximising I(t w) along the ray, or NaN when I(t w) has no
// interior maximum (p < 3 with the Coulomb term dominating).
double ray_peak_scale(const RayCoefficients& rc, double p) {
  if (p > 3.0) return nehari_root(rc, p);
  if (p == 3.0) return rc.delta > rc.gamma ? std::sqrt(rc.a / (rc.delta - rc.gamma)) : std::nan("");
  // p < 3: a + gamma t^2 - delta t^{p-1} dips below zero only if its minimum does.
  auto h = [&](double t) { return rc.a + rc.gamma * t * t - rc.delta * std::pow(t, p - 1.0); };
  const double tm = rc.gamma > 0.0 ? std::pow(rc.delta * (p - 1.0) / (2.0 * rc.gamma), 1.0 / (3.0 - p))
                                   : std::numeric_limits<double>::infinity();
  double hi = std::isfinite(tm) ? tm : 1.0;
  if (!std::isfinite(tm))
    while (h(hi) > 0.0) hi *= 2.0;
  if (h(hi) >= 0.0) return std::nan("");
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ScalarField ray_maximizer(const ScalarField& w, const ChargeDensity& cd, const ProblemParams& pp) {
  const double t = ray_peak_scale(ray_coefficients(w, cd, pp), pp.p);
  return std::isnan(t) ? w : t * w;
}

// Places the decoupled ground state w_c(x) = w(|x - c|/eps) where its ray
// maximum J(c) = max_t I(t w_c) is locally smallest, starting from c0. Only
// the Coulomb term depends on c, and dJ/dc = (t^4/2) int grad rho w^2 phi_w.
// Newton alone handles this near-flat direction poorly once eps is small.
Vec3 reduced_energy_center(const RadialProfile& prof, const ChargeDensity& cd, const ProblemParams& pp,
                           const Grid& g, Vec3 c) {
  struct Eval {
    double J;
    Vec3 grad;
  };
  auto eval = [&](const Vec3& x0) -> Eval {
    const ScalarField w = ScalarField::sample(g, [&](const Vec3& x) { return prof.value_at(norm(x - x0) / pp.eps); });
    const ScalarField phi = potential_of(w, cd);
    const FieldIntegrals fi = field_integrals(w, phi, cd, pp);
    const RayCoefficients rc{pp.eps * pp.eps * fi.grad_sq + pp.lambda * fi.mass, fi.coulomb, pp.mu * fi.power};
    const double t = ray_peak_scale(rc, pp.p);
    if (std::isnan(t)) return {std::numeric_limits<double>::infinity(), {0.0, 0.0, 0.0}};
    const double J = 0.5 * rc.a * t * t + 0.25 * rc.gamma * std::pow(t, 4) - rc.delta * std::pow(t, pp.p + 1.0) / (pp.p + 1.0);
    Vec3 grad{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i)
      grad = grad + (w[i] * w[i] * phi[i]) * grad_rho(cd, g.point(i));
    return {J, (0.5 * std::pow(t, 4) * g.cell_volume()) * grad};
  };
  const double reach = 0.5 * g.half_width();
  const double floor = 1e-3 * g.spacing();
  double step = 0.25 * pp.eps;
  Eval cur = eval(c);
  for (int it = 0; it < 60 && step > floor && std::isfinite(cur.J); ++it) {
    const double gn = norm(cur.grad);
    if (gn == 0.0) break;
    bool moved = false;
    for (; step > floor; step *= 0.5) {
      const Vec3 trial = c - (step / gn) * cur.grad;
      if (norm(trial - g.center()) > reach) continue;
      const Eval e = eval(trial);
      if (e.J < cur.J) {
        c = trial;
        cur = e;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    step = std::min(1.5 * step, 0.5 * pp.eps);
  }
  return c;
}

// Centre of mass of u_+^2; for a symmetric seed this is its symmetry centre.
Vec3 mass_center(const ScalarField& u) {
  const Grid& g = u.grid();
  Vec3 c{0.0, 0.0, 0.0};
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = u[i] > 0.0 ? u[i] * u[i] : 0.0;
    c = c + w * g.point(i);
    m += w;
  }
  return (1.0 / m) * c;
}

bool nontrivial_solution(const ScalarField& u, const ProblemParams& pp) {
  return u.max() >= peak_lower_bound(pp) * (1.0 - 1e-6);
}

}  // namespace

double path_family_max(const ScalarField& u, const ChargeDensity& cd, const ProblemParams& pp, double t_lo,
                       double t_hi) {
  auto f = [&](double t) {
    try {
      return scale_path_energy(u, cd, pp, t);
    } catch (const std::invalid_argument&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  // Coarse log-spaced scan, then golden-section refinement around the best sample.
  const int m = 25;
  std::vector<double> ts(m), fs(m);
  for (int i = 0; i < m; ++i) {
    ts[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (m - 1));
    fs[i] = f(ts[i]);
  }
  const auto best = static_cast<int>(std::max_element(fs.begin(), fs.end()) - fs.begin());
  double a = ts[std::max(best - 1, 0)], b = ts[std::min(best + 1, m - 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 30; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::max({fs[best], fc, fd});
}

SolutionRecord mountain_pass_solve(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt) {
  pp.validate();
  if (!(pp.p > 2.0 && pp.p < 5.0)) throw std::invalid_argument("mountain-pass solve needs p in (2, 5)");
  if (trivial(seed)) throw std::invalid_argument("trivial seed: u_+ is identically zero");

  int used = 0;
  NewtonOutcome out = newton_krylov(ray_maximizer(clip(seed), cd, pp), cd, pp, opt, opt.max_iter);
  used += out.iterations;
  bool ok = out.converged && nontrivial_solution(out.u, pp);
  std::string how = "newton";

  if (!ok && opt.homotopy_fallback) {
    // Decoupled ground state placed by its reduced energy, then switch rho on.
    const Grid& g = seed.grid();
    const RadialProfile prof = radial_limit_ground_state(pp, 0.0);
    const Vec3 c = zero_density(cd) ? mass_center(seed) : reduced_energy_center(prof, cd, pp, g, mass_center(seed));
    ScalarField u = ScalarField::sample(g, [&](const Vec3& x) { return prof.value_at(norm(x - c) / pp.eps); });
    double s = 0.0, ds = 0.25;
    bool stage_ok = true;
    while (true) {
      NewtonOutcome st = newton_krylov(u, scale_charge(cd, s), pp, opt, opt.max_iter - used);
      used += st.iterations;
      if (st.converged && nontrivial_solution(st.u, pp)) {
        u = std::move(st.u);
        if (s == 1.0) break;
        const double next = std::min(1.0, s + ds);
        s = next;
        ds = std::min(0.5, 1.5 * ds);
      } else {
        if (s == 0.0 || ds < 1.0 / 256.0 || used >= opt.max_iter) {
          stage_ok = false;
          break;
        }
        s -= ds;
        ds *= 0.5;
        s += ds;
      }
    }
    out = {u, stage_ok, used, 0.0};
    ok = stage_ok;
    how = "homotopy";
  }

  SolutionRecord rec = make_record(out.u, cd, pp);
  rec.iterations = used;
  rec.converged = ok && rec.residual_l2 < opt.tol;
  rec.status = rec.converged ? "converged (" + how + ")" : "not converged";
  if (rec.converged) {
    rec.path_upper_bound = path_family_max(rec.u, cd, pp);
    rec.path_gap = rec.path_upper_bound - rec.energy.total;
  }
  return rec;
}

ContinuationResult mu_continuation(const ChargeDensity& cd, const ProblemParams& pp_base,
                                   const std::vector<double>& mu_grid, const ScalarField& seed,
                                   const SolverOptions& opt) {
  if (mu_grid.empty()) throw std::invalid_argument("mu grid is empty");
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] >= 0.5 && mu_grid[i] <= 1.0)) throw std::invalid_argument("mu grid must lie in [1/2, 1]");
    if (i > 0 && !(mu_grid[i] > mu_grid[i - 1])) throw std::invalid_argument("mu grid must be ascending");
  }
  ContinuationResult cr;
  cr.complete = true;
  ScalarField warm = seed;
  for (double mu : mu_grid) {
    ProblemParams pp = pp_base;
    pp.mu = mu;
    SolutionRecord rec = mountain_pass_solve(cd, pp, warm, opt);
    cr.mu_values.push_back(mu);
    cr.c_values.push_back(rec.energy.total);
    const bool conv = rec.converged;
    if (conv) warm = rec.u;
    cr.records.push_back(std::move(rec));
    if (!conv) {
      cr.complete = false;
      break;
    }
  }
  double scale = 0.0;
  for (double c : cr.c_values) scale = std::max(scale, std::abs(c));
  cr.monotone_ok = cr.complete;
  for (std::size_t i = 1; i < cr.c_values.size(); ++i)
    if (cr.c_values[i] > cr.c_values[i - 1] + 1e-6 * scale) cr.monotone_ok = false;
  return cr;
}

}  // namespace spvar
