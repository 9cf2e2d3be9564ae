#include "spvar/semiclassical.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>

#include "spvar/coulomb.hpp"
#include "spvar/functional.hpp"

namespace spvar {

void require_semiclassical_admissible(const ChargeDensity& cd, const ProblemParams& pp) {
  if (!(pp.eps > 0.0 && pp.eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  if (cd.variant == ChargeVariant::ExpCoercive) {
    const GradientGrowth gg = cd.gradient_growth();
    if (gg.super_exponential)
      throw std::invalid_argument("grad rho grows faster than any exponential; concentration analysis does not apply");
    if (gg.b > 0.0 && !(pp.eps < std::sqrt(pp.lambda) / gg.b))
      throw std::invalid_argument(fmt::format("eps = {:.6g} must be below sqrt(lambda)/b = {:.6g} for this charge",
                                              pp.eps, std::sqrt(pp.lambda) / gg.b));
  }
}

SolutionRecord solve_semiclassical(const ChargeDensity& cd, const ProblemParams& pp, const ScalarField& seed,
                                   const SolverOptions& opt) {
  require_semiclassical_admissible(cd, pp);
  return mountain_pass_solve(cd, pp, seed, opt);
}

Vec3 interpolated_peak(const ScalarField& u) {
  const Grid& g = u.grid();
  const int n = g.n();
  const auto vals = u.values();
  const std::size_t im = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  const int idx[3] = {static_cast<int>(im / (static_cast<std::size_t>(n) * n)), static_cast<int>((im / n) % n),
                      static_cast<int>(im % n)};
  Vec3 x = g.point(idx[0], idx[1], idx[2]);
  const double h = g.spacing();
  for (int axis = 0; axis < 3; ++axis) {
    if (idx[axis] == 0 || idx[axis] == n - 1) continue;
    int lo[3] = {idx[0], idx[1], idx[2]}, hi[3] = {idx[0], idx[1], idx[2]};
    --lo[axis];
    ++hi[axis];
    const double fm = u[g.index(lo[0], lo[1], lo[2])], fp = u[g.index(hi[0], hi[1], hi[2])], f0 = vals[im];
    // Written so that swapping fm and fp negates the offset exactly.
    const double curv = (fm + fp) - 2.0 * f0;
    if (curv < 0.0) x[axis] += 0.5 * (fm - fp) / curv * h;
  }
  return x;
}

ScalarField rescaled_profile(const ScalarField& u, const Vec3& x_peak, double eps) {
  const Grid& g = u.grid();
  ScalarField shifted = translate_spectral(u, g.center() - x_peak);
  const Grid frame = make_grid(g.n(), g.half_width() / eps);
  return ScalarField(frame, std::vector<double>(shifted.values().begin(), shifted.values().end()));
}

namespace {

ScalarField flip_first_axis(const ScalarField& f, double sign) {
  const Grid& g = f.grid();
  const int n = g.n();
  ScalarField out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out[g.index(i, j, k)] = sign * f[g.index(n - 1 - i, j, k)];
  return out;
}

Vec3 claim3_raw(const ScalarField& a, const std::array<ScalarField, 3>& b) {
  const ScalarField phi = poisson_fft(a);
  return {inner(b[0], phi), inner(b[1], phi), inner(b[2], phi)};
}

struct Frame {
  ScalarField w;
  ScalarField a;                   // rho w^2
  std::array<ScalarField, 3> b;    // w^2 d_i rho
  ScalarField w2;
  double max_grad = 0.0;
};

Frame build_frame(const SolutionRecord& rec, const ChargeDensity& cd, const Vec3& x_peak) {
  const double eps = rec.params.eps;
  ScalarField w = rescaled_profile(rec.u, x_peak, eps);
  const Grid fg = w.grid();
  Frame fr{std::move(w), ScalarField(fg), {ScalarField(fg), ScalarField(fg), ScalarField(fg)}, ScalarField(fg), 0.0};
  for (std::size_t i = 0; i < fg.size(); ++i) {
    const Vec3 x = x_peak + eps * fg.point(i);
    const double w2 = fr.w[i] * fr.w[i];
    const Vec3 gr = grad_rho(cd, x);
    fr.w2[i] = w2;
    fr.a[i] = eval_rho(cd, x) * w2;
    for (int c = 0; c < 3; ++c) fr.b[c][i] = w2 * gr[c];
    fr.max_grad = std::max(fr.max_grad, norm(gr));
  }
  return fr;
}

RadialProfile decoupled_oracle(const ProblemParams& pp) {
  ProblemParams q = pp;
  q.eps = 1.0;
  q.poh.reset();
  return radial_limit_ground_state(q, 0.0);
}

}  // namespace

Vec3 claim3_frame_integral(const ScalarField& a, const std::array<ScalarField, 3>& b) {
  const Vec3 direct = claim3_raw(a, b);
  const Vec3 mirror = claim3_raw(flip_first_axis(a, 1.0),
                                 {flip_first_axis(b[0], -1.0), flip_first_axis(b[1], 1.0), flip_first_axis(b[2], 1.0)});
  return {0.5 * (direct[0] - mirror[0]), 0.5 * (direct[1] + mirror[1]), 0.5 * (direct[2] + mirror[2])};
}

Vec3 claim3_integral(const SolutionRecord& rec, const ChargeDensity& cd) {
  const Frame fr = build_frame(rec, cd, interpolated_peak(rec.u));
  return claim3_frame_integral(fr.a, fr.b);
}

ConcentrationReport concentration_report(const SolutionRecord& rec, const ChargeDensity& cd) {
  return concentration_report(rec, cd, decoupled_oracle(rec.params));
}

ConcentrationReport concentration_report(const SolutionRecord& rec, const ChargeDensity& cd,
                                         const RadialProfile& oracle) {
  const ProblemParams& pp = rec.params;
  ConcentrationReport r;
  r.eps = pp.eps;
  r.x_peak = interpolated_peak(rec.u);
  r.peak_value = rec.u.max();
  r.grad_rho_at_peak = grad_rho(cd, r.x_peak);
  r.rho_grad_product = eval_rho(cd, r.x_peak) * r.grad_rho_at_peak;
  r.peak_bound_ok = r.peak_value >= peak_lower_bound(pp) - 1e-10;

  const Frame fr = build_frame(rec, cd, r.x_peak);
  const Grid& fg = fr.w.grid();
  r.claim3_integral = claim3_frame_integral(fr.a, fr.b);
  const double scale = fr.max_grad * inner(fr.w2, poisson_fft(fr.a));
  r.claim3_ratio = scale > 0.0 ? norm(r.claim3_integral) / scale : 0.0;

  const ScalarField w0 = oracle.sample(fg, {0.0, 0.0, 0.0});
  r.rescaled_profile_distance = norm(fr.w - w0, NormKind::L2) / norm(w0, NormKind::L2);

  ScalarField res = laplacian(fr.w);
  res *= -1.0;
  for (std::size_t i = 0; i < fg.size(); ++i) {
    const double wp = std::max(fr.w[i], 0.0);
    res[i] += pp.lambda * fr.w[i] - pp.mu * std::pow(wp, pp.p);
  }
  r.kwong_residual = norm(res, NormKind::L2) / norm(fr.w, NormKind::L2);

  // 99% mass radius in physical units.
  {
    const Grid& g = rec.u.grid();
    std::vector<std::pair<double, double>> rm;
    rm.reserve(g.size());
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double m = rec.u[i] * rec.u[i];
      rm.emplace_back(norm(g.point(i) - r.x_peak), m);
      total += m;
    }
    std::sort(rm.begin(), rm.end());
    double acc = 0.0;
    for (const auto& [rad, m] : rm) {
      acc += m;
      if (acc >= 0.99 * total) {
        r.mass_radius_99 = rad;
        break;
      }
    }
  }

  // Barrier C |y|^-1 exp(-sqrt(lambda)/2 |y|) on the frame shell, C from the inner bin.
  {
    const double L = fg.half_width(), lo = 0.5 * L, hi = 0.9 * L, bw = fg.spacing();
    const double k = 0.5 * std::sqrt(pp.lambda);
    auto env = [&](double y) { return std::exp(-k * y) / y; };
    double c = 0.0;
    for (std::size_t i = 0; i < fg.size(); ++i) {
      const double y = norm(fg.point(i));
      if (y >= lo && y <= lo + bw && fr.w[i] > 0.0) c = std::max(c, fr.w[i] / env(y));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < fg.size(); ++i) {
      const double y = norm(fg.point(i));
      if (y >= lo && y <= hi && fr.w[i] > 0.0) worst = std::max(worst, fr.w[i] / (c * env(y)));
    }
    r.decay_barrier_constant = c;
    r.decay_barrier_ok = c > 0.0 && worst <= 1.0 + 1e-9;
  }
  return r;
}

ExpansionResult expansion_check(const ScalarField& u, const ChargeDensity& cd, const Vec3& x0,
                                const std::vector<double>& eps_list, const ProblemParams& pp) {
  if (eps_list.size() < 3) throw std::invalid_argument("eps_list too short: need at least 3 values");
  for (double e : eps_list)
    if (!(e > 0.0 && e <= 0.5)) throw std::invalid_argument("eps_list values must lie in (0, 1/2]");
  const Grid& g = u.grid();
  ProblemParams p0 = pp;
  p0.eps = 1.0;
  const double i0 = energy(u, make_constant(0.0), p0).total;

  ExpansionResult out;
  out.d_star = field_integrals(u, make_constant(1.0), p0).coulomb;
  out.predicted = std::pow(eval_rho(cd, x0), 2) * out.d_star;
  out.quarter_predicted = 0.25 * out.predicted;
  for (double e : eps_list) {
    const Grid ge = make_grid(g.n(), e * g.half_width(), x0);
    const ScalarField ue(ge, std::vector<double>(u.values().begin(), u.values().end()));
    ProblemParams pe = pp;
    pe.eps = e;
    out.eps.push_back(e);
    out.scaled_difference.push_back(energy(ue, cd, pe).total / (e * e * e) - i0);
  }
  // Normal equations for v = s e^2 (+ t e^4).
  double s22 = 0, s24 = 0, s44 = 0, v2 = 0, v4 = 0;
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    const double e2 = out.eps[i] * out.eps[i], e4 = e2 * e2, v = out.scaled_difference[i];
    s22 += e2 * e2;
    s24 += e2 * e4;
    s44 += e4 * e4;
    v2 += v * e2;
    v4 += v * e4;
  }
  const double det = s22 * s44 - s24 * s24;
  out.slope = std::abs(det) > 1e-300 * s22 * s44 ? (v2 * s44 - v4 * s24) / det : v2 / s22;
  auto rel = [](double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a); };
  out.rel_err = rel(out.slope, out.predicted);
  out.quarter_rel_err = rel(out.slope, out.quarter_predicted);
  return out;
}

UniformBound uniform_bound_probe(const std::vector<SolutionRecord>& sweep) {
  if (sweep.size() < 3) throw std::invalid_argument("uniform bound probe needs at least 3 records");
  std::vector<std::pair<double, double>> pts;  // (eps, peak)
  for (const SolutionRecord& r : sweep) pts.emplace_back(r.params.eps, r.u.max());
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  UniformBound ub;
  int s = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ub.sup_linf = std::max(ub.sup_linf, pts[i].second);
    for (std::size_t j = i + 1; j < pts.size(); ++j) s += (pts[j].second > pts[i].second) - (pts[j].second < pts[i].second);
  }
  const double n = static_cast<double>(pts.size());
  const double sd = std::sqrt(n * (n - 1.0) * (2.0 * n + 5.0) / 18.0);
  ub.mann_kendall_z = s > 0 ? (s - 1) / sd : s < 0 ? (s + 1) / sd : 0.0;
  ub.gidas_spruck_flag = ub.mann_kendall_z <= 1.6448536269514722;
  return ub;
}

SweepResult semiclassical_sweep(const ChargeDensity& cd, const ProblemParams& pp, const std::vector<double>& eps_list,
                                const SweepOptions& opt) {
  if (eps_list.empty()) throw std::invalid_argument("eps list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be descending");
  const RadialProfile oracle = decoupled_oracle(pp);
  SweepResult out;
  out.complete = true;
  if (opt.independent_seeds) {
    const std::size_t m = eps_list.size();
    std::vector<std::optional<SolutionRecord>> recs(m);
    std::vector<std::exception_ptr> errs(m);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next++) < m;) {
        try {
          ProblemParams pe = pp;
          pe.eps = eps_list[i];
          const Grid g = make_grid(opt.n, pe.eps * opt.L_ref, opt.seed_center);
          recs[i] = solve_semiclassical(cd, pe, gaussian_seed(g, opt.seed_center, 2.0 * peak_lower_bound(pe), 1.5 * pe.eps),
                                        opt.solver);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min<int>(opt.workers, static_cast<int>(m)); ++w) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    for (std::size_t i = 0; i < m; ++i) {
      if (errs[i]) std::rethrow_exception(errs[i]);
      if (recs[i]->converged) out.reports.push_back(concentration_report(*recs[i], cd, oracle));
      else out.complete = false;
      out.records.push_back(std::move(*recs[i]));
    }
    return out;
  }
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    ProblemParams pe = pp;
    pe.eps = eps_list[i];
    const Vec3 center = i == 0 ? opt.seed_center : out.reports.back().x_peak;
    const Grid g = make_grid(opt.n, pe.eps * opt.L_ref, center);
    ScalarField seed(g);
    if (i == 0) {
      seed = gaussian_seed(g, center, 2.0 * peak_lower_bound(pe), 1.5 * pe.eps);
    } else {
      const ScalarField& prev = out.records.back().u;
      const double stretch = eps_list[i - 1] / pe.eps;
      seed = resample_trilinear(prev, g, [&](const Vec3& x) { return center + stretch * (x - center); });
    }
    SolutionRecord rec = solve_semiclassical(cd, pe, seed, opt.solver);
    if (!rec.converged) {
      out.complete = false;
      out.records.push_back(std::move(rec));
      break;
    }
    out.reports.push_back(concentration_report(rec, cd, oracle));
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace spvar
