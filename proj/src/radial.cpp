#include "spvar/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

namespace spvar {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

enum class Shot { Overshoot, Undershoot, Unresolved };

struct ShotResult {
  Shot kind;
  std::vector<double> u, du;
};

// Effective potential V(r) = lambda + rho_inf phi(r) from a tabulated phi.
struct Potential {
  double lambda;
  double rho_inf;
  double dr;
  const std::vector<double>* phi;  // may be empty
  double moment;                   // phi ~ moment / r past the table

  double operator()(double r) const {
    if (rho_inf == 0.0 || phi->empty()) return lambda;
    const double x = r / dr;
    const auto n = phi->size();
    if (x >= static_cast<double>(n - 1)) return lambda + rho_inf * moment / r;
    // Local cubic Lagrange interpolation on the uniform table.
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(x) - 1.0, 0.0, static_cast<double>(n - 4)));
    const double t = x - static_cast<double>(i);
    const double* f = &(*phi)[i];
    const double v = -f[0] * (t - 1) * (t - 2) * (t - 3) / 6 + f[1] * t * (t - 2) * (t - 3) / 2 -
                     f[2] * t * (t - 1) * (t - 3) / 2 + f[3] * t * (t - 1) * (t - 2) / 6;
    return lambda + rho_inf * v;
  }
};

ShotResult shoot(double u0, const ProblemParams& pp, const Potential& V, double r_max, const RadialOptions& opt) {
  const double p = pp.p, mu = pp.mu;
  auto rhs = [&](const State& x, State& dxdr, double r) {
    dxdr[0] = x[1];
    const double up = x[0] > 0.0 ? std::pow(x[0], p) : 0.0;
    dxdr[1] = -2.0 / r * x[1] + V(r) * x[0] - mu * up;
  };
  const double r0 = 1e-6;
  const double a = V(0.0) * u0 - mu * std::pow(u0, p);
  State x{u0 + a * r0 * r0 / 6.0, a * r0 / 3.0};
  auto stepper = odeint::make_dense_output(opt.tol, opt.tol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x, r0, 1e-4);
  ShotResult res{Shot::Unresolved, {u0}, {0.0}};
  const auto steps = static_cast<std::size_t>(r_max / opt.dr);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double r = static_cast<double>(i) * opt.dr;
    while (stepper.current_time() < r) stepper.do_step(rhs);
    stepper.calc_state(r, x);
    res.u.push_back(x[0]);
    res.du.push_back(x[1]);
    if (x[0] < 0.0) {
      res.kind = Shot::Overshoot;
      return res;
    }
    if (x[1] > 0.0) {
      res.kind = Shot::Undershoot;
      return res;
    }
  }
  return res;
}

// Integral over [a, b] from endpoint values and slopes (corrected trapezoid, 4th order).
double hermite_segment(double h, double fa, double fb, double dfa, double dfb) {
  return 0.5 * h * (fa + fb) + h * h / 12.0 * (dfa - dfb);
}

struct ShootOutcome {
  std::vector<double> u, du;
};

ShootOutcome solve_shooting(const ProblemParams& pp, const Potential& V, const RadialOptions& opt) {
  const double v_inf = pp.lambda;
  const double r_max = 60.0 / std::sqrt(v_inf);
  double lo = std::pow(pp.lambda / pp.mu, 1.0 / (pp.p - 1.0));
  double hi = 1e3;
  // The lower end undershoots (u decays monotonically only for u(0) above the
  // constant solution); the upper end must overshoot.
  ShotResult shot_hi = shoot(hi, pp, V, r_max, opt);
  if (shot_hi.kind != Shot::Overshoot)
    throw std::runtime_error("radial shooting: no bracket in (lambda^{1/(p-1)}, 1e3)");
  ShotResult shot_lo = shoot(lo * (1.0 + 1e-9), pp, V, r_max, opt);
  if (shot_lo.kind == Shot::Overshoot)
    throw std::runtime_error("radial shooting: no bracket in (lambda^{1/(p-1)}, 1e3)");
  lo *= 1.0 + 1e-9;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    ShotResult s = shoot(mid, pp, V, r_max, opt);
    if (s.kind == Shot::Overshoot) {
      hi = mid;
      shot_hi = std::move(s);
    } else {
      lo = mid;
      shot_lo = std::move(s);
    }
  }
  // Keep the part where both bracketing solutions agree.
  std::size_t cut = 0;
  const std::size_t n = std::min(shot_lo.u.size(), shot_hi.u.size());
  while (cut + 1 < n) {
    const double a = shot_lo.u[cut + 1], b = shot_hi.u[cut + 1];
    if (a <= 0.0 || b <= 0.0 || std::abs(a - b) > 1e-7 * a || shot_lo.du[cut + 1] >= 0.0) break;
    ++cut;
  }
  // Step back a little so the tail is attached where the table is clean.
  cut = cut > 200 ? cut - 100 : cut;
  ShootOutcome out;
  out.u.assign(shot_lo.u.begin(), shot_lo.u.begin() + static_cast<std::ptrdiff_t>(cut + 1));
  out.du.assign(shot_lo.du.begin(), shot_lo.du.begin() + static_cast<std::ptrdiff_t>(cut + 1));
  for (std::size_t i = 0; i <= cut; ++i) out.u[i] = 0.5 * (shot_lo.u[i] + shot_hi.u[i]);
  for (std::size_t i = 0; i <= cut; ++i) out.du[i] = 0.5 * (shot_lo.du[i] + shot_hi.du[i]);
  return out;
}

// Radial potential of rho_inf u^2: (1/r) int_0^r q s^2 ds + int_r^inf q s ds.
void radial_potential(const RadialProfile& prof, std::vector<double>& phi, double& moment) {
  const std::size_t n = prof.u.size();
  const double dr = prof.dr;
  const double R = prof.cutoff();
  std::vector<double> inner(n, 0.0), outer(n, 0.0);
  auto q = [&](std::size_t i) { return prof.rho_inf * prof.u[i] * prof.u[i]; };
  auto dq = [&](std::size_t i) { return 2.0 * prof.rho_inf * prof.u[i] * prof.du[i]; };
  for (std::size_t i = 1; i < n; ++i) {
    const double ra = dr * static_cast<double>(i - 1), rb = dr * static_cast<double>(i);
    inner[i] = inner[i - 1] + hermite_segment(dr, q(i - 1) * ra * ra, q(i) * rb * rb,
                                              dq(i - 1) * ra * ra + 2.0 * ra * q(i - 1),
                                              dq(i) * rb * rb + 2.0 * rb * q(i));
  }
  // Tail beyond the table: q = q_c (R/r)^2 e^{-2k(r-R)}.
  const double k = prof.tail_rate;
  const double qc = q(n - 1);
  const double tail_s2 = qc * R * R / (2.0 * k);  // int_R^inf q s^2 ds
  // int_R^inf q s ds = q_c R^2 E1(2kR) e^{2kR}; the table ends deep in the tail, so
  // the leading asymptotic term suffices.
  const double tail_s1 = qc * R / (2.0 * k) * (1.0 - 1.0 / (2.0 * k * R));
  outer[n - 1] = tail_s1;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double ra = dr * static_cast<double>(i), rb = dr * static_cast<double>(i + 1);
    outer[i] = outer[i + 1] + hermite_segment(dr, q(i) * ra, q(i + 1) * rb, dq(i) * ra + q(i),
                                              dq(i + 1) * rb + q(i + 1));
  }
  moment = inner[n - 1] + tail_s2;
  phi.assign(n, 0.0);
  phi[0] = outer[0];
  for (std::size_t i = 1; i < n; ++i) phi[i] = inner[i] / (dr * static_cast<double>(i)) + outer[i];
  // phi here is for the charge u^2 with the rho_inf factor; the equation uses
  // rho_inf * phi, which Potential applies.
}

void finish_profile(RadialProfile& prof) {
  const std::size_t n = prof.u.size();
  const double dr = prof.dr;
  Potential V{prof.lambda, prof.rho_inf, dr, &prof.phi, prof.charge_moment};
  // ODE residual with a 5-point derivative of u'.
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double r = dr * static_cast<double>(i);
    const double upp = (prof.du[i - 2] - 8.0 * prof.du[i - 1] + 8.0 * prof.du[i + 1] - prof.du[i + 2]) / (12.0 * dr);
    const double vu = V(r) * prof.u[i];
    const double nl = prof.mu * std::pow(prof.u[i], prof.p);
    worst = std::max(worst, std::abs(upp + 2.0 / r * prof.du[i] - vu + nl));
    scale = std::max({scale, std::abs(vu), nl});
  }
  prof.ode_residual = scale > 0.0 ? worst / scale : 0.0;
  // I^infinity = 4 pi int (u'^2/2 + lambda u^2/2 + rho_inf phi u^2/4 - mu u^{p+1}/(p+1)) r^2 dr.
  auto f = [&](std::size_t i) {
    const double r = dr * static_cast<double>(i);
    const double u = prof.u[i], du = prof.du[i];
    const double ph = prof.phi.empty() ? 0.0 : prof.phi[i];
    return (0.5 * du * du + 0.5 * prof.lambda * u * u + 0.25 * prof.rho_inf * ph * u * u -
            prof.mu / (prof.p + 1.0) * std::pow(u, prof.p + 1.0)) * r * r;
  };
  // Composite Simpson on the table (drop one interval if the count is odd).
  std::size_t m = n - 1;
  if (m % 2 == 1) --m;
  double s = f(0) + f(m);
  for (std::size_t i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i);
  s *= dr / 3.0;
  if (m != n - 1) s += 0.5 * dr * (f(m) + f(n - 1));
  // Tail: u ~ u_c (R/r) e^{-k(r-R)}, so u'^2 ~ k^2 u^2 and the quadratic terms dominate.
  const double R = prof.cutoff(), uc = prof.u.back(), k = prof.tail_rate;
  s += 0.5 * (k * k + prof.lambda) * uc * uc * R * R / (2.0 * k);
  prof.limit_energy = 4.0 * std::numbers::pi * s;
}

}  // namespace

double RadialProfile::value_at(double r) const {
  r = std::abs(r);
  const double R = cutoff();
  if (r >= R) return u.back() * std::pow(R / r, tail_power) * std::exp(-tail_rate * (r - R));
  const double x = r / dr;
  const auto i = std::min(static_cast<std::size_t>(x), u.size() - 2);
  const double t = x - static_cast<double>(i);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * u[i] + h10 * dr * du[i] + h01 * u[i + 1] + h11 * dr * du[i + 1];
}

double RadialProfile::derivative_at(double r) const {
  r = std::abs(r);
  const double R = cutoff();
  if (r >= R) return -value_at(r) * (tail_power / r + tail_rate);
  const double x = r / dr;
  const auto i = std::min(static_cast<std::size_t>(x), u.size() - 2);
  const double t = x - static_cast<double>(i);
  const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
  return (d00 * u[i] + d01 * u[i + 1]) / dr + d10 * du[i] + d11 * du[i + 1];
}

double RadialProfile::potential_at(double r) const {
  if (rho_inf == 0.0 || phi.empty()) return 0.0;
  Potential V{0.0, 1.0, dr, &phi, charge_moment};
  return V(std::abs(r));
}

ScalarField RadialProfile::sample(const Grid& grid, const Vec3& center) const {
  return ScalarField::sample(grid, [&](const Vec3& x) { return value_at(norm(x - center)); });
}

RadialProfile radial_limit_ground_state(const ProblemParams& pp, double rho_inf, const RadialOptions& opt) {
  if (!(pp.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(pp.p > 1.0 && pp.p < 5.0)) throw std::invalid_argument("radial ground state needs p in (1, 5)");
  if (!(rho_inf >= 0.0)) throw std::invalid_argument("rho_inf must be nonnegative");
  RadialProfile prof;
  prof.p = pp.p;
  prof.mu = pp.mu;
  prof.lambda = pp.lambda;
  prof.rho_inf = rho_inf;
  prof.dr = opt.dr;
  prof.tail_rate = std::sqrt(pp.lambda);

  std::vector<double> phi;
  double moment = 0.0;
  for (int it = 0;; ++it) {
    Potential V{pp.lambda, rho_inf, opt.dr, &phi, moment};
    ShootOutcome sh = solve_shooting(pp, V, opt);
    prof.u = std::move(sh.u);
    prof.du = std::move(sh.du);
    prof.coupling_iterations = it;
    if (rho_inf == 0.0) {
      prof.phi.assign(prof.u.size(), 0.0);
      break;
    }
    std::vector<double> fresh;
    double fresh_moment = 0.0;
    radial_potential(prof, fresh, fresh_moment);
    // Compare on the common support; the table length may change between passes.
    double change = phi.empty() ? std::numeric_limits<double>::infinity() : 0.0;
    if (!phi.empty()) {
      Potential old_v{0.0, 1.0, opt.dr, &phi, moment};
      for (std::size_t i = 0; i < fresh.size(); ++i)
        change = std::max(change, std::abs(fresh[i] - old_v(opt.dr * static_cast<double>(i))));
    }
    if (change < opt.coupling_tol * std::max(1.0, fresh[0]) || it + 1 >= opt.max_coupling_iter) {
      prof.phi = std::move(fresh);
      prof.charge_moment = fresh_moment;
      break;
    }
    if (phi.empty()) {
      phi = std::move(fresh);
      moment = fresh_moment;
    } else {
      Potential old_v{0.0, 1.0, opt.dr, &phi, moment};
      for (std::size_t i = 0; i < fresh.size(); ++i)
        fresh[i] = 0.5 * (fresh[i] + old_v(opt.dr * static_cast<double>(i)));
      phi = std::move(fresh);
      moment = 0.5 * (moment + fresh_moment);
    }
  }
  prof.tail_power = 1.0 + rho_inf * prof.charge_moment / (2.0 * prof.tail_rate);
  finish_profile(prof);
  return prof;
}

void write_radial_table(const RadialProfile& prof, const std::string& path, int stride) {
  auto out = fmt::output_file(path);
  out.print("# radial ground state p={:.17g} mu={:.17g} lambda={:.17g} rho_inf={:.17g} u0={:.17g}\n", prof.p,
            prof.mu, prof.lambda, prof.rho_inf, prof.u0());
  for (std::size_t i = 0; i < prof.u.size(); i += static_cast<std::size_t>(stride))
    out.print("{:.17g} {:.17g}\n", prof.dr * static_cast<double>(i), prof.u[i]);
}

std::vector<std::pair<double, double>> read_radial_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open radial table " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double r, v;
    if (!(ss >> r >> v)) throw std::runtime_error("malformed radial table line: " + line);
    rows.emplace_back(r, v);
  }
  return rows;
}

}  // namespace spvar
