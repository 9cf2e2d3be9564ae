// Independent reference computations used by the tests. Nothing here calls
// into the library.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// Ground state of u'' + 2u'/r = lambda u - u^p by classical RK4 shooting on a
// fixed step, bisecting on u(0) between undershoot (u' turns positive while
// u > 0) and overshoot (u crosses zero).
struct Kwong {
  double u0 = 0.0;
  double dr = 0.0;
  std::vector<double> u;  // u(i dr), truncated where the shot leaves the bracket

  // 4 pi int_0^R f(u(r)) r^2 dr, trapezoid rule.
  template <class F>
  double radial_integral(F f) const {
    double s = 0.0;
    for (std::size_t i = 1; i < u.size(); ++i) {
      const double r0 = (i - 1) * dr, r1 = i * dr;
      s += 0.5 * dr * (f(u[i - 1]) * r0 * r0 + f(u[i]) * r1 * r1);
    }
    return 4.0 * std::numbers::pi * s;
  }
  double at(double r) const {
    const double x = r / dr;
    const std::size_t i = static_cast<std::size_t>(x);
    if (i + 1 >= u.size()) return 0.0;
    const double t = x - i;
    return (1 - t) * u[i] + t * u[i + 1];
  }
};

inline int shoot(double a, double p, double lambda, double dr, double rmax, std::vector<double>* out) {
  // Series start: u = a + c r^2, c = (lambda a - a^p)/6.
  const double c = (lambda * a - std::pow(a, p)) / 6.0;
  double r = dr, u = a + c * dr * dr, v = 2.0 * c * dr;
  if (out) {
    out->assign({a, u});
  }
  auto rhs = [&](double rr, double uu, double vv) {
    const double up = uu > 0 ? std::pow(uu, p) : 0.0;
    return std::array<double, 2>{vv, lambda * uu - up - 2.0 * vv / rr};
  };
  while (r < rmax) {
    const auto k1 = rhs(r, u, v);
    const auto k2 = rhs(r + dr / 2, u + dr / 2 * k1[0], v + dr / 2 * k1[1]);
    const auto k3 = rhs(r + dr / 2, u + dr / 2 * k2[0], v + dr / 2 * k2[1]);
    const auto k4 = rhs(r + dr, u + dr * k3[0], v + dr * k3[1]);
    u += dr / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    v += dr / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    r += dr;
    if (u < 0) return +1;  // overshoot
    if (v > 0) return -1;  // undershoot
    if (out) out->push_back(u);
  }
  return 0;
}

inline Kwong kwong(double p, double lambda = 1.0, double dr = 2e-4, double rmax = 12.0) {
  double lo = std::pow(lambda, 1.0 / (p - 1.0)) * (1.0 + 1e-9), hi = 50.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const int s = shoot(mid, p, lambda, dr, rmax, nullptr);
    if (s > 0) hi = mid;
    else lo = mid;
  }
  Kwong k;
  k.u0 = 0.5 * (lo + hi);
  k.dr = dr;
  shoot(k.u0, p, lambda, dr, rmax, &k.u);
  // Drop the last stretch where the shot has begun to peel away from the ground state.
  std::size_t keep = k.u.size();
  while (keep > 2 && k.u[keep - 1] > k.u[keep - 2]) --keep;
  k.u.resize(keep);
  return k;
}

}  // namespace oracle
