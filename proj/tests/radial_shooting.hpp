#pragma once

// Radial oracle for the Hardy constant of -div(grad u) = lambda u / |x|^2 on
// the 3D annulus eps < |x| < 1 with Dirichlet data. Radial solutions obey
// (r^2 u')' + lambda u = 0; the principal lambda is found by shooting from
// r = eps with u = 0, u' = 1 and bisecting on the sign of u(1).

#include <cmath>

namespace finsler::test {

// u(1) for a given lambda, integrated in t = log r with classical RK4.
inline double shoot(double lambda, double eps, int steps = 4000) {
  const double t0 = std::log(eps), dt = -t0 / steps;
  // State: u and w = r^2 u'. In t: u_t = w / r, w_t = -lambda u r.
  double u = 0.0, w = eps * eps;
  auto rhs = [lambda](double t, double uu, double ww, double& du, double& dw) {
    const double r = std::exp(t);
    du = ww / r;
    dw = -lambda * uu * r;
  };
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
    rhs(t, u, w, k1u, k1w);
    rhs(t + 0.5 * dt, u + 0.5 * dt * k1u, w + 0.5 * dt * k1w, k2u, k2w);
    rhs(t + 0.5 * dt, u + 0.5 * dt * k2u, w + 0.5 * dt * k2w, k3u, k3w);
    rhs(t + dt, u + dt * k3u, w + dt * k3w, k4u, k4w);
    u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    t += dt;
  }
  return u;
}

// Principal eigenvalue by bisection; [lo, hi] must bracket only the first one.
inline double radial_hardy_eigenvalue(double eps, double lo = 0.0, double hi = 0.0) {
  if (hi <= lo) {
    const double L = std::log(1.0 / eps);
    const double pi = 3.14159265358979323846;
    hi = 0.25 + 2.0 * (pi / L) * (pi / L);  // below the second eigenvalue
  }
  double flo = shoot(lo, eps);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = shoot(mid, eps);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace finsler::test
