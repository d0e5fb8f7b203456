#include "finsler/morrey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "finsler/errors.hpp"
#include "finsler/summation.hpp"

namespace finsler {

std::string to_string(MorreyVariant v) {
  switch (v) {
    case MorreyVariant::Basic: return "basic";
    case MorreyVariant::EnhancedTilde: return "enhanced_tilde";
    case MorreyVariant::EnhancedHat: return "enhanced_hat";
  }
  return "unknown";
}

MorreyVariant morrey_variant_from_string(const std::string& name) {
  if (name == "basic") return MorreyVariant::Basic;
  if (name == "enhanced_tilde") return MorreyVariant::EnhancedTilde;
  if (name == "enhanced_hat") return MorreyVariant::EnhancedHat;
  throw ConfigurationError("unknown Morrey variant: " + name);
}

void validate(const MorreySpec& spec, std::size_t n) {
  const double p = spec.p, q = spec.q, nd = static_cast<double>(n);
  if (n < 1 || n > 3) throw ConfigurationError("Morrey norms need dimension 1, 2 or 3");
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigurationError("Morrey exponent p must be > 1");
  if (!std::isfinite(q)) throw ConfigurationError("Morrey exponent q must be finite");
  const bool enhanced = spec.variant != MorreyVariant::Basic;
  if (p < nd) {
    const double qmin = enhanced ? nd : nd / p;
    if (!(q > qmin)) {
      throw ConfigurationError("Morrey space with p < n needs q > " + std::to_string(qmin));
    }
  } else if (p == nd) {
    if (!(q > nd)) throw ConfigurationError("Morrey space with p = n needs q > n");
    if (enhanced && !(spec.theta > nd - 1.0 && spec.theta < nd)) {
      throw ConfigurationError("enhanced Morrey space with p = n needs theta in (n-1, n)");
    }
  } else {
    if (q != 1.0) throw ConfigurationError("Morrey space with p > n needs q = 1");
    if (spec.variant == MorreyVariant::EnhancedHat &&
        !(spec.vartheta > p - 1.0 && spec.vartheta < p)) {
      throw ConfigurationError("enhanced_hat Morrey space with p > n needs vartheta in (p-1, p)");
    }
  }
}

MorreyLattice MorreyLattice::refined(std::size_t level) {
  MorreyLattice l;
  l.center_stride = std::max<std::size_t>(1, std::size_t{4} >> std::min<std::size_t>(level, 8));
  l.steps_per_octave = std::size_t{4} << std::min<std::size_t>(level, 16);
  return l;
}

MorreyResult morrey_norm(const GridFunction& f, const MorreySpec& spec,
                         const MorreyLattice& lattice) {
  const GridDomain& g = f.grid();
  const std::size_t n = g.dim();
  validate(spec, n);
  if (lattice.center_stride < 1 || lattice.steps_per_octave < 1) {
    throw ConfigurationError("Morrey lattice needs stride >= 1 and steps >= 1");
  }
  const double h = g.h(), nd = static_cast<double>(n), p = spec.p, q = spec.q;
  MorreyResult res;

  // Bounding box of the mask.
  std::array<std::size_t, 3> lo{g.nodes(0), g.nodes(1), g.nodes(2)}, hi{0, 0, 0};
  for (std::size_t idx : g.mask_nodes()) {
    const auto ijk = g.unravel(idx);
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], ijk[a]);
      hi[a] = std::max(hi[a], ijk[a]);
    }
  }
  double d2 = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double e = static_cast<double>(hi[a] - lo[a]) * h;
    d2 += e * e;
  }
  res.diameter = std::sqrt(d2);

  if (p > nd && spec.variant != MorreyVariant::EnhancedHat) {
    CompensatedSum s;
    for (std::size_t idx : g.mask_nodes()) s += std::abs(f[idx]);
    res.value = s.value() * g.cell_volume();
    return res;
  }

  std::function<double(double)> weight;
  if (p < nd) {
    const double qp = q / (q - 1.0);
    weight = [e = nd / qp](double r) { return std::pow(r, -e); };
  } else if (p == nd) {
    if (spec.variant == MorreyVariant::Basic) {
      const double np = nd / (nd - 1.0);
      weight = [e = q / np, D = res.diameter](double r) { return std::pow(std::log(D / r), e); };
    } else {
      weight = [e = spec.theta](double r) { return std::pow(r, -e); };
    }
  } else {
    weight = [e = nd - p + spec.vartheta](double r) { return std::pow(r, -e); };
  }

  std::vector<double> radii;
  for (std::size_t k = 0;; ++k) {
    const double r = 2.0 * h *
                     std::pow(2.0, static_cast<double>(k) /
                                       static_cast<double>(lattice.steps_per_octave));
    if (!(r < res.diameter)) break;
    radii.push_back(r);
  }
  res.radii = radii.size();
  if (radii.empty()) return res;

  // Prefix sums of |f| on the mask along axis 0, one row per (j, k).
  const std::size_t N0 = g.nodes(0), N1 = g.nodes(1), N2 = g.nodes(2);
  std::vector<double> prefix((N0 + 1) * N1 * N2, 0.0);
  for (std::size_t row = 0; row < N1 * N2; ++row) {
    double acc = 0.0;
    double* pr = &prefix[row * (N0 + 1)];
    for (std::size_t i = 0; i < N0; ++i) {
      const std::size_t idx = i + N0 * row;
      if (g.in_mask(idx)) acc += std::abs(f[idx]);
      pr[i + 1] = acc;
    }
  }

  const double vol = g.cell_volume();
  for (std::size_t c : g.mask_nodes()) {
    const auto ijk = g.unravel(c);
    bool on_lattice = true;
    for (std::size_t a = 0; a < n; ++a) {
      on_lattice = on_lattice && (ijk[a] % lattice.center_stride == 0);
    }
    if (!on_lattice) continue;
    ++res.centers;
    const long ci = static_cast<long>(ijk[0]), cj = static_cast<long>(ijk[1]),
               ck = static_cast<long>(ijk[2]);
    for (double r : radii) {
      const double rr = r / h;  // radius in node units
      const long kmax = n >= 3 ? static_cast<long>(std::ceil(rr)) - 1 : 0;
      const long jmax = n >= 2 ? static_cast<long>(std::ceil(rr)) - 1 : 0;
      double sum = 0.0;
      for (long dk = -kmax; dk <= kmax; ++dk) {
        const long k = ck + dk;
        if (k < 0 || k >= static_cast<long>(N2)) continue;
        for (long dj = -jmax; dj <= jmax; ++dj) {
          const long j = cj + dj;
          if (j < 0 || j >= static_cast<long>(N1)) continue;
          const double rem = rr * rr - static_cast<double>(dj * dj + dk * dk);
          if (!(rem > 0.0)) continue;
          const long imax = static_cast<long>(std::ceil(std::sqrt(rem))) - 1;
          const long i0 = std::max<long>(0, ci - imax);
          const long i1 = std::min<long>(static_cast<long>(N0) - 1, ci + imax);
          if (i1 < i0) continue;
          const double* pr = &prefix[static_cast<std::size_t>(j + static_cast<long>(N1) * k) * (N0 + 1)];
          sum += pr[i1 + 1] - pr[i0];
        }
      }
      const double v = weight(r) * sum * vol;
      if (v > res.value) {
        res.value = v;
        res.best_radius = r;
        res.best_center = c;
      }
    }
  }
  return res;
}

double lq_shell_mass(const std::function<double(const double*)>& f, std::size_t n, double q,
                     double eps, double R, std::size_t radial_per_octave, std::size_t angular) {
  if (n != 2 && n != 3) throw ArgumentError("shell mass is implemented for n = 2 and n = 3");
  if (!(eps > 0.0) || !(R > eps)) throw ArgumentError("shell needs 0 < eps < R");
  if (radial_per_octave == 0 || angular == 0) throw ArgumentError("quadrature needs points");
  const double t0 = std::log(eps), t1 = std::log(R);
  const auto nr = static_cast<std::size_t>(
      std::ceil((t1 - t0) / std::log(2.0) * static_cast<double>(radial_per_octave)));
  const double dt = (t1 - t0) / static_cast<double>(nr);
  const double pi = std::numbers::pi;
  CompensatedSum sum;
  double x[3] = {0.0, 0.0, 0.0};
  for (std::size_t ir = 0; ir < nr; ++ir) {
    const double r = std::exp(t0 + (static_cast<double>(ir) + 0.5) * dt);
    const double jac = std::pow(r, static_cast<double>(n)) * dt;  // dr = r dt
    if (n == 2) {
      const double dth = 2.0 * pi / static_cast<double>(angular);
      double ring = 0.0;
      for (std::size_t a = 0; a < angular; ++a) {
        const double th = (static_cast<double>(a) + 0.5) * dth;
        x[0] = r * std::cos(th);
        x[1] = r * std::sin(th);
        ring += std::pow(std::abs(f(x)), q);
      }
      sum += ring * dth * jac;
    } else {
      const double dth = pi / static_cast<double>(angular);
      const std::size_t nph = 2 * angular;
      const double dph = 2.0 * pi / static_cast<double>(nph);
      double shell = 0.0;
      for (std::size_t a = 0; a < angular; ++a) {
        const double th = (static_cast<double>(a) + 0.5) * dth;
        for (std::size_t b = 0; b < nph; ++b) {
          const double ph = (static_cast<double>(b) + 0.5) * dph;
          x[0] = r * std::sin(th) * std::cos(ph);
          x[1] = r * std::sin(th) * std::sin(ph);
          x[2] = r * std::cos(th);
          shell += std::pow(std::abs(f(x)), q) * std::sin(th);
        }
      }
      sum += shell * dth * dph * jac;
    }
  }
  return sum.value();
}

}  // namespace finsler
