#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "finsler/calibration.hpp"
#include "finsler/energy.hpp"
#include "finsler/errors.hpp"
#include "test_util.hpp"

using namespace finsler;
using finsler::test::rel_err;
using std::numbers::pi;

namespace {

GridPtr square(std::size_t cells) {
  return std::make_shared<const GridDomain>(GridDomain::unit_box(2, cells));
}

GridFunction sine_bump(const GridPtr& g) {
  return GridFunction::from_function(g, [](const double* x) {
    return std::sin(pi * x[0]) * std::sin(pi * x[1]);
  });
}

// Smooth bump supported in [0.25, 0.75]^2.
GridFunction inner_bump(const GridPtr& g) {
  return GridFunction::from_function(g, [](const double* x) {
    const double a = std::max(0.0, 0.0625 - (x[0] - 0.5) * (x[0] - 0.5));
    const double b = std::max(0.0, 0.0625 - (x[1] - 0.5) * (x[1] - 0.5));
    return 256.0 * a * b;
  });
}

GridFunction random_field(const GridPtr& g, std::uint64_t seed) {
  Rng rng(seed);
  GridFunction f(g);
  for (std::size_t idx : g->mask_nodes()) f[idx] = rng.uniform(-1.0, 1.0);
  return f;
}

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("discrete gradient of constants and affine fields") {
    auto g = square(16);
    const auto c = discrete_gradient(GridFunction::from_function(g, [](const double*) { return 3.0; }));
    const auto lin = discrete_gradient(GridFunction::from_function(g, [](const double* x) { return x[0]; }));
    for (std::size_t idx : g->mask_nodes()) {
      const std::size_t e = g->neighbor(idx, 0, 1), n = g->neighbor(idx, 1, 1);
      if (!g->in_mask(e) || !g->in_mask(n)) continue;
      CHECK(c[2 * idx] == 0.0);
      CHECK(c[2 * idx + 1] == 0.0);
      CHECK(lin[2 * idx] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(lin[2 * idx + 1]) < 1e-12);
    }
  }

  TEST_CASE("discrete gradient error is first order") {
    double prev = 0.0;
    for (std::size_t cells : {32, 64, 128}) {
      auto g = square(cells);
      const auto d = discrete_gradient(sine_bump(g));
      double err = 0.0, x[3];
      for (std::size_t idx : g->mask_nodes()) {
        g->coords(idx, x);
        const double gx = pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
        const double gy = pi * std::sin(pi * x[0]) * std::cos(pi * x[1]);
        err = std::max({err, std::abs(d[2 * idx] - gx), std::abs(d[2 * idx + 1] - gy)});
      }
      CHECK(err <= 10.0 * g->h());
      if (prev > 0.0) CHECK(err / prev == doctest::Approx(0.5).epsilon(0.1));
      prev = err;
    }
  }

  TEST_CASE("energy of zero and the Dirichlet integral") {
    auto g = square(128);
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const ExponentPair ep(2.0, 2.0);
    const GridFunction V(g, 0.0);
    CHECK(energy_Q(GridFunction(g, 0.0), fam, ep, V) == 0.0);
    CHECK(rel_err(energy_Q(sine_bump(g), fam, ep, V), pi * pi / 2.0) < 0.02);
  }

  TEST_CASE("energy converges with order at least 0.9") {
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const ExponentPair ep(2.0, 2.0);
    std::vector<double> err;
    for (std::size_t cells : {32, 64, 128}) {
      auto g = square(cells);
      err.push_back(std::abs(energy_Q(sine_bump(g), fam, ep, GridFunction(g, 0.0)) - pi * pi / 2.0));
    }
    CHECK(std::log2(err[0] / err[1]) >= 0.9);
    CHECK(std::log2(err[1] / err[2]) >= 0.9);
  }

  TEST_CASE("energy homogeneity and nonnegativity") {
    auto g = square(24);
    const GridFunction V = GridFunction::from_function(g, [](const double* x) { return x[0] * x[1]; });
    for (double p : {1.5, 2.0, 3.0}) {
      const auto fam = NormFamily::weighted_s(3.0, {1.0, 2.0});
      const ExponentPair ep(p, 3.0);
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto phi = random_field(g, seed);
        const double q = energy_Q(phi, fam, ep, V);
        CHECK(q >= 0.0);
        for (double lam : {-2.0, 0.5}) {
          GridFunction scaled = phi;
          for (double& v : scaled.values()) v *= lam;
          CHECK(rel_err(energy_Q(scaled, fam, ep, V), std::pow(std::abs(lam), p) * q) < 1e-13);
        }
      }
    }
    const auto euclid = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const auto phi = random_field(g, 9);
    GridFunction half = phi;
    for (double& v : half.values()) v *= 0.5;
    CHECK(energy_Q(half, euclid, ExponentPair(2.0, 2.0), V) ==
          0.25 * energy_Q(phi, euclid, ExponentPair(2.0, 2.0), V));
  }

  TEST_CASE("residual examples") {
    auto g = square(16);
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const ExponentPair ep(3.0, 2.0);
    const auto test = random_field(g, 3);
    CHECK(residual_Qprime(GridFunction(g, 0.0), fam, ep, GridFunction(g, 0.0), test) == 0.0);

    GridFunction hat(g, 0.0);
    const std::size_t c = g->index(8, 8);
    hat[c] = 0.7;
    const double w = 0.7 * g->cell_volume();
    CHECK(rel_err(residual_Qprime(GridFunction(g, 1.0), fam, ep, GridFunction(g, 1.0), hat), w) < 1e-14);
  }

  TEST_CASE("residual is the derivative of Q / p") {
    auto g = square(12);
    const auto fam = NormFamily::weighted_s(3.0, {1.0, 0.5});
    const GridFunction V = GridFunction::from_function(g, [](const double* x) { return 1.0 + x[0]; });
    for (double p : {2.0, 3.0}) {
      const ExponentPair ep(p, 3.0);
      const auto u = random_field(g, 4);
      const auto phi = random_field(g, 5);
      const double t = 1e-6;
      GridFunction up = u, um = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += t * phi[i];
        um[i] -= t * phi[i];
      }
      const double fd = (energy_Q(up, fam, ep, V) - energy_Q(um, fam, ep, V)) / (2.0 * t * p);
      CHECK(rel_err(residual_Qprime(u, fam, ep, V, phi), fd) < 1e-6);
    }
  }

  TEST_CASE("energy functional gradient and increment") {
    auto g = square(10);
    const auto fam = NormFamily::weighted_s(1.5, {1.0, 2.0});
    const ExponentPair ep(2.5, 1.5);
    const GridFunction V(g, 0.3);
    EnergyFunctional Q(g, fam, ep, V);
    const auto phi = random_field(g, 6);
    const auto step = random_field(g, 7);
    std::vector<double> grad;
    const double q = Q.value_and_gradient(phi.values(), grad);
    CHECK(rel_err(q, Q.value(phi.values())) < 1e-14);
    double dd = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) dd += grad[i] * step[i];
    const double t = 1e-6;
    std::vector<double> xp = phi.values(), xm = phi.values(), xs = phi.values();
    for (std::size_t i = 0; i < xp.size(); ++i) {
      xp[i] += t * step[i];
      xm[i] -= t * step[i];
      xs[i] += step[i];
    }
    CHECK(rel_err((Q.value(xp) - Q.value(xm)) / (2.0 * t), dd) < 1e-6);
    CHECK(rel_err(Q.value_increment(phi.values(), step.values()), Q.value(xs) - q) < 1e-10);
  }

  TEST_CASE("Hilbert bracket collapses to the Dirichlet energy") {
    auto g = square(32);
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const auto cal = CalibrationTable::load(default_calibration_path());
    const auto psi = inner_bump(g);
    const auto r = simplified_energy_bracket(GridFunction(g, 1.0), psi, fam, ExponentPair(2.0, 2.0), cal);
    const double q = energy_Q(psi, fam, ExponentPair(2.0, 2.0), GridFunction(g, 0.0));
    CHECK(rel_err(r.Q_value, q) < 1e-14);
    CHECK(rel_err(r.lower, q) < 1e-12);
    CHECK(rel_err(r.upper, q) < 1e-12);
    CHECK(r.inside);

    const auto zero = simplified_energy_bracket(GridFunction(g, 1.0), GridFunction(g, 0.0), fam,
                                                ExponentPair(2.0, 2.0), cal);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == 0.0);
    CHECK(zero.Q_value == 0.0);
  }

  TEST_CASE("pseudo case bracket holds for affine u") {
    auto g = square(32);
    const auto fam = NormFamily::weighted_s(3.0, {1.0, 1.0});
    const ExponentPair ep(3.0, 3.0);
    const auto cal = CalibrationTable::load(default_calibration_path());
    const auto psi = inner_bump(g);
    for (double slope : {0.0, 0.5, -0.8}) {
      const auto u = GridFunction::from_function(g, [slope](const double* x) {
        return 1.0 + slope * (x[0] - 0.5) + 0.3 * slope * (x[1] - 0.5);
      });
      const auto r = simplified_energy_bracket(u, psi, fam, ep, cal);
      CHECK(r.regime == "p=s");
      CHECK(r.inside);
      CHECK(r.lower <= r.Q_value);
      CHECK(r.Q_value <= r.upper);
    }
  }

  TEST_CASE("bracket argument checks") {
    auto g = square(16);
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const auto cal = CalibrationTable::load(default_calibration_path());
    GridFunction u(g, 1.0);
    u[g->index(5, 5)] = 0.0;
    CHECK_THROWS_AS(simplified_energy_bracket(u, inner_bump(g), fam, ExponentPair(2.0, 2.0), cal),
                    ArgumentError);
    GridFunction neg = inner_bump(g);
    neg[g->index(8, 8)] = -1.0;
    CHECK_THROWS_AS(simplified_energy_bracket(GridFunction(g, 1.0), neg, fam, ExponentPair(2.0, 2.0), cal),
                    ArgumentError);
  }
}
