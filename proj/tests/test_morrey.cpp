#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "finsler/errors.hpp"
#include "finsler/morrey.hpp"
#include "test_util.hpp"

using namespace finsler;
using finsler::test::rel_err;

namespace {

// Brute-force sup over the same center/radius lattice, one ball at a time.
double brute_force(const GridFunction& f, const MorreySpec& spec, const MorreyLattice& lat,
                   double diameter) {
  const GridDomain& g = f.grid();
  const double h = g.h(), n = static_cast<double>(g.dim());
  const double qp = spec.q / (spec.q - 1.0);
  double best = 0.0;
  for (std::size_t c : g.mask_nodes()) {
    const auto cc = g.unravel(c);
    if (cc[0] % lat.center_stride != 0 || cc[1] % lat.center_stride != 0) continue;
    for (std::size_t k = 0;; ++k) {
      const double r = 2.0 * h * std::pow(2.0, static_cast<double>(k) / static_cast<double>(lat.steps_per_octave));
      if (!(r < diameter)) break;
      double sum = 0.0;
      for (std::size_t idx : g.mask_nodes()) {
        const auto ii = g.unravel(idx);
        const double di = static_cast<double>(ii[0]) - static_cast<double>(cc[0]);
        const double dj = static_cast<double>(ii[1]) - static_cast<double>(cc[1]);
        if (di * di + dj * dj < (r / h) * (r / h)) sum += std::abs(f[idx]);
      }
      best = std::max(best, std::pow(r, -n / qp) * sum * g.cell_volume());
    }
  }
  return best;
}

GridPtr square(std::size_t cells) {
  return std::make_shared<const GridDomain>(GridDomain::unit_box(2, cells));
}

}  // namespace

TEST_SUITE("morrey") {
  TEST_CASE("zero function") {
    auto g = square(16);
    const MorreySpec spec{1.5, 3.0};
    CHECK(morrey_norm(GridFunction(g, 0.0), spec).value == 0.0);
  }

  TEST_CASE("constant function matches the brute-force lattice sup") {
    auto g = square(24);
    const MorreySpec spec{1.5, 3.0};
    const auto r = morrey_norm(GridFunction(g, 1.0), spec);
    CHECK(rel_err(r.value, brute_force(GridFunction(g, 1.0), spec, MorreyLattice{}, r.diameter)) < 1e-13);
    // r^(n/q) growth of the ball area wins over the weight until the ball leaves the square.
    CHECK(r.best_radius > 0.25 * r.diameter);
  }

  TEST_CASE("random function matches the brute-force lattice sup") {
    auto g = square(20);
    Rng rng(51);
    GridFunction f(g);
    for (std::size_t idx : g->mask_nodes()) f[idx] = rng.uniform(-1.0, 1.0);
    const MorreySpec spec{1.2, 4.0};
    for (std::size_t level = 0; level < 3; ++level) {
      const auto lat = MorreyLattice::refined(level);
      const auto r = morrey_norm(f, spec, lat);
      CHECK(rel_err(r.value, brute_force(f, spec, lat, r.diameter)) < 1e-12);
    }
  }

  TEST_CASE("refining the lattice never decreases the norm") {
    auto g = square(64);
    Rng rng(52);
    for (int trial = 0; trial < 3; ++trial) {
      GridFunction f(g);
      for (std::size_t idx : g->mask_nodes()) f[idx] = std::pow(rng.uniform(), 4.0) * 10.0;
      for (const MorreySpec spec : {MorreySpec{1.5, 3.0}, MorreySpec{2.0, 3.0}}) {
        double prev = 0.0;
        for (std::size_t level = 0; level < 4; ++level) {
          const double v = morrey_norm(f, spec, MorreyLattice::refined(level)).value;
          CHECK(v >= prev);
          prev = v;
        }
      }
    }
  }

  TEST_CASE("parameter ranges") {
    CHECK_THROWS_AS(validate(MorreySpec{1.5, 1.2}, 2), ConfigurationError);
    CHECK_NOTHROW(validate(MorreySpec{1.5, 1.5}, 2));
    CHECK_THROWS_AS(validate(MorreySpec{2.0, 2.0}, 2), ConfigurationError);
    CHECK_NOTHROW(validate(MorreySpec{2.0, 2.5}, 2));
    CHECK_THROWS_AS(validate(MorreySpec{3.0, 2.0}, 2), ConfigurationError);
    CHECK_NOTHROW(validate(MorreySpec{3.0, 1.0}, 2));
    CHECK_THROWS_AS(validate(MorreySpec{2.0, 3.0, MorreyVariant::EnhancedTilde, 0.5}, 2), ConfigurationError);
    CHECK_NOTHROW(validate(MorreySpec{2.0, 3.0, MorreyVariant::EnhancedTilde, 1.5}, 2));
    CHECK_THROWS_AS(validate(MorreySpec{3.0, 1.0, MorreyVariant::EnhancedHat, 0.0, 1.0}, 2), ConfigurationError);
    CHECK_NOTHROW(validate(MorreySpec{3.0, 1.0, MorreyVariant::EnhancedHat, 0.0, 2.5}, 2));
    CHECK_THROWS_AS(morrey_variant_from_string("bogus"), ConfigurationError);
  }

  TEST_CASE("shell mass of the membership example grows logarithmically") {
    const double q = 3.0;
    auto f = [q](const double* x) { return std::pow(std::hypot(x[0], x[1]), -2.0 / q); };
    double prev = 0.0;
    for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
      const double m = lq_shell_mass(f, 2, q, eps, 0.5);
      CHECK(rel_err(m, 2.0 * std::numbers::pi * std::log(0.5 / eps)) < 1e-9);
      CHECK(m > prev);
      prev = m;
    }
  }

  TEST_CASE("Morrey norm of the membership example stabilizes") {
    auto g = square(128);
    const double q = 3.0;
    // Singularity at a cell center so no node sits on it.
    const double c = 0.5 + 0.5 * g->h();
    const auto f = GridFunction::from_function(g, [&](const double* x) {
      return std::pow(std::hypot(x[0] - c, x[1] - c), -2.0 / q);
    });
    const MorreySpec spec{1.5, q};
    const double v2 = morrey_norm(f, spec, MorreyLattice::refined(2)).value;
    const double v3 = morrey_norm(f, spec, MorreyLattice::refined(3)).value;
    CHECK(v3 >= v2);
    CHECK(rel_err(v3, v2) < 0.01);
  }
}
