#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "finsler/energy.hpp"
#include "finsler/errors.hpp"
#include "finsler/variational.hpp"
#include "radial_shooting.hpp"
#include "test_util.hpp"

using namespace finsler;
using finsler::test::rel_err;
using std::numbers::pi;

namespace {

const NormFamily kEuclid2 = NormFamily::weighted_s(2.0, {1.0, 1.0});

GridPtr square(std::size_t cells) {
  return std::make_shared<const GridDomain>(GridDomain::unit_box(2, cells));
}

GridPtr disk(std::size_t cells, double R = 1.0) {
  return std::make_shared<const GridDomain>(GridDomain::from_predicate(
      2, 2 * cells, 1.0 / static_cast<double>(cells), -1.0,
      [R](const double* x) { return x[0] * x[0] + x[1] * x[1] < R * R - 1e-12; }));
}

std::vector<std::uint8_t> disk_set(const GridDomain& g, double r) {
  std::vector<std::uint8_t> K(g.size(), 0);
  double x[3];
  for (std::size_t idx : g.mask_nodes()) {
    g.coords(idx, x);
    K[idx] = x[0] * x[0] + x[1] * x[1] <= r * r + 1e-12;
  }
  return K;
}

std::vector<std::uint8_t> centered_square(const GridDomain& g, double half) {
  std::vector<std::uint8_t> K(g.size(), 0);
  double x[3];
  for (std::size_t idx : g.mask_nodes()) {
    g.coords(idx, x);
    K[idx] = std::abs(x[0] - 0.5) <= half + 1e-12 && std::abs(x[1] - 0.5) <= half + 1e-12;
  }
  return K;
}

HardyProblem unit_square_hardy(std::size_t cells, double gval = 1.0, double V = 0.0) {
  auto g = square(cells);
  return HardyProblem{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, V), GridFunction(g, gval)};
}

SolveResult condenser(std::size_t cells, double r, double R, double alpha, std::size_t restarts = 1) {
  auto g = disk(cells, R);
  SolverConfig cfg;
  cfg.restarts = restarts;
  return capacity(CapacityProblem{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0),
                                  disk_set(*g, r), GridFunction(g, alpha)},
                  cfg);
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("unit square Hardy constant is the principal eigenvalue") {
    const auto r = hardy_constant(unit_square_hardy(128), SolverConfig{});
    CHECK(r.converged);
    CHECK(rel_err(r.value, 2.0 * pi * pi) < 0.02);
    CHECK(nonincreasing(r.history));
  }

  TEST_CASE("doubling g halves the Hardy constant") {
    SolverConfig cfg;
    const auto a = hardy_constant(unit_square_hardy(32, 1.0), cfg);
    const auto b = hardy_constant(unit_square_hardy(32, 2.0), cfg);
    CHECK(rel_err(b.value, 0.5 * a.value) < 1e-7);
  }

  TEST_CASE("adding a constant to V shifts the Hardy constant") {
    SolverConfig cfg;
    const auto a = hardy_constant(unit_square_hardy(32, 1.0, 0.0), cfg);
    const auto b = hardy_constant(unit_square_hardy(32, 1.0, 5.0), cfg);
    CHECK(rel_err(b.value, a.value + 5.0) < 1e-7);
  }

  TEST_CASE("computed Hardy constants bound random test functions") {
    for (double p : {2.0, 3.0}) {
      auto g = square(24);
      const auto fam = NormFamily::weighted_s(3.0, {1.0, 2.0});
      const ExponentPair ep(p, 3.0);
      const auto w = GridFunction::from_function(g, [](const double* x) { return 1.0 + x[0]; });
      const HardyProblem prob{g, fam, ep, GridFunction(g, 0.0), w};
      SolverConfig cfg;
      const auto r = hardy_constant(prob, cfg);
      CHECK(r.converged);
      CHECK(nonincreasing(r.history));
      EnergyFunctional Q(g, fam, ep, GridFunction(g, 0.0));
      Rng rng(61);
      for (int k = 0; k < 100; ++k) {
        std::vector<double> phi(g->size(), 0.0);
        for (std::size_t idx : g->mask_nodes()) phi[idx] = rng.uniform(-1.0, 1.0) + (k % 2 ? 1.0 : 0.0);
        const double q = Q.value(phi);
        CHECK(r.value * Q.weighted_mass(w.values(), phi) <= q * (1.0 + cfg.tol));
      }
      CHECK(r.value * Q.weighted_mass(w.values(), r.minimizer.values()) <=
            Q.value(r.minimizer.values()) * (1.0 + cfg.tol));
    }
  }

  TEST_CASE("degenerate weights") {
    auto g = square(16);
    HardyProblem zero{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), GridFunction(g, 0.0)};
    CHECK_THROWS_AS(hardy_constant(zero, SolverConfig{}), SetupError);

    // Weight only on the boundary frame, where test functions vanish.
    GridFunction frame(g, 0.0);
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
      if (!g->in_mask(idx)) frame[idx] = 1.0;
    }
    HardyProblem off{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), frame};
    const auto r = hardy_constant(off, SolverConfig{});
    CHECK(r.infinite);
    CHECK(std::isinf(r.value));
  }

  TEST_CASE("negative potentials are reported as supercritical") {
    const auto r = hardy_constant(unit_square_hardy(16, 1.0, -100.0), SolverConfig{});
    CHECK(r.supercritical);
    CHECK_FALSE(r.converged);
  }

  TEST_CASE("condenser capacity") {
    const auto r = condenser(64, 0.25, 1.0, 1.0);
    CHECK(r.converged);
    CHECK(nonincreasing(r.history));
    CHECK(rel_err(r.value, 2.0 * pi / std::log(4.0)) < 0.03);
  }

  TEST_CASE("capacity scaling law") {
    SolverConfig cfg;
    const auto base = condenser(32, 0.25, 1.0, 1.0);
    for (double alpha : {0.5, 2.0, 3.0}) {
      const auto r = condenser(32, 0.25, 1.0, alpha);
      CHECK(rel_err(r.value, alpha * alpha * base.value) <= 2.0 * cfg.tol);
    }
  }

  TEST_CASE("capacity is monotone in K and antimonotone in the domain") {
    SolverConfig cfg;
    const double small = condenser(32, 0.15, 1.0, 1.0).value;
    const double large = condenser(32, 0.25, 1.0, 1.0).value;
    CHECK(small <= large * (1.0 + cfg.tol));
    const double inner = condenser(32, 0.25, 0.75, 1.0).value;
    CHECK(large <= inner * (1.0 + cfg.tol));
  }

  TEST_CASE("Maz'ya ratio with g = 0 and argument checks") {
    auto g = square(16);
    HardyProblem prob{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), GridFunction(g, 0.0)};
    const auto r = mazya_ratio(prob, GridFunction(g, 1.0), {centered_square(*g, 0.2)}, SolverConfig{}, 12.0);
    CHECK(r.norm_u == 0.0);
    CHECK(r.upper_ok);
    CHECK_THROWS_AS(mazya_ratio(prob, GridFunction(g, 1.0), {}, SolverConfig{}, 12.0), ArgumentError);
  }

  TEST_CASE("Maz'ya ratio lies inside its bracket") {
    auto g = square(24);
    const auto w = GridFunction::from_function(g, [](const double* x) { return 1.0 + 0.5 * x[0] * x[1]; });
    HardyProblem prob{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), w};
    std::vector<std::vector<std::uint8_t>> compacts;
    for (double half : {0.1, 0.2, 0.3}) compacts.push_back(centered_square(*g, half));
    const auto r = mazya_ratio(prob, GridFunction(g, 1.0), compacts, SolverConfig{}, 12.0);
    CHECK(r.hardy.converged);
    CHECK(r.norm_u > 0.0);
    CHECK(r.upper_ok);
    CHECK(r.lower_ok);
  }

  TEST_CASE("tail constants") {
    auto g = square(24);
    // g supported deep inside the first exhaustion set.
    const auto inner = centered_square(*g, 0.1);
    GridFunction w(g, 0.0);
    for (std::size_t idx = 0; idx < g->size(); ++idx) w[idx] = inner[idx] ? 1.0 : 0.0;
    HardyProblem prob{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), w};
    const auto tail = hardy_tail_constant(prob, {centered_square(*g, 0.2), centered_square(*g, 0.3)}, SolverConfig{});
    REQUIRE(tail.size() == 2);
    CHECK(tail[0].infinite);
    CHECK(tail[1].infinite);

    // A single exhaustion set reproduces a plain solve on its collar.
    HardyProblem ones{g, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(g, 0.0), GridFunction(g, 1.0)};
    const auto omega = centered_square(*g, 0.2);
    const auto one = hardy_tail_constant(ones, {omega}, SolverConfig{});
    std::vector<std::uint8_t> collar(g->size(), 0);
    for (std::size_t idx : g->mask_nodes()) collar[idx] = omega[idx] ? 0 : 1;
    auto sub = std::make_shared<const GridDomain>(g->with_mask(collar));
    const auto direct = hardy_constant(
        HardyProblem{sub, kEuclid2, ExponentPair(2.0, 2.0), GridFunction(sub, 0.0), GridFunction(sub, 1.0)},
        SolverConfig{});
    CHECK(rel_err(one[0].value, direct.value) < 1e-7);

    // A set touching the frame splits off a corner of the collar.
    std::vector<std::uint8_t> cut(g->size(), 0);
    double x[3];
    for (std::size_t idx : g->mask_nodes()) {
      g->coords(idx, x);
      cut[idx] = std::abs(x[0] - x[1]) < 0.1;
    }
    CHECK_THROWS_AS(hardy_tail_constant(ones, {cut}, SolverConfig{}), ArgumentError);
  }

  TEST_CASE("attainment of the principal eigenfunction") {
    const auto prob = unit_square_hardy(32);
    SolverConfig cfg;
    const auto rep = attainment_check(prob, cfg);
    CHECK(rep.sign_definite);
    CHECK(rep.min_value > 0.0);
    CHECK(rep.residual_ok);
    CHECK(rep.residual_rel <= 10.0 * cfg.tol);
    CHECK(rep.rayleigh_gap <= 1e-10 * rep.hardy.value);

    EnergyFunctional Q(prob.grid, prob.fam, prob.ep, prob.V);
    std::vector<double> phi = rep.hardy.minimizer.values(), neg = phi;
    for (double& v : neg) v = -v;
    CHECK(Q.value(neg) == Q.value(phi));
    CHECK(Q.weighted_mass(prob.g.values(), neg) == Q.weighted_mass(prob.g.values(), phi));
  }

  TEST_CASE("radial shooting oracle matches its closed form") {
    for (double eps : {0.1, 0.25, 0.5}) {
      const double L = std::log(1.0 / eps);
      const double closed = 0.25 + (pi / L) * (pi / L);
      CHECK(rel_err(test::radial_hardy_eigenvalue(eps), closed) < 1e-9);
    }
  }

  TEST_CASE("annulus Hardy constant approaches the radial oracle") {
    const double eps = 0.25;
    const double oracle = test::radial_hardy_eigenvalue(eps);
    double prev_err = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (std::size_t cells : {16, 24, 32}) {
      auto g = std::make_shared<const GridDomain>(GridDomain::from_predicate(
          3, 2 * cells, 1.0 / static_cast<double>(cells), -1.0, [eps](const double* x) {
            const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            return r2 > eps * eps + 1e-12 && r2 < 1.0 - 1e-12;
          }));
      // The origin lies in the hole, off the mask.
      const auto w = GridFunction::from_function(g, [](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return r2 > 0.0 ? 1.0 / r2 : 0.0;
      });
      SolverConfig cfg;
      cfg.restarts = 1;
      const auto r = hardy_constant(HardyProblem{g, NormFamily::weighted_s(2.0, {1.0, 1.0, 1.0}),
                                                 ExponentPair(2.0, 2.0), GridFunction(g, 0.0), w},
                                    cfg);
      CHECK(r.converged);
      const double err = std::abs(r.value - oracle) / oracle;
      CHECK(err < prev_err);
      prev_err = err;
      last = r.value;
    }
    CHECK(rel_err(last, oracle) < 0.10);
  }
}
