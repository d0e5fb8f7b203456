#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/norms.hpp"
#include "test_util.hpp"

using namespace finsler;
using finsler::test::rel_err;

namespace {

// Long double evaluation of (sum a_i |xi_i|^s)^(1/s), independent of the library path.
long double weighted_ref(const std::vector<long double>& xi, const std::vector<long double>& a,
                         long double s) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < xi.size(); ++i) acc += a[i] * std::pow(std::fabs(xi[i]), s);
  return std::pow(acc, 1.0L / s);
}

std::vector<NormFamily> families(std::size_t n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 2.0;
  for (std::size_t i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = 0.5;
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 0.5 + 0.25 * static_cast<double>(i);
  return {NormFamily::weighted_s(1.5, a), NormFamily::weighted_s(3.0, a), NormFamily::matrix(A),
          NormFamily::combined(3.0, a, A)};
}

ExponentPair pair_for(const NormFamily& fam, double p) {
  return ExponentPair(p, fam.kind() == NormKind::Matrix ? 2.0 : fam.s());
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double euclid(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

TEST_SUITE("norms") {
  TEST_CASE("weighted s-norm examples") {
    const std::vector<double> v1{3.0, 4.0};
    CHECK(weighted_s_norm(v1, NormFamily::weighted_s(2.0, {1.0, 1.0})) == doctest::Approx(5.0).epsilon(1e-15));

    const std::vector<double> v2{1.0, 1.0, 1.0};
    CHECK(rel_err(weighted_s_norm(v2, NormFamily::weighted_s(3.0, {1.0, 1.0, 1.0})),
                  std::cbrt(3.0)) < 1e-15);

    const std::vector<double> v3{2.0, 0.0};
    const long double ref = weighted_ref({2.0L, 0.0L}, {2.0L, 1.0L}, 3.0L);
    CHECK(rel_err(weighted_s_norm(v3, NormFamily::weighted_s(3.0, {2.0, 1.0})),
                  static_cast<double>(ref)) < 1e-15);
    CHECK(static_cast<double>(ref) == doctest::Approx(2.51984).epsilon(1e-5));
  }

  TEST_CASE("weighted s-norm rejects a dimension mismatch") {
    const std::vector<double> v{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(weighted_s_norm(v, NormFamily::weighted_s(2.0, {1.0, 1.0})), ArgumentError);
  }

  TEST_CASE("matrix norm examples") {
    const std::vector<double> e1{1.0, 0.0};
    CHECK(matrix_norm(e1, NormFamily::matrix(Eigen::MatrixXd::Identity(2, 2))) == doctest::Approx(1.0));

    Eigen::MatrixXd D(2, 2);
    D << 4.0, 0.0, 0.0, 9.0;
    const std::vector<double> ones{1.0, 1.0};
    CHECK(rel_err(matrix_norm(ones, NormFamily::matrix(D)), std::sqrt(13.0)) < 1e-15);

    Eigen::MatrixXd B(2, 2);
    B << 2.0, 1.0, 1.0, 2.0;
    CHECK(rel_err(matrix_norm(ones, NormFamily::matrix(B)), std::sqrt(6.0)) < 1e-15);
  }

  TEST_CASE("non-SPD matrices are rejected at construction") {
    Eigen::MatrixXd B(2, 2);
    B << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(NormFamily::matrix(B), ConfigurationError);
    Eigen::MatrixXd N(2, 2);
    N << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(NormFamily::matrix(N), ConfigurationError);
    CHECK_THROWS_AS(NormFamily::weighted_s(2.0, {1.0, -1.0}), ConfigurationError);
    CHECK_THROWS_AS(ExponentPair(1.0, 2.0), ConfigurationError);
  }

  TEST_CASE("combined norm examples") {
    const auto fam = NormFamily::combined(2.0, {1.0, 1.0}, Eigen::MatrixXd::Identity(2, 2));
    const ExponentPair ep(2.0, 2.0);
    const std::vector<double> zero{0.0, 0.0}, v{3.0, 4.0};
    CHECK(norm(zero, fam, ep) == 0.0);
    CHECK(rel_err(norm(v, fam, ep), std::sqrt(50.0)) < 1e-15);
  }

  TEST_CASE("Lagrangian examples") {
    const std::vector<double> zero{0.0, 0.0}, v{3.0, 4.0}, w{1.0, 2.0};
    const auto euclid2 = NormFamily::weighted_s(2.0, {1.0, 1.0});
    CHECK(lagrangian_F(zero, euclid2, ExponentPair(2.0, 2.0)) == 0.0);
    CHECK(rel_err(lagrangian_F(v, euclid2, ExponentPair(2.0, 2.0)), 12.5) < 1e-15);
    const long double ref = std::pow(9.0L, 4.0L / 3.0L) / 4.0L;
    CHECK(rel_err(lagrangian_F(w, NormFamily::weighted_s(3.0, {1.0, 1.0}), ExponentPair(4.0, 3.0)),
                  static_cast<double>(ref)) < 1e-14);
  }

  TEST_CASE("operator A examples") {
    const std::vector<double> zero{0.0, 0.0}, e1{1.0, 0.0};
    for (const auto& fam : families(2)) {
      const auto A = operator_A(zero, fam, pair_for(fam, 3.0));
      CHECK(A[0] == 0.0);
      CHECK(A[1] == 0.0);
    }
    const auto A = operator_A(e1, NormFamily::weighted_s(2.0, {1.0, 1.0}), ExponentPair(2.0, 2.0));
    CHECK(A[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(A[1] == 0.0);
  }

  TEST_CASE("zero components with s < 2 give a zero derivative") {
    const auto fam = NormFamily::weighted_s(1.5, {1.0, 1.0});
    const std::vector<double> v{1.0, 0.0};
    const auto A = operator_A(v, fam, ExponentPair(2.0, 1.5));
    CHECK(std::isfinite(A[0]));
    CHECK(A[1] == 0.0);
  }

  TEST_CASE("modulus of convexity examples") {
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const ExponentPair ep(2.0, 2.0);
    CHECK(modulus_of_convexity_estimate(fam, ep, 2.0, 100, 1) == doctest::Approx(1.0).epsilon(1e-12));
    const double analytic = 1.0 - std::sqrt(3.0) / 2.0;
    const double est = modulus_of_convexity_estimate(fam, ep, 1.0, 20000, 2);
    CHECK(est >= analytic - 1e-12);
    CHECK(est == doctest::Approx(analytic).epsilon(1e-6));
    double prev = 1.0;
    for (double eps : {0.5, 0.1, 0.01, 0.001}) {
      const double e = modulus_of_convexity_estimate(NormFamily::weighted_s(3.0, {1.0, 2.0}),
                                                     ExponentPair(2.0, 3.0), eps, 2000, 3);
      CHECK(e >= 0.0);
      CHECK(e <= prev);
      prev = e;
    }
    CHECK(prev < 1e-5);
    CHECK_THROWS_AS(modulus_of_convexity_estimate(fam, ep, 0.0, 10, 1), ArgumentError);
    CHECK_THROWS_AS(modulus_of_convexity_estimate(fam, ep, 2.5, 10, 1), ArgumentError);
  }

  TEST_CASE("absolute homogeneity and triangle inequality") {
    Rng rng(11);
    for (const auto& fam : families(3)) {
      const ExponentPair ep = pair_for(fam, 3.0);
      double worst_h = 0.0, worst_t = -1.0;
      for (int k = 0; k < 100000; ++k) {
        auto xi = test::random_vector(rng, 3);
        auto eta = test::random_vector(rng, 3);
        const double lam = rng.uniform(-10.0, 10.0);
        std::vector<double> lx(3), s(3);
        for (int i = 0; i < 3; ++i) {
          lx[i] = lam * xi[i];
          s[i] = xi[i] + eta[i];
        }
        worst_h = std::max(worst_h, rel_err(norm(lx, fam, ep), std::abs(lam) * norm(xi, fam, ep)));
        worst_t = std::max(worst_t, norm(s, fam, ep) - norm(xi, fam, ep) - norm(eta, fam, ep));
      }
      CHECK(worst_h <= 1e-12);
      CHECK(worst_t <= 1e-12);
    }
  }

  TEST_CASE("Euler identity, monotonicity and finite differences") {
    Rng rng(12);
    for (const auto& fam : families(3)) {
      for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const ExponentPair ep = pair_for(fam, p);
        double euler = 0.0, fd = 0.0, mono = 1.0;
        for (int k = 0; k < 2000; ++k) {
          auto xi = test::random_vector(rng, 3);
          for (double& v : xi) v = std::copysign(std::max(std::abs(v), 0.1), v);
          const auto A = operator_A(xi, fam, ep);
          const double F = lagrangian_F(xi, fam, ep);
          euler = std::max(euler, rel_err(dot(A, xi), p * F));

          std::vector<double> g(3), xp = xi, xm = xi;
          for (int i = 0; i < 3; ++i) {
            const double step = 1e-5 * std::abs(xi[i]);
            xp = xi;
            xm = xi;
            xp[i] += step;
            xm[i] -= step;
            const double hp = std::pow(norm(xp, fam, ep), p), hm = std::pow(norm(xm, fam, ep), p);
            g[i] = (hp - hm) / (2.0 * step);
          }
          std::vector<double> diff(3);
          for (int i = 0; i < 3; ++i) diff[i] = g[i] - p * A[i];
          fd = std::max(fd, euclid(diff) / (p * euclid(A)));

          const auto eta = test::random_vector(rng, 3);
          const auto B = operator_A(eta, fam, ep);
          std::vector<double> dA(3), dx(3);
          for (int i = 0; i < 3; ++i) {
            dA[i] = A[i] - B[i];
            dx[i] = xi[i] - eta[i];
          }
          mono = std::min(mono, dot(dA, dx) / (euclid(dA) * euclid(dx)));
        }
        CHECK(euler <= 1e-12);
        CHECK(fd <= 1e-6);
        CHECK(mono > 0.0);
      }
    }
  }

  TEST_CASE("ellipticity and boundedness constants") {
    Rng rng(13);
    for (const auto& fam : families(3)) {
      for (double p : {1.5, 2.0, 4.0}) {
        const ExponentPair ep = pair_for(fam, p);
        const auto sc = structure_constants(fam, ep);
        CHECK(sc.alpha > 0.0);
        CHECK(sc.beta >= sc.alpha);
        for (int k = 0; k < 5000; ++k) {
          const auto xi = test::random_vector(rng, 3, -5.0, 5.0);
          const auto A = operator_A(xi, fam, ep);
          const double e = euclid(xi);
          CHECK(dot(A, xi) >= sc.alpha * std::pow(e, p) * (1.0 - 1e-12));
          CHECK(euclid(A) <= sc.beta * std::pow(e, p - 1.0) * (1.0 + 1e-12));
        }
      }
    }
  }

  TEST_CASE("stable increment agrees with the direct difference") {
    Rng rng(14);
    for (const auto& fam : families(2)) {
      NormEvaluator ev(fam, pair_for(fam, 3.0));
      for (int k = 0; k < 1000; ++k) {
        const auto xi = test::random_vector(rng, 2);
        auto d = test::random_vector(rng, 2);
        std::vector<double> x1(2);
        for (int i = 0; i < 2; ++i) x1[i] = xi[i] + d[i];
        const double direct = ev.hp(x1.data()) - ev.hp(xi.data());
        CHECK(std::abs(ev.hp_increment(xi.data(), d.data()) - direct) <=
              1e-12 * std::max(ev.hp(x1.data()), ev.hp(xi.data())));
      }
    }
  }
}
