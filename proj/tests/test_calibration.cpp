#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "finsler/calibration.hpp"
#include "finsler/errors.hpp"
#include "finsler/io.hpp"
#include "test_util.hpp"

using namespace finsler;

TEST_SUITE("calibration") {
  TEST_CASE("shipped calibration rereads bit-exactly") {
    const std::string text = read_file(default_calibration_path());
    const auto table = CalibrationTable::parse(text);
    CHECK(table.size() > 0);
    CHECK(table.dump() == text);
    const auto again = CalibrationTable::parse(table.dump());
    for (const auto& [k, e] : table.entries()) {
      const auto& f = again.entries().at(k);
      CHECK(e.c_hat == f.c_hat);
      CHECK(e.C_hat == f.C_hat);
      CHECK(e.N == f.N);
      CHECK(e.seed == f.seed);
    }
  }

  TEST_CASE("shipped calibration is consistent") {
    const auto table = CalibrationTable::load(default_calibration_path());
    for (const auto& [k, e] : table.entries()) {
      CHECK(e.c_hat <= e.C_hat);
      CHECK(std::isfinite(e.C_hat));
      CHECK(e.N >= 1000000);
      CHECK(CalibrationTable::key(e.lemma, e.p, e.s, e.n) == k);
    }
    const auto hilbert = table.at("pseudo", 2.0, 2.0, 2);
    CHECK(std::abs(hilbert.c_hat - 1.0) <= 1e-12);
    CHECK(std::abs(hilbert.C_hat - 1.0) <= 1e-12);
    const auto p4 = table.at("s_lt_p_lower", 4.0, 2.0, 2);
    CHECK(p4.c_hat > 0.0);
    const auto p4u = table.at("large_xi_s_lt_p_upper", 4.0, 2.0, 2);
    CHECK(std::isfinite(p4u.C_hat));
  }

  TEST_CASE("awkward doubles survive a round trip") {
    CalibrationTable t;
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
      const double c = std::ldexp(rng.uniform(), static_cast<int>(rng.next() % 200) - 100);
      t.put(CalibrationEntry{"uniform", 1.0 + k / 7.0, 2.0, 2, c, c * (1.0 + rng.uniform()),
                             1000000, rng.next()});
    }
    t.put(CalibrationEntry{"pseudo", 2.0, 2.0, 3, std::numeric_limits<double>::denorm_min(),
                           std::numeric_limits<double>::max(), 1, 0});
    const auto u = CalibrationTable::parse(t.dump());
    REQUIRE(u.size() == t.size());
    for (const auto& [k, e] : t.entries()) {
      const auto& f = u.entries().at(k);
      CHECK(e.c_hat == f.c_hat);
      CHECK(e.C_hat == f.C_hat);
      CHECK(e.p == f.p);
      CHECK(e.seed == f.seed);
    }
    CHECK(u.dump() == t.dump());
  }

  TEST_CASE("malformed calibration files are configuration errors") {
    CHECK_THROWS_AS(CalibrationTable::parse("{"), ConfigurationError);
    CHECK_THROWS_AS(CalibrationTable::parse("[]"), ConfigurationError);
    CHECK_THROWS_AS(CalibrationTable::parse(R"({"x": {"lemma": "pseudo"}})"), ConfigurationError);
    CHECK_THROWS_AS(CalibrationTable::load("/nonexistent/calibration.json"), ConfigurationError);
    CalibrationTable t;
    CHECK_THROWS_AS(t.at("pseudo", 2.0, 2.0, 2), ConfigurationError);
    CHECK_FALSE(t.find("pseudo", 2.0, 2.0, 2).has_value());
  }

  TEST_CASE("estimate reports file under their exponents") {
    const auto fam = NormFamily::weighted_s(2.0, {1.0, 1.0});
    const auto rep = estimate_equivalence_constants(LemmaId::Pseudo, fam, ExponentPair(2.0, 2.0),
                                                    SamplerConfig{}, 5000, 8);
    CalibrationTable t;
    t.put(rep);
    const auto e = t.at("pseudo", 2.0, 2.0, 2);
    CHECK(e.c_hat == rep.c_hat);
    CHECK(e.C_hat == rep.C_hat);
    CHECK(e.N == 5000);
    CHECK(e.seed == 8);
  }
}
