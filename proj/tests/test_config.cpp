#include <doctest.h>

#include <filesystem>
#include <string>

#include "finsler/config.hpp"
#include "finsler/errors.hpp"
#include "finsler/io.hpp"

using namespace finsler;
namespace fs = std::filesystem;

TEST_SUITE("config") {
  TEST_CASE("defaults come from the schema") {
    const Json cfg = normalize_config(Json{{"command", "hardy"}});
    CHECK(cfg.at("seed") == 0);
    CHECK(cfg.at("n") == 2);
    CHECK(cfg.at("exponents").at("p") == 2.0);
    CHECK(cfg.at("solver").at("tol") == 1e-8);
    CHECK(cfg.at("solver").at("max_iter") == 50000);
    CHECK(cfg.at("solver").at("patience") == 5);
    CHECK(cfg.at("solver").at("restarts") == 3);
    CHECK(cfg.at("calibration").at("N") == 1000000);
    const auto sc = config_solver(cfg);
    CHECK(sc.armijo_c == 1e-4);
    CHECK(sc.shrink == 0.5);
  }

  TEST_CASE("invalid configs are configuration errors") {
    CHECK_THROWS_AS(normalize_config(Json{{"command", "bogus"}}), ConfigurationError);
    CHECK_THROWS_AS(normalize_config(Json{{"command", "hardy"}, {"unknown", 1}}), ConfigurationError);
    CHECK_THROWS_AS(normalize_config(Json{{"command", "hardy"}, {"seed", "x"}}), ConfigurationError);
    CHECK_THROWS_AS(normalize_config(Json{{"command", "hardy"}, {"solver", {{"tol", 0}}}}), ConfigurationError);
    CHECK_THROWS_AS(normalize_config(Json{{"command", "calibrate"}, {"calibration", {{"N", 10}}}}),
                    ConfigurationError);
    CHECK_THROWS_AS(normalize_config(Json::array()), ConfigurationError);
  }

  TEST_CASE("dotted overrides") {
    Json doc = Json::object();
    set_config_value(doc, "command", "hardy");
    set_config_value(doc, "exponents.p", "3");
    set_config_value(doc, "norm.a", "[1, 2]");
    set_config_value(doc, "grid.domain", "ball");
    CHECK(doc["exponents"]["p"] == 3);
    CHECK(doc["norm"]["a"] == Json::array({1, 2}));
    CHECK(doc["grid"]["domain"] == "ball");
    Json scratch = Json::object();
    CHECK_THROWS_AS(set_config_value(scratch, "a..b", "1"), ConfigurationError);
    const Json cfg = normalize_config(doc);
    CHECK(config_exponents(cfg).p() == 3.0);
    CHECK(config_family(cfg).weights()[1] == 2.0);
  }

  TEST_CASE("shipped example configs are valid") {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(fs::path(FINSLER_SOURCE_DIR) / "configs")) {
      if (e.path().extension() != ".json") continue;
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_config(e.path().string()));
      ++count;
    }
    CHECK(count >= 5);
  }

  TEST_CASE("builders") {
    const Json cfg = normalize_config(Json{{"command", "hardy"},
                                           {"grid", {{"domain", "ball"}, {"cells", 8}}},
                                           {"weight", {{"kind", "inverse_square"}}}});
    const auto g = config_grid(cfg);
    CHECK(g->dim() == 2);
    CHECK(g->h() == doctest::Approx(0.125));
    const auto w = config_weight(cfg, g);
    double x[3];
    for (std::size_t idx : g->mask_nodes()) {
      g->coords(idx, x);
      const double r2 = x[0] * x[0] + x[1] * x[1];
      if (r2 > 0.0) CHECK(w[idx] == doctest::Approx(1.0 / r2));
      else CHECK(w[idx] == doctest::Approx(7.6 / (g->h() * g->h())));
    }
    const Json bad = normalize_config(Json{{"command", "hardy"}, {"n", 3}, {"norm", {{"a", {1, 1}}}}});
    CHECK_THROWS_AS(config_family(bad), ConfigurationError);
  }
}
