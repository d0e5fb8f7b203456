#include "finsler/config.hpp"

#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/io.hpp"
#include "finsler/schema_embed.hpp"

namespace finsler {

namespace {

std::string where(const std::string& path) { return path.empty() ? "config" : path; }

bool type_matches(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

// Validates v in place against the schema node s and fills defaults of
// object properties. Covers the keywords the shipped schema uses.
void walk(Json& v, const Json& s, const std::string& path) {
  if (s.contains("type")) {
    const std::string type = s["type"].get<std::string>();
    if (!type_matches(v, type)) {
      throw ConfigurationError(where(path) + ": expected " + type + ", got " + v.dump());
    }
    if (type == "integer" && v.is_number_float()) v = static_cast<std::int64_t>(v.get<double>());
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) throw ConfigurationError(where(path) + ": " + v.dump() + " is not an allowed value");
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigurationError(where(path) + ": must be finite");
    if (s.contains("minimum") && d < s["minimum"].get<double>()) {
      throw ConfigurationError(where(path) + ": must be >= " + s["minimum"].dump());
    }
    if (s.contains("maximum") && d > s["maximum"].get<double>()) {
      throw ConfigurationError(where(path) + ": must be <= " + s["maximum"].dump());
    }
    if (s.contains("exclusiveMinimum") && !(d > s["exclusiveMinimum"].get<double>())) {
      throw ConfigurationError(where(path) + ": must be > " + s["exclusiveMinimum"].dump());
    }
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>()) {
    throw ConfigurationError(where(path) + ": string too short");
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
      throw ConfigurationError(where(path) + ": needs at least " + s["minItems"].dump() + " items");
    }
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) {
      throw ConfigurationError(where(path) + ": allows at most " + s["maxItems"].dump() + " items");
    }
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        walk(v[i], s["items"], path + "[" + std::to_string(i) + "]");
      }
    }
  }
  if (v.is_object()) {
    const Json empty = Json::object();
    const Json& props = s.contains("properties") ? s["properties"] : empty;
    if (s.contains("required")) {
      for (const auto& r : s["required"]) {
        if (!v.contains(r.get<std::string>())) {
          throw ConfigurationError(where(path) + ": missing required key '" +
                                   r.get<std::string>() + "'");
        }
      }
    }
    if (s.value("additionalProperties", true) == false) {
      for (const auto& item : v.items()) {
        if (!props.contains(item.key())) {
          throw ConfigurationError(where(path) + ": unknown key '" + item.key() + "'");
        }
      }
    }
    for (const auto& item : props.items()) {
      const std::string sub = path.empty() ? item.key() : path + "." + item.key();
      if (!v.contains(item.key())) {
        if (!item.value().contains("default")) continue;
        v[item.key()] = item.value()["default"];
      }
      walk(v[item.key()], item.value(), sub);
    }
  }
}

std::size_t config_n(const Json& cfg) { return cfg.at("n").get<std::size_t>(); }

std::vector<double> weights_or_ones(const Json& cfg) {
  const std::size_t n = config_n(cfg);
  const Json& norm = cfg.at("norm");
  if (!norm.contains("a")) return std::vector<double>(n, 1.0);
  auto a = norm["a"].get<std::vector<double>>();
  if (a.size() != n) throw ConfigurationError("norm.a needs n = " + std::to_string(n) + " weights");
  return a;
}

Eigen::MatrixXd matrix_or_identity(const Json& cfg) {
  const std::size_t n = config_n(cfg);
  const Json& norm = cfg.at("norm");
  if (!norm.contains("A")) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const Json& rows = norm["A"];
  if (rows.size() != n) throw ConfigurationError("norm.A needs n rows");
  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw ConfigurationError("norm.A needs n columns per row");
    for (std::size_t j = 0; j < n; ++j) A(i, j) = rows[i][j].get<double>();
  }
  return A;
}

double dist_to(const double* x, const std::vector<double>& c, std::size_t n) {
  double r2 = 0.0;
  for (std::size_t a = 0; a < n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
  return std::sqrt(r2);
}

double maxdist_to(const double* x, const std::vector<double>& c, std::size_t n) {
  double m = 0.0;
  for (std::size_t a = 0; a < n; ++a) m = std::max(m, std::abs(x[a] - c[a]));
  return m;
}

}  // namespace

const std::string& experiment_schema_text() {
  static const std::string text = kExperimentSchema;
  return text;
}

const Json& experiment_schema() {
  static const Json schema = Json::parse(experiment_schema_text());
  return schema;
}

Json normalize_config(const Json& doc) {
  Json v = doc;
  walk(v, experiment_schema(), "");
  return v;
}

Json load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigurationError("cannot read config " + path + ": " + e.what());
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigurationError("malformed JSON in " + path + ": " + e.what());
  }
  return normalize_config(doc);
}

void set_config_value(Json& doc, const std::string& dotted_key, const std::string& text) {
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot - start);
    if (part.empty()) throw ConfigurationError("bad config key: " + dotted_key);
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExponentPair config_exponents(const Json& cfg) {
  const Json& e = cfg.at("exponents");
  const double p = e.at("p").get<double>();
  double s = e.at("s").get<double>();
  if (cfg.at("norm").at("kind") == "matrix") s = 2.0;
  return ExponentPair(p, s);
}

NormFamily config_family(const Json& cfg) {
  const std::string kind = cfg.at("norm").at("kind").get<std::string>();
  const double s = cfg.at("exponents").at("s").get<double>();
  if (kind == "weighted_s") return NormFamily::weighted_s(s, weights_or_ones(cfg));
  if (kind == "matrix") return NormFamily::matrix(matrix_or_identity(cfg));
  return NormFamily::combined(s, weights_or_ones(cfg), matrix_or_identity(cfg));
}

GridPtr config_grid(const Json& cfg) {
  const std::size_t n = config_n(cfg);
  if (n > 3) throw ConfigurationError("grid problems need n <= 3");
  const Json& g = cfg.at("grid");
  const std::string domain = g.at("domain").get<std::string>();
  const std::size_t cells = g.at("cells").get<std::size_t>();
  if (domain == "box") return std::make_shared<const GridDomain>(GridDomain::unit_box(n, cells));
  const double h = 1.0 / static_cast<double>(cells);
  const double rin = domain == "annulus" ? g.at("inner_radius").get<double>() : -1.0;
  if (domain == "annulus" && !(rin < 1.0)) throw ConfigurationError("annulus needs inner_radius < 1");
  return std::make_shared<const GridDomain>(
      GridDomain::from_predicate(n, 2 * cells, h, -1.0, [n, rin](const double* x) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < n; ++a) r2 += x[a] * x[a];
        const double r = std::sqrt(r2);
        return r < 1.0 - 1e-12 && r > rin + 1e-12;
      }));
}

SolverConfig config_solver(const Json& cfg) {
  const Json& s = cfg.at("solver");
  SolverConfig c;
  c.tol = s.at("tol").get<double>();
  c.stationarity_tol = s.at("stationarity_tol").get<double>();
  c.max_iter = s.at("max_iter").get<std::size_t>();
  c.patience = s.at("patience").get<std::size_t>();
  c.armijo_c = s.at("armijo_c").get<double>();
  c.shrink = s.at("shrink").get<double>();
  c.max_backtracks = s.at("max_backtracks").get<std::size_t>();
  c.restarts = s.at("restarts").get<std::size_t>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  return c;
}

SamplerConfig config_sampler(const Json& cfg) {
  const Json& s = cfg.at("sampler");
  SamplerConfig c;
  c.log10_min = s.at("log10_min").get<double>();
  c.log10_max = s.at("log10_max").get<double>();
  if (!(c.log10_min < c.log10_max)) throw ConfigurationError("sampler needs log10_min < log10_max");
  c.partitions = s.at("partitions").get<std::size_t>();
  c.threads = cfg.at("threads").get<unsigned>();
  c.max_violations = s.at("max_violations").get<std::size_t>();
  return c;
}

MorreySpec config_morrey(const Json& cfg) {
  const Json& m = cfg.at("morrey");
  MorreySpec spec;
  spec.p = m.at("p").get<double>();
  spec.q = m.at("q").get<double>();
  spec.variant = morrey_variant_from_string(m.at("variant").get<std::string>());
  spec.theta = m.at("theta").get<double>();
  spec.vartheta = m.at("vartheta").get<double>();
  validate(spec, config_n(cfg));
  return spec;
}

std::vector<double> domain_center(const Json& cfg) {
  const double c = cfg.at("grid").at("domain") == "box" ? 0.5 : 0.0;
  return std::vector<double>(config_n(cfg), c);
}

GridFunction config_potential(const Json& cfg, const GridPtr& grid) {
  return GridFunction(grid, cfg.at("potential").at("constant").get<double>());
}

GridFunction config_weight(const Json& cfg, const GridPtr& grid) {
  const Json& w = cfg.at("weight");
  const std::string kind = w.at("kind").get<std::string>();
  const double value = w.at("value").get<double>();
  const std::size_t n = grid->dim();
  const auto c = domain_center(cfg);
  if (kind == "constant") return GridFunction(grid, value);
  if (kind == "ball_indicator") {
    const double r = w.at("radius").get<double>();
    return GridFunction::from_function(grid, [&](const double* x) {
      return dist_to(x, c, n) < r ? value : 0.0;
    });
  }
  const double h = grid->h();
  const double origin = w.at("origin_cell_average").get<double>() / (h * h);
  return GridFunction::from_function(grid, [&](const double* x) {
    const double r = dist_to(x, c, n);
    return value * (r < 1e-3 * h ? origin : 1.0 / (r * r));
  });
}

GridFunction config_obstacle(const Json& cfg, const GridPtr& grid) {
  return GridFunction(grid, cfg.at("obstacle").at("value").get<double>());
}

std::vector<std::vector<std::uint8_t>> config_compacts(const Json& cfg, const GridDomain& grid) {
  const Json& k = cfg.at("compacts");
  const bool ball = k.at("shape") == "ball";
  const auto c = domain_center(cfg);
  const std::size_t n = grid.dim();
  std::vector<std::vector<std::uint8_t>> out;
  double x[3];
  for (double r : k.at("radii").get<std::vector<double>>()) {
    std::vector<std::uint8_t> K(grid.size(), 0);
    for (std::size_t idx : grid.mask_nodes()) {
      grid.coords(idx, x);
      const double d = ball ? dist_to(x, c, n) : maxdist_to(x, c, n);
      K[idx] = d <= r + 1e-12;
    }
    out.push_back(std::move(K));
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> config_exhaustion(const Json& cfg, const GridDomain& grid) {
  const auto c = domain_center(cfg);
  const std::size_t n = grid.dim();
  std::vector<std::vector<std::uint8_t>> out;
  double x[3];
  for (double r : cfg.at("exhaustion").at("radii").get<std::vector<double>>()) {
    std::vector<std::uint8_t> w(grid.size(), 0);
    for (std::size_t idx : grid.mask_nodes()) {
      grid.coords(idx, x);
      w[idx] = dist_to(x, c, n) < r;
    }
    out.push_back(std::move(w));
  }
  return out;
}

CalibrationTable config_calibration(const Json& cfg) {
  std::string path = cfg.at("calibration").at("path").get<std::string>();
  if (path.empty()) path = default_calibration_path();
  return CalibrationTable::load(path);
}

}  // namespace finsler
