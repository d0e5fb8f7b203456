#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/bregman.hpp"
#include "finsler/grid.hpp"
#include "finsler/morrey.hpp"
#include "finsler/norms.hpp"
#include "finsler/variational.hpp"

namespace finsler {

using Json = nlohmann::json;

/// The experiment schema compiled into the library.
const Json& experiment_schema();
const std::string& experiment_schema_text();

/// Validates `doc` against the schema and fills in every default.
/// Throws ConfigurationError naming the offending key.
Json normalize_config(const Json& doc);

/// Reads, parses and normalizes a config file.
Json load_config(const std::string& path);

/// Sets a dotted key ("solver.tol") from command-line text: JSON if it
/// parses, a plain string otherwise.
void set_config_value(Json& doc, const std::string& dotted_key, const std::string& text);

// Typed views of a normalized config. All throw ConfigurationError on
// inconsistent combinations.
ExponentPair config_exponents(const Json& cfg);
NormFamily config_family(const Json& cfg);
GridPtr config_grid(const Json& cfg);
SolverConfig config_solver(const Json& cfg);
SamplerConfig config_sampler(const Json& cfg);
MorreySpec config_morrey(const Json& cfg);

/// Center of the configured domain (origin for balls, cube center for boxes).
std::vector<double> domain_center(const Json& cfg);

GridFunction config_potential(const Json& cfg, const GridPtr& grid);
GridFunction config_weight(const Json& cfg, const GridPtr& grid);
GridFunction config_obstacle(const Json& cfg, const GridPtr& grid);
std::vector<std::vector<std::uint8_t>> config_compacts(const Json& cfg, const GridDomain& grid);
std::vector<std::vector<std::uint8_t>> config_exhaustion(const Json& cfg, const GridDomain& grid);

/// Calibration table named by the config, or the shipped one.
CalibrationTable config_calibration(const Json& cfg);

}  // namespace finsler
