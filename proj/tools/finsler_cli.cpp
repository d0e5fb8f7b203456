// finsler: config-driven runner for the norm, Bregman, energy and
// variational computations. Results land in --out as JSON and CSV.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/commands.hpp"
#include "finsler/config.hpp"
#include "finsler/errors.hpp"
#include "finsler/io.hpp"

namespace fs = std::filesystem;
using finsler::Json;

namespace {

// Flags shared by every subcommand. Each maps to a config key and wins over
// the config file.
struct Flags {
  std::string config;
  std::map<std::string, std::string> values;  // dotted key -> text
  std::vector<std::string> sets;              // KEY=VALUE
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config,-c", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  struct Opt {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Opt opts[] = {
      {"--seed", "seed", "base seed"},
      {"--out", "out", "output directory"},
      {"--threads", "threads", "worker threads for sampling"},
      {"--n", "n", "space dimension"},
      {"--p", "exponents.p", "exponent p"},
      {"--s", "exponents.s", "exponent s of the weighted norm"},
      {"--norm", "norm.kind", "weighted_s, matrix or combined"},
      {"--weights", "norm.a", "weights as a JSON array"},
      {"--matrix", "norm.A", "matrix as a JSON array of rows"},
      {"--domain", "grid.domain", "box, ball or annulus"},
      {"--cells", "grid.cells", "cells per unit length"},
      {"--inner-radius", "grid.inner_radius", "annulus inner radius"},
      {"--potential", "potential.constant", "constant potential V"},
      {"--weight", "weight.kind", "Hardy weight: constant, inverse_square, ball_indicator"},
      {"--weight-value", "weight.value", "Hardy weight scale"},
      {"--obstacle", "obstacle.value", "constant obstacle u"},
      {"--radii", "compacts.radii", "compact radii as a JSON array"},
      {"--exhaustion", "exhaustion.radii", "exhaustion radii as a JSON array"},
      {"--lemma", "sampler.lemma", "lemma id or all"},
      {"--samples", "sampler.N", "sample count"},
      {"--tol", "solver.tol", "relative objective tolerance"},
      {"--max-iter", "solver.max_iter", "iteration cap"},
      {"--restarts", "solver.restarts", "seeded restarts"},
      {"--calibration", "calibration.path", "calibration file"},
      {"--criteria", "acceptance.criteria", "acceptance criteria, e.g. 1,4,6"},
  };
  for (const auto& o : opts) {
    const std::string key = o.key;
    sub->add_option_function<std::string>(
        o.flag, [&f, key](const std::string& v) { f.values[key] = v; }, o.help);
  }
  sub->add_option("--set", f.sets, "override any config key: KEY=VALUE")->take_all();
}

Json build_config(const std::string& command, const Flags& f) {
  Json doc = Json::object();
  if (!f.config.empty()) {
    std::string text;
    try {
      text = finsler::read_file(f.config);
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw finsler::ConfigurationError("malformed JSON in " + f.config + ": " + e.what());
    } catch (const std::exception& e) {
      throw finsler::ConfigurationError("cannot read config " + f.config + ": " + e.what());
    }
    if (!doc.is_object()) throw finsler::ConfigurationError("config must be a JSON object");
  }
  if (command != "run") {
    if (doc.contains("command") && doc["command"] != command) {
      throw finsler::ConfigurationError("config command '" + doc["command"].dump() +
                                        "' does not match subcommand '" + command + "'");
    }
    doc["command"] = command;
  }
  for (const auto& [key, text] : f.values) {
    if (key == "acceptance.criteria" && !text.empty() && text.front() != '[') {
      finsler::set_config_value(doc, key, "[" + text + "]");
    } else {
      finsler::set_config_value(doc, key, text);
    }
  }
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw finsler::ConfigurationError("--set needs KEY=VALUE: " + kv);
    finsler::set_config_value(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return finsler::normalize_config(doc);
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const auto p = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return p.string();
  return fs::absolute(argv0).string();
}

int execute(const std::string& command, const Flags& f, const char* argv0) {
  const Json cfg = build_config(command, f);
  const auto res = finsler::run_command(cfg, self_path(argv0));
  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);
  for (const auto& file : res.files) finsler::write_file_atomic((out / file.name).string(), file.content);
  for (const auto& file : res.external) {
    const fs::path p(file.name);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    finsler::write_file_atomic(file.name, file.content);
  }
  for (const auto& line : res.lines) std::cout << line << '\n';
  std::cout.flush();
  return res.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic p-energy toolkit: norms, Bregman estimates, capacities, Hardy constants"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  bool print_schema = false;
  app.add_flag("--schema", print_schema, "print the experiment schema and exit");

  static const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "run the command named in --config"},
      {"verify-norms", "structure conditions and modulus of convexity"},
      {"verify-bregman", "two-sided Bregman estimates by sampling"},
      {"calibrate", "empirical equivalence constants for the calibration file"},
      {"energy", "Q[u psi] and the simplified-energy bracket"},
      {"morrey", "Morrey norm under lattice refinement"},
      {"hardy", "Hardy constant S_g"},
      {"capacity", "capacity cap(K, u)"},
      {"mazya", "Maz'ya ratio and its bracket"},
      {"tail", "Hardy constants on the collars of an exhaustion"},
      {"attainment", "sign and residual diagnostics of the Hardy minimizer"},
      {"acceptance", "acceptance suite"},
  };
  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], flags[name]);
  }
  subs["run"]->get_option("--config")->required();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return finsler::kExitConfig;
  }
  if (print_schema) {
    std::cout << finsler::experiment_schema_text();
    return 0;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      return execute(name, flags[name], argv[0]);
    } catch (const finsler::ConfigurationError& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return finsler::kExitConfig;
    } catch (const finsler::ArgumentError& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return finsler::kExitConfig;
    } catch (const finsler::SetupError& e) {
      std::cerr << "setup error: " << e.what() << '\n';
      return finsler::kExitConfig;
    } catch (const Json::exception& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return finsler::kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return finsler::kExitAssertion;
    }
  }
  std::cerr << app.help();
  return finsler::kExitConfig;
}
