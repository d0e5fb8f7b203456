// Acceptance runner for ctest: one criterion per invocation, one PASS/FAIL
// line on stdout. A criterion passes when its checks hold and it finishes
// within its time budget.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "finsler/acceptance.hpp"
#include "finsler/calibration.hpp"
#include "finsler/io.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int id = 0;
  std::uint64_t seed = 0;
  std::string work = FINSLER_ACCEPTANCE_WORK_DIR;
  std::string calibration = finsler::default_calibration_path();
  app.add_option("--criterion", id, "criterion number")->required()->check(CLI::Range(1, 10));
  app.add_option("--seed", seed, "base seed");
  app.add_option("--work-dir", work, "directory for tables and subprocess output");
  app.add_option("--calibration", calibration, "calibration file");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::path(work) / ("criterion_" + std::to_string(id));
  fs::remove_all(dir);
  fs::create_directories(dir);

  finsler::AcceptanceContext ctx;
  ctx.seed = seed;
  ctx.calibration = finsler::CalibrationTable::load(calibration);
  ctx.cli_path = FINSLER_CLI_PATH;
  ctx.work_dir = dir.string();

  const auto t0 = std::chrono::steady_clock::now();
  finsler::CriterionResult r;
  try {
    r = finsler::run_criterion(id, ctx);
  } catch (const std::exception& e) {
    std::printf("criterion %2d %-28s FAIL  (error: %s)\n", id, finsler::criterion_name(id).c_str(), e.what());
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = r.budget_seconds <= 0.0 || secs <= r.budget_seconds;
  const bool ok = r.passed && in_time;

  for (const auto& f : r.files) finsler::write_file_atomic((dir / f.name).string(), f.content);
  finsler::write_file_atomic((dir / "acceptance.json").string(), finsler::acceptance_summary({r}, seed));

  char budget[48] = "no time budget";
  if (r.budget_seconds > 0.0) std::snprintf(budget, sizeof budget, "budget %.0f s", r.budget_seconds);
  std::printf("criterion %2d %-28s %s  (%.1f s, %s%s)\n", id, r.name.c_str(), ok ? "PASS" : "FAIL", secs,
              budget, r.passed && !in_time ? ", over budget" : "");
  std::printf("%s\n", r.detail.dump().c_str());
  return ok ? 0 : 1;
}
