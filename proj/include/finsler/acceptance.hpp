#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/calibration.hpp"
#include "finsler/config.hpp"

namespace finsler {

struct NamedFile {
  std::string name;
  std::string content;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double budget_seconds = 0.0;
  Json detail;                   // numbers only; no timings
  std::vector<NamedFile> files;  // CSV tables
};

struct AcceptanceContext {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CalibrationTable calibration;
  /// Runner for criterion 10; empty disables it.
  std::string cli_path;
  std::string work_dir = ".";
};

/// Structure-condition checks for one family on N random points.
struct StructureReport {
  std::size_t points = 0;
  double euler_err = 0.0;        // max |A(xi).xi - H^p| / H^p
  double homogeneity_err = 0.0;  // max |A(t xi) - t^{p-1} A(xi)| / |t^{p-1} A(xi)|
  double monotone_min = 0.0;     // min (A(xi) - A(eta)).(xi - eta) / (|A(xi) - A(eta)| |xi - eta|)
  std::size_t monotone_failures = 0;
  double fd_err = 0.0;           // max |A - grad_fd F| / |A|
  std::size_t bound_failures = 0;  // kappa/nu/alpha/beta bounds
  bool passed = false;
};
StructureReport verify_structure(const NormFamily& fam, const ExponentPair& ep, std::size_t N,
                                 std::uint64_t seed);

std::vector<int> all_criteria();
std::string criterion_name(int id);
double criterion_budget(int id);

CriterionResult run_criterion(int id, const AcceptanceContext& ctx);

/// acceptance.json for a set of results.
std::string acceptance_summary(const std::vector<CriterionResult>& results, std::uint64_t seed);

}  // namespace finsler
