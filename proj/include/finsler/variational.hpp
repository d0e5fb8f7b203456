#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "finsler/calibration.hpp"
#include "finsler/energy.hpp"
#include "finsler/grid.hpp"
#include "finsler/norms.hpp"

namespace finsler {

struct HardyProblem {
  GridPtr grid;
  NormFamily fam;
  ExponentPair ep;
  GridFunction V;
  GridFunction g;  // |g| enters the constraint
};

struct CapacityProblem {
  GridPtr grid;
  NormFamily fam;
  ExponentPair ep;
  GridFunction V;
  std::vector<std::uint8_t> K;  // compact set, inside the mask
  GridFunction u;               // obstacle, > 0 on the mask
};

struct SolverConfig {
  double tol = 1e-8;  // relative objective change
  /// Relative stationarity required for convergence; <= 0 means use tol.
  double stationarity_tol = 0.0;
  std::size_t max_iter = 50000;
  std::size_t patience = 5;  // consecutive small changes
  double armijo_c = 1e-4;
  double shrink = 0.5;
  std::size_t max_backtracks = 60;
  std::uint64_t seed = 0;
  std::size_t restarts = 3;
  bool keep_history = true;

  double stat_tol() const { return stationarity_tol > 0.0 ? stationarity_tol : tol; }
};

struct SolveResult {
  double value = 0.0;
  GridFunction minimizer;
  std::size_t iterations = 0;
  bool converged = false;
  bool infinite = false;      // constraint infeasible: value = +inf
  bool supercritical = false; // negative energy met
  double stationarity = 0.0;
  std::size_t best_restart = 0;
  std::vector<double> history;
};

/// S_g = inf { Q[phi] : int |g||phi|^p = 1 } by spectral projected gradient
/// on the Rayleigh quotient with renormalization after every step.
/// Throws SetupError when g vanishes on the whole grid.
SolveResult hardy_constant(const HardyProblem& prob, const SolverConfig& cfg);

/// cap(K, u) = inf { Q[phi] : phi >= u on K } with the obstacle clamp.
SolveResult capacity(const CapacityProblem& prob, const SolverConfig& cfg);

struct MazyaRow {
  std::size_t index = 0;
  std::size_t nodes = 0;
  double mass = 0.0;      // int_K |g| u^p
  double capacity = 0.0;
  double ratio = 0.0;
  bool skipped = false;   // empty K or zero capacity
};

struct MazyaResult {
  double norm_u = 0.0;       // max ratio
  double S_g = 0.0;
  double hardy_norm = 0.0;   // 1 / S_g
  double C_cal = 0.0;
  double slack = 0.05;
  bool upper_ok = false;     // norm_u <= (1 + slack) / S_g
  bool lower_ok = false;     // 1 / S_g <= C_cal norm_u
  std::vector<MazyaRow> rows;
  SolveResult hardy;
};

/// Calibrated constant of the Maz'ya bracket, (2^p - 1) 2^p C / c with the
/// pseudo-case constants when p = s and the uniform ones otherwise.
double mazya_constant(const CalibrationTable& cal, const ExponentPair& ep, std::size_t n);

MazyaResult mazya_ratio(const HardyProblem& prob, const GridFunction& u,
                        const std::vector<std::vector<std::uint8_t>>& compacts,
                        const SolverConfig& cfg, double C_cal, double slack = 0.05);

/// Hardy constants on the collars mask \ omega_i of a nested exhaustion.
std::vector<SolveResult> hardy_tail_constant(
    const HardyProblem& prob, const std::vector<std::vector<std::uint8_t>>& exhaustion,
    const SolverConfig& cfg);

struct AttainmentReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double positive_fraction = 0.0;  // mask nodes with phi > 0 after sign normalization
  double sign_quantile = 0.999;
  bool sign_definite = false;
  double residual_abs = 0.0;       // max_j |Q'_{V - S_g|g|}[phi](e_j)|
  double residual_rel = 0.0;       // ... / max_j |Q'_V[phi](e_j)|
  bool residual_ok = false;        // residual_rel <= 10 tol
  double rayleigh_gap = 0.0;
  SolveResult hardy;
};

AttainmentReport attainment_check(const HardyProblem& prob, const SolverConfig& cfg);
AttainmentReport attainment_check(const HardyProblem& prob, const SolverConfig& cfg,
                                  const SolveResult& solved);

/// Same values on a domain with the same lattice shape.
GridFunction rebind(const GridFunction& f, GridPtr grid);

}  // namespace finsler
