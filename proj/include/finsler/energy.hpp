#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "finsler/calibration.hpp"
#include "finsler/grid.hpp"
#include "finsler/norms.hpp"

namespace finsler {

/// Forward differences (u(x + h e_i) - u(x))/h at every node, node-major
/// (component i of node x at x*dim + i). Values off the mask read as 0.
std::vector<double> discrete_gradient(const GridFunction& u);

/// Q[phi] = sum (H(D phi)^p + V|phi|^p) h^n. The gradient term runs over the
/// nodes where D phi can be nonzero, the potential term over mask nodes.
/// phi is read as zero off the mask.
class EnergyFunctional {
 public:
  EnergyFunctional(GridPtr grid, const NormFamily& fam, const ExponentPair& ep,
                   const GridFunction& V);

  const GridDomain& grid() const { return *grid_; }
  double p() const { return ev_.p(); }

  double value(const std::vector<double>& phi) const;
  /// Q and its gradient with respect to the mask values (zero off the mask).
  double value_and_gradient(const std::vector<double>& phi, std::vector<double>& grad) const;
  /// Q[phi + step] - Q[phi], accurate when step is small relative to phi.
  double value_increment(const std::vector<double>& phi, const std::vector<double>& step) const;
  /// sum A(D u).D test + V|u|^{p-2}u test, times h^n.
  double residual(const std::vector<double>& u, const std::vector<double>& test) const;

  /// Weighted p-mass sum w|phi|^p h^n over mask nodes, and its gradient.
  double weighted_mass(const std::vector<double>& w, const std::vector<double>& phi) const;
  /// weighted_mass(w, phi + step) - weighted_mass(w, phi) without cancellation.
  double weighted_mass_increment(const std::vector<double>& w, const std::vector<double>& phi,
                                 const std::vector<double>& step) const;
  double weighted_mass_and_gradient(const std::vector<double>& w, const std::vector<double>& phi,
                                    std::vector<double>& grad) const;

 private:
  // Forward differences at active position k.
  void gradient_at(const std::vector<double>& phi, std::size_t k, double* out) const;

  static constexpr std::uint32_t kNone = 0xffffffffu;

  GridPtr grid_;
  NormEvaluator ev_;
  std::vector<double> V_;
  bool has_potential_;
  std::size_t n_;
  double inv_h_;
  // Per active node: the node, itself if in the mask, and its forward mask
  // neighbors (kNone otherwise).
  std::vector<std::uint32_t> act_node_, act_self_, act_fwd_;
  // Per mask node: active positions of itself and of its predecessors.
  std::vector<std::uint32_t> mask_self_, mask_pred_;
};

double energy_Q(const GridFunction& phi, const NormFamily& fam, const ExponentPair& ep,
                const GridFunction& V);

double residual_Qprime(const GridFunction& u, const NormFamily& fam, const ExponentPair& ep,
                       const GridFunction& V, const GridFunction& test);

struct BracketResult {
  double lower = 0.0;
  double upper = 0.0;
  double Q_value = 0.0;
  bool inside = true;
  std::string regime;         // "p=s", "s<p" or "p<s"
  std::size_t omega1_nodes = 0;
  std::size_t omega2_nodes = 0;
  std::size_t dropped_nodes = 0;  // p<s: Omega_2 nodes with |grad u| below the threshold
  double drop_threshold = 1e-14;
};

/// Two-sided bracket of Q[u psi] (V = 0) through nodewise R1/R2 sums with
/// xi = psi Du and eta = u(x + e_i) D_i psi, so that xi + eta = D(u psi).
/// u is read at every node and must be > 0 on the mask; psi must vanish off
/// the mask. Constants come from the calibration table at n = grid dim.
BracketResult simplified_energy_bracket(const GridFunction& u_pos, const GridFunction& psi,
                                        const NormFamily& fam, const ExponentPair& ep,
                                        const CalibrationTable& cal);

}  // namespace finsler
