#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "finsler/grid.hpp"

namespace finsler {

enum class MorreyVariant { Basic, EnhancedTilde, EnhancedHat };

std::string to_string(MorreyVariant v);
MorreyVariant morrey_variant_from_string(const std::string& name);

struct MorreySpec {
  double p;
  double q;
  MorreyVariant variant = MorreyVariant::Basic;
  double theta = 0.0;     // in (n-1, n); tilde and hat variants at p = n
  double vartheta = 0.0;  // in (p-1, p); hat variant at p > n
};

/// Throws ConfigurationError when (p, q, n, variant) is outside the
/// admissible ranges.
void validate(const MorreySpec& spec, std::size_t n);

/// Centers on every `center_stride`-th node of each axis (mask nodes only);
/// radii 2h * 2^{k / steps_per_octave} strictly below diam(omega).
struct MorreyLattice {
  std::size_t center_stride = 4;
  std::size_t steps_per_octave = 4;

  /// Level 0 is the default; each level halves the stride (down to 1) and
  /// doubles the radii per octave, so level L+1 contains level L.
  static MorreyLattice refined(std::size_t level);
};

struct MorreyResult {
  double value = 0.0;
  double best_radius = 0.0;
  std::size_t best_center = kNoNode;
  std::size_t centers = 0;
  std::size_t radii = 0;
  double diameter = 0.0;
};

/// Supremum over the lattice of weight(r) * sum_{omega cap B_r(y)} |f| h^n,
/// omega being the grid mask. For p > n the norm is the L1 norm on omega.
/// diam(omega) is the diagonal of the mask's bounding box.
MorreyResult morrey_norm(const GridFunction& f, const MorreySpec& spec,
                         const MorreyLattice& lattice = {});

/// Integral of |f|^q over the shell eps < |x| < R in dimension 2 or 3, by
/// midpoint quadrature in (log r, angles). Used to exhibit f outside L^q
/// near the origin.
double lq_shell_mass(const std::function<double(const double*)>& f, std::size_t n, double q,
                     double eps, double R, std::size_t radial_per_octave = 64,
                     std::size_t angular = 256);

}  // namespace finsler
