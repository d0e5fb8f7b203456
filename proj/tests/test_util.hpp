#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "finsler/random.hpp"

namespace finsler::test {

inline double rel_err(double a, double b) {
  const double d = std::abs(a - b);
  const double m = std::max(std::abs(a), std::abs(b));
  return m > 0.0 ? d / m : d;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -2.0,
                                         double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace finsler::test
