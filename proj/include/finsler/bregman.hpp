#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finsler/norms.hpp"

namespace finsler {

/// phi_r(t) = |1 + t|^r - 1 - r t, evaluated without cancellation near t = 0.
double phi_r(double r, double t);

/// One-variable Bregman distance of |t|^p: |y|^p - |x|^p - p|x|^{p-2}x(y - x).
double scalar_bregman(double p, double x, double y);

/// The same quantity parametrized by the increment d = y - x.
double scalar_bregman_delta(double p, double x, double d);

/// D_{H^p}(xi + eta, xi) for the family norm H.
double bregman_distance(const NormFamily& fam, const ExponentPair& ep,
                        std::span<const double> xi, std::span<const double> eta);

/// R1(xi, eta; l) = |eta|^l (|eta| + |xi|)^{p-l}, with |.| the family norm.
double r1(const NormFamily& fam, const ExponentPair& ep, std::span<const double> xi,
          std::span<const double> eta, double l);

/// R2(xi, eta) = |xi|_{s,a}^{p-s} sum |eta'_i|^2 (|eta'_i| + |xi'_i|)^{s-2},
/// xi'_i = a_i^{1/s} xi_i. WeightedS families only; DomainError at xi = 0 when p < s.
double r2(const NormFamily& fam, const ExponentPair& ep, std::span<const double> xi,
          std::span<const double> eta);

struct ChainDecomposition {
  double total;
  double outer;
  double slope_term;
};

/// D_{h^r}(xi + eta, xi) = D_{t^r}(h(xi + eta), h(xi)) + r h(xi)^{r-1} D_h(xi + eta, xi)
/// with h the family norm (the Combined norm at exponent ep.p()).
ChainDecomposition bregman_chain_decompose(const NormFamily& fam, const ExponentPair& ep,
                                           double r, std::span<const double> xi,
                                           std::span<const double> eta);

enum class LemmaId {
  Pseudo,
  SLtPLower,
  PLtSUpper,
  Uniform,
  SmallXi,
  LargeXiSLtPUpper,
  LargeXiPLtSLower,
  Matrix,
};

std::string to_string(LemmaId id);
LemmaId lemma_from_string(const std::string& name);
std::vector<LemmaId> all_lemmas();
/// Lemmas whose exponent and family regime matches.
std::vector<LemmaId> applicable_lemmas(const NormFamily& fam, const ExponentPair& ep);
bool asserts_lower(LemmaId id);
bool asserts_upper(LemmaId id);

struct SamplerConfig {
  double log10_min = -3.0;
  double log10_max = 3.0;
  std::size_t partitions = 64;
  unsigned threads = 1;
  /// Upper-bound ratios above this are violations.
  double upper_cap = std::numeric_limits<double>::infinity();
  std::size_t max_violations = 100;
};

struct Violation {
  std::vector<double> xi;
  std::vector<double> eta;
  double ratio;
  std::string reason;
};

struct EstimateReport {
  LemmaId lemma;
  double p;
  double s;
  std::size_t n;
  std::size_t sample_count;
  double c_hat;
  double C_hat;
  std::vector<Violation> violations;
  std::size_t violation_count;
  std::uint64_t seed;
};

/// Samples N pairs (xi, eta) in the lemma's regime and records min/max of
/// D / comparison. Throws ArgumentError on a regime mismatch.
EstimateReport estimate_equivalence_constants(LemmaId lemma, const NormFamily& fam,
                                              const ExponentPair& ep, const SamplerConfig& cfg,
                                              std::size_t N, std::uint64_t seed);

}  // namespace finsler
