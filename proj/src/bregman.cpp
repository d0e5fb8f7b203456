#include "finsler/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "finsler/errors.hpp"
#include "finsler/random.hpp"

namespace finsler {

namespace {

inline double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  const double v = std::pow(std::abs(x), e);
  return x < 0.0 ? -v : v;
}

// Pieces of a base f = h^k at (xi, eta): f(xi), grad f(xi).eta, D_f(xi + eta, xi).
struct Parts {
  double F0;
  double G;
  double Df;
  double k;
};

// D_{h^r}(xi + eta, xi) from the parts of f = h^k.
double compose(const Parts& pt, double r) {
  if (r == pt.k) return pt.Df;
  const double q = r / pt.k;
  if (pt.F0 <= 0.0) return std::pow(std::max(pt.Df, 0.0), q);
  const double t = (pt.G + pt.Df) / pt.F0;
  if (std::abs(t) <= 0.5) {
    return std::pow(pt.F0, q) * phi_r(q, t) + q * std::pow(pt.F0, q - 1.0) * pt.Df;
  }
  const double fz = std::max(pt.F0 + pt.G + pt.Df, 0.0);
  return std::pow(fz, q) - std::pow(pt.F0, q) - q * std::pow(pt.F0, q - 1.0) * pt.G;
}

Parts weighted_parts(const NormFamily& fam, std::span<const double> xi,
                     std::span<const double> eta) {
  const double s = fam.s();
  const auto a = fam.weights();
  double F0 = 0.0, G = 0.0, Df = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] != 0.0) {
      F0 += a[i] * std::pow(std::abs(xi[i]), s);
      G += a[i] * s * signed_pow(xi[i], s - 1.0) * eta[i];
    }
    Df += a[i] * scalar_bregman_delta(s, xi[i], eta[i]);
  }
  return {F0, G, Df, s};
}

Parts matrix_parts(const NormFamily& fam, std::span<const double> xi,
                   std::span<const double> eta) {
  const auto& A = fam.matrix();
  const auto n = static_cast<Eigen::Index>(xi.size());
  double F0 = 0.0, G = 0.0, Df = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double ax = 0.0, ae = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      ax += A(i, j) * xi[static_cast<std::size_t>(j)];
      ae += A(i, j) * eta[static_cast<std::size_t>(j)];
    }
    F0 += xi[static_cast<std::size_t>(i)] * ax;
    G += 2.0 * eta[static_cast<std::size_t>(i)] * ax;
    Df += eta[static_cast<std::size_t>(i)] * ae;
  }
  return {std::max(F0, 0.0), G, std::max(Df, 0.0), 2.0};
}

// Parts of f = h^k for the family norm h, with k = s, 2 or p.
Parts family_parts(const NormFamily& fam, const ExponentPair& ep, std::span<const double> xi,
                   std::span<const double> eta) {
  switch (fam.kind()) {
    case NormKind::WeightedS:
      return weighted_parts(fam, xi, eta);
    case NormKind::Matrix:
      return matrix_parts(fam, xi, eta);
    case NormKind::Combined: {
      const double p = ep.p();
      const Parts w = weighted_parts(fam, xi, eta);
      const Parts m = matrix_parts(fam, xi, eta);
      Parts out{0.0, 0.0, 0.0, p};
      for (const Parts* pt : {&w, &m}) {
        if (pt->F0 > 0.0) {
          const double e = p / pt->k;
          out.F0 += std::pow(pt->F0, e);
          out.G += e * std::pow(pt->F0, e - 1.0) * pt->G;
        }
        out.Df += compose(*pt, p);
      }
      return out;
    }
  }
  return {0.0, 0.0, 0.0, 2.0};
}

void check_pair(const NormFamily& fam, std::span<const double> xi, std::span<const double> eta) {
  if (xi.size() != fam.dim() || eta.size() != fam.dim()) {
    throw ArgumentError("dimension mismatch between vectors and norm family");
  }
}

}  // namespace

double phi_r(double r, double t) {
  if (r == 1.0) return 0.0;
  if (r == 2.0) return t * t;
  if (std::abs(t) <= 0.25) {
    // Binomial series sum_{k>=2} C(r, k) t^k.
    double coef = r * (r - 1.0) / 2.0;
    double tk = t * t;
    double sum = coef * tk;
    for (int k = 3; k < 80; ++k) {
      coef *= (r - k + 1.0) / k;
      tk *= t;
      const double term = coef * tk;
      sum += term;
      if (coef == 0.0 || std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::pow(std::abs(1.0 + t), r) - 1.0 - r * t;
}

double scalar_bregman_delta(double p, double x, double d) {
  if (d == 0.0) return 0.0;
  if (p == 2.0) return d * d;
  if (x == 0.0) return std::pow(std::abs(d), p);
  const double t = d / x;
  if (std::abs(t) > 1.0) {
    return std::pow(std::abs(x + d), p) - std::pow(std::abs(x), p) -
           p * signed_pow(x, p - 1.0) * d;
  }
  return std::pow(std::abs(x), p) * phi_r(p, t);
}

double scalar_bregman(double p, double x, double y) {
  if (!(p > 1.0)) throw ArgumentError("scalar_bregman requires p > 1");
  return scalar_bregman_delta(p, x, y - x);
}

double bregman_distance(const NormFamily& fam, const ExponentPair& ep,
                        std::span<const double> xi, std::span<const double> eta) {
  check_pair(fam, xi, eta);
  check_compatible(fam, ep);
  return compose(family_parts(fam, ep, xi, eta), ep.p());
}

double r1(const NormFamily& fam, const ExponentPair& ep, std::span<const double> xi,
          std::span<const double> eta, double l) {
  check_pair(fam, xi, eta);
  NormEvaluator ev(fam, ep);
  const double ne = ev.h(eta.data());
  if (ne == 0.0) return 0.0;
  const double nx = ev.h(xi.data());
  return std::pow(ne, l) * std::pow(ne + nx, ep.p() - l);
}

double r2(const NormFamily& fam, const ExponentPair& ep, std::span<const double> xi,
          std::span<const double> eta) {
  check_pair(fam, xi, eta);
  if (fam.kind() != NormKind::WeightedS) throw ArgumentError("R2 needs a weighted s-norm family");
  check_compatible(fam, ep);
  const double s = fam.s(), p = ep.p();
  const auto a = fam.weights();
  double f = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double ar = std::pow(a[i], 1.0 / s);
    const double x = ar * std::abs(xi[i]);
    const double e = ar * std::abs(eta[i]);
    f += a[i] * std::pow(std::abs(xi[i]), s);
    if (e > 0.0) sum += e * e * std::pow(e + x, s - 2.0);
  }
  double outer;
  if (f == 0.0) {
    if (p < s) throw DomainError("R2 is undefined at xi = 0 when p < s");
    outer = (p == s) ? 1.0 : 0.0;
  } else {
    outer = std::pow(f, (p - s) / s);
  }
  return outer * sum;
}

ChainDecomposition bregman_chain_decompose(const NormFamily& fam, const ExponentPair& ep,
                                           double r, std::span<const double> xi,
                                           std::span<const double> eta) {
  check_pair(fam, xi, eta);
  check_compatible(fam, ep);
  if (!(r > 1.0)) throw ArgumentError("chain rule exponent r must be > 1");
  const Parts pt = family_parts(fam, ep, xi, eta);
  ChainDecomposition out{};
  out.total = compose(pt, r);
  if (pt.F0 <= 0.0) {
    // grad h(0) := 0, so the slope term vanishes.
    out.outer = std::pow(std::max(pt.Df, 0.0), r / pt.k);
    out.slope_term = 0.0;
    return out;
  }
  const double h0 = std::pow(pt.F0, 1.0 / pt.k);
  const double t = (pt.G + pt.Df) / pt.F0;
  const double delta = h0 * std::expm1(std::log1p(t) / pt.k);
  out.outer = std::pow(h0, r) * phi_r(r, delta / h0);
  out.slope_term = r * std::pow(h0, r - 1.0) * compose(pt, 1.0);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::Pseudo: return "pseudo";
    case LemmaId::SLtPLower: return "s_lt_p_lower";
    case LemmaId::PLtSUpper: return "p_lt_s_upper";
    case LemmaId::Uniform: return "uniform";
    case LemmaId::SmallXi: return "small_xi";
    case LemmaId::LargeXiSLtPUpper: return "large_xi_s_lt_p_upper";
    case LemmaId::LargeXiPLtSLower: return "large_xi_p_lt_s_lower";
    case LemmaId::Matrix: return "matrix";
  }
  return "unknown";
}

std::vector<LemmaId> all_lemmas() {
  return {LemmaId::Pseudo,  LemmaId::SLtPLower,        LemmaId::PLtSUpper,
          LemmaId::Uniform, LemmaId::SmallXi,          LemmaId::LargeXiSLtPUpper,
          LemmaId::LargeXiPLtSLower, LemmaId::Matrix};
}

LemmaId lemma_from_string(const std::string& name) {
  for (LemmaId id : all_lemmas()) {
    if (to_string(id) == name) return id;
  }
  throw ConfigurationError("unknown lemma id: " + name);
}

bool asserts_lower(LemmaId id) {
  return id != LemmaId::PLtSUpper && id != LemmaId::LargeXiSLtPUpper;
}

bool asserts_upper(LemmaId id) {
  return id != LemmaId::SLtPLower && id != LemmaId::LargeXiPLtSLower;
}

namespace {

// Empty string when the lemma applies, otherwise the reason it does not.
std::string regime_mismatch(LemmaId id, const NormFamily& fam, const ExponentPair& ep) {
  const double p = ep.p(), s = ep.s();
  if (id == LemmaId::Matrix) {
    return fam.kind() == NormKind::Matrix ? "" : "lemma 'matrix' needs a matrix norm family";
  }
  if (fam.kind() != NormKind::WeightedS) {
    return "lemma '" + to_string(id) + "' needs a weighted s-norm family";
  }
  if (fam.s() != s) return "exponent pair s does not match the norm family";
  switch (id) {
    case LemmaId::Pseudo:
      return p == s ? "" : "lemma 'pseudo' needs p = s";
    case LemmaId::SLtPLower:
    case LemmaId::LargeXiSLtPUpper:
      return s < p ? "" : "lemma '" + to_string(id) + "' needs s < p";
    case LemmaId::PLtSUpper:
    case LemmaId::LargeXiPLtSLower:
      return p < s ? "" : "lemma '" + to_string(id) + "' needs p < s";
    default:
      return "";
  }
}

enum class Regime { Any, SmallXi, LargeXi };

Regime regime_of(LemmaId id) {
  switch (id) {
    case LemmaId::SmallXi: return Regime::SmallXi;
    case LemmaId::LargeXiSLtPUpper:
    case LemmaId::LargeXiPLtSLower: return Regime::LargeXi;
    default: return Regime::Any;
  }
}

struct PartitionResult {
  std::size_t count = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<Violation> violations;
  std::size_t violation_count = 0;
};

void run_partition(LemmaId id, const NormFamily& fam, const ExponentPair& ep,
                   const SamplerConfig& cfg, std::size_t count, std::uint64_t seed,
                   PartitionResult& res) {
  const std::size_t n = fam.dim();
  NormEvaluator ev(fam, ep);
  Rng rng(seed);
  std::vector<double> un(n), xin(n), etan(n), xi(n), eta(n);
  const Regime regime = regime_of(id);
  const double p = ep.p();
  const double m = ep.m(), M = ep.M();

  auto draw = [&](std::vector<double>& out) {
    rng.unit_vector(un);
    const double mag = std::pow(10.0, rng.uniform(cfg.log10_min, cfg.log10_max));
    for (std::size_t i = 0; i < n; ++i) out[i] = un[i] * mag;
  };

  auto record = [&](double ratio, const char* reason) {
    ++res.violation_count;
    if (res.violations.size() < cfg.max_violations) {
      res.violations.push_back({xi, eta, ratio, reason});
    }
  };

  for (std::size_t k = 0; k < count; ++k) {
    double nx = 0.0, ne = 0.0;
    for (;;) {
      draw(xin);
      draw(etan);
      fam.from_normalized(xin, xi);
      fam.from_normalized(etan, eta);
      nx = ev.h(xi.data());
      ne = ev.h(eta.data());
      if (regime == Regime::Any) break;
      if (nx == ne) continue;
      const bool want_small = regime == Regime::SmallXi;
      if ((nx < ne) != want_small) {
        std::swap(xi, eta);
        std::swap(nx, ne);
      }
      break;
    }
    const Parts pt = family_parts(fam, ep, xi, eta);
    const double D = compose(pt, p);

    double lo_ratio, hi_ratio;
    switch (id) {
      case LemmaId::Uniform:
        lo_ratio = D / (std::pow(ne, M) * std::pow(ne + nx, p - M));
        hi_ratio = D / (std::pow(ne, m) * std::pow(ne + nx, p - m));
        break;
      case LemmaId::SmallXi: {
        const double l = rng.uniform(m, M);
        lo_ratio = hi_ratio = D / (std::pow(ne, l) * std::pow(ne + nx, p - l));
        break;
      }
      case LemmaId::Matrix:
        lo_ratio = hi_ratio = D / (ne * ne * std::pow(ne + nx, p - 2.0));
        break;
      default:
        lo_ratio = hi_ratio = D / r2(fam, ep, xi, eta);
        break;
    }
    ++res.count;
    if (std::isfinite(lo_ratio)) res.lo = std::min(res.lo, lo_ratio);
    if (std::isfinite(hi_ratio)) res.hi = std::max(res.hi, hi_ratio);
    if (asserts_lower(id) && !(lo_ratio > 0.0 && std::isfinite(lo_ratio))) {
      record(lo_ratio, "lower");
    } else if (asserts_upper(id) && !(hi_ratio <= cfg.upper_cap && std::isfinite(hi_ratio))) {
      record(hi_ratio, "upper");
    }
  }
}

}  // namespace

std::vector<LemmaId> applicable_lemmas(const NormFamily& fam, const ExponentPair& ep) {
  std::vector<LemmaId> out;
  for (LemmaId id : all_lemmas()) {
    if (regime_mismatch(id, fam, ep).empty()) out.push_back(id);
  }
  return out;
}

EstimateReport estimate_equivalence_constants(LemmaId lemma, const NormFamily& fam,
                                              const ExponentPair& ep, const SamplerConfig& cfg,
                                              std::size_t N, std::uint64_t seed) {
  const std::string why = regime_mismatch(lemma, fam, ep);
  if (!why.empty()) throw ArgumentError(why);
  if (N == 0) throw ArgumentError("sample count must be >= 1");
  if (!(cfg.log10_min < cfg.log10_max)) throw ArgumentError("empty magnitude range");
  const std::size_t P = std::max<std::size_t>(cfg.partitions, 1);

  std::vector<PartitionResult> parts(P);
  auto work = [&](std::size_t k) {
    const std::size_t cnt = N / P + (k < N % P ? 1 : 0);
    run_partition(lemma, fam, ep, cfg, cnt, derive_seed(seed, k), parts[k]);
  };
  const unsigned T = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(P)));
  if (T == 1) {
    for (std::size_t k = 0; k < P; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < T; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < P; k += T) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  EstimateReport rep{lemma, ep.p(), ep.s(), fam.dim(), 0,
                     std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(), {}, 0, seed};
  for (auto& pr : parts) {
    rep.sample_count += pr.count;
    rep.c_hat = std::min(rep.c_hat, pr.lo);
    rep.C_hat = std::max(rep.C_hat, pr.hi);
    rep.violation_count += pr.violation_count;
    for (auto& v : pr.violations) {
      if (rep.violations.size() < cfg.max_violations) rep.violations.push_back(std::move(v));
    }
  }
  if (!std::isfinite(rep.c_hat) || !std::isfinite(rep.C_hat)) {
    throw SamplingError("no finite ratio among the sampled pairs");
  }
  return rep;
}

}  // namespace finsler
