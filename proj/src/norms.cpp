#include "finsler/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <numbers>
#include <sstream>

#include "finsler/bregman.hpp"
#include "finsler/errors.hpp"
#include "finsler/random.hpp"

namespace finsler {

namespace {

// sign(x)|x|^e with the value 0 at x = 0.
inline double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  const double v = std::pow(std::abs(x), e);
  return x < 0.0 ? -v : v;
}

void check_dim(std::span<const double> xi, const NormFamily& fam) {
  if (xi.size() != fam.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: vector has " << xi.size() << " entries, norm family has "
       << fam.dim();
    throw ArgumentError(os.str());
  }
}

std::uint64_t mix(std::uint64_t h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(v));
  h ^= bits + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

ExponentPair::ExponentPair(double p, double s) : p_(p), s_(s) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigurationError("exponent p must be > 1");
  if (!(s > 1.0) || !std::isfinite(s)) throw ConfigurationError("exponent s must be > 1");
}

void NormFamily::set_weights(double s, std::vector<double> a) {
  if (!(s > 1.0) || !std::isfinite(s)) throw ConfigurationError("norm exponent s must be > 1");
  if (a.empty()) throw ConfigurationError("weight vector a must be non-empty");
  for (double ai : a) {
    if (!(ai > 0.0) || !std::isfinite(ai)) throw ConfigurationError("weights a_i must be > 0");
  }
  s_ = s;
  a_ = std::move(a);
  a_root_.resize(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) a_root_[i] = std::pow(a_[i], 1.0 / s_);
  dim_ = a_.size();
}

void NormFamily::set_matrix(const Eigen::MatrixXd& A) {
  if (A.rows() == 0 || A.rows() != A.cols()) throw ConfigurationError("matrix A must be square");
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (!std::isfinite(A(i, j))) throw ConfigurationError("matrix A has non-finite entries");
      if (std::abs(A(i, j) - A(j, i)) > 1e-12) {
        throw ConfigurationError("matrix A is not symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) throw ConfigurationError("matrix A is not positive definite");
  A_ = A;
  Eigen::LLT<Eigen::MatrixXd> llt(A_);
  Eigen::MatrixXd L = llt.matrixL();
  chol_upper_inv_ = L.transpose().inverse();
  A_rowmajor_.resize(static_cast<std::size_t>(A.size()));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      A_rowmajor_[static_cast<std::size_t>(i * A.cols() + j)] = A(i, j);
    }
  }
  dim_ = static_cast<std::size_t>(A.rows());
}

NormFamily NormFamily::weighted_s(double s, std::vector<double> a) {
  NormFamily f;
  f.kind_ = NormKind::WeightedS;
  f.set_weights(s, std::move(a));
  return f;
}

NormFamily NormFamily::matrix(const Eigen::MatrixXd& A) {
  NormFamily f;
  f.kind_ = NormKind::Matrix;
  f.s_ = 2.0;
  f.set_matrix(A);
  return f;
}

NormFamily NormFamily::combined(double s, std::vector<double> a, const Eigen::MatrixXd& A) {
  NormFamily f;
  f.kind_ = NormKind::Combined;
  f.set_weights(s, std::move(a));
  const std::size_t n = f.dim_;
  f.set_matrix(A);
  if (n != f.dim_) throw ConfigurationError("weights and matrix have different dimensions");
  return f;
}

void NormFamily::from_normalized(std::span<const double> xi_n, std::span<double> xi) const {
  if (kind_ == NormKind::Matrix) {
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        acc += chol_upper_inv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
               xi_n[j];
      }
      xi[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < dim_; ++i) xi[i] = xi_n[i] / a_root_[i];
  }
}

std::uint64_t NormFamily::fingerprint() const {
  std::uint64_t h = 0xCBF29CE484222325ull ^ static_cast<std::uint64_t>(kind_);
  h = mix(h, static_cast<double>(dim_));
  h = mix(h, s_);
  for (double v : a_) h = mix(h, v);
  for (double v : A_rowmajor_) h = mix(h, v);
  return h;
}

void check_compatible(const NormFamily& fam, const ExponentPair& ep) {
  if (fam.has_weighted_part() && ep.s() != fam.s()) {
    throw ArgumentError("exponent pair s does not match the norm family's s");
  }
}

// ---------------------------------------------------------------------------

NormEvaluator::NormEvaluator(const NormFamily& fam, const ExponentPair& ep)
    : dim_(fam.dim()),
      p_(ep.p()),
      s_(fam.s()),
      weighted_(fam.has_weighted_part()),
      matrix_(fam.has_matrix_part()),
      quadratic_s_(fam.s() == 2.0),
      a_(fam.a_),
      A_(fam.A_rowmajor_) {
  check_compatible(fam, ep);
}

double NormEvaluator::weighted_f(const double* xi) const {
  double f = 0.0;
  if (quadratic_s_) {
    for (std::size_t i = 0; i < dim_; ++i) f += a_[i] * xi[i] * xi[i];
  } else {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (xi[i] != 0.0) f += a_[i] * std::pow(std::abs(xi[i]), s_);
    }
  }
  return f;
}

double NormEvaluator::quad(const double* xi) const {
  double q = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) row += A_[i * dim_ + j] * xi[j];
    q += xi[i] * row;
  }
  return q;
}

double NormEvaluator::hp(const double* xi) const {
  double v = 0.0;
  if (weighted_) {
    const double f = weighted_f(xi);
    if (f > 0.0) v += (p_ == s_) ? f : std::pow(f, p_ / s_);
  }
  if (matrix_) {
    const double q = quad(xi);
    if (q > 0.0) v += (p_ == 2.0) ? q : std::pow(q, 0.5 * p_);
  }
  return v;
}

double NormEvaluator::h(const double* xi) const {
  if (!matrix_) {
    const double f = weighted_f(xi);
    return quadratic_s_ ? std::sqrt(f) : std::pow(f, 1.0 / s_);
  }
  if (!weighted_) return std::sqrt(quad(xi));
  return std::pow(hp(xi), 1.0 / p_);
}

double NormEvaluator::hp_and_flux(const double* xi, double* out) const {
  for (std::size_t i = 0; i < dim_; ++i) out[i] = 0.0;
  double v = 0.0;
  if (weighted_) {
    const double f = weighted_f(xi);
    if (f > 0.0) {
      // A_i = f^{(p-s)/s} a_i sign(xi_i)|xi_i|^{s-1}
      const double outer = (p_ == s_) ? 1.0 : std::pow(f, (p_ - s_) / s_);
      v += outer * f;
      if (quadratic_s_) {
        for (std::size_t i = 0; i < dim_; ++i) out[i] += outer * a_[i] * xi[i];
      } else {
        for (std::size_t i = 0; i < dim_; ++i) {
          out[i] += outer * a_[i] * signed_pow(xi[i], s_ - 1.0);
        }
      }
    }
  }
  if (matrix_) {
    double q = 0.0;
    double axi[8];
    double* ax = dim_ <= 8 ? axi : nullptr;
    std::vector<double> heap;
    if (!ax) {
      heap.resize(dim_);
      ax = heap.data();
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) row += A_[i * dim_ + j] * xi[j];
      ax[i] = row;
      q += xi[i] * row;
    }
    if (q > 0.0) {
      const double outer = (p_ == 2.0) ? 1.0 : std::pow(q, 0.5 * (p_ - 2.0));
      v += outer * q;
      for (std::size_t i = 0; i < dim_; ++i) out[i] += outer * ax[i];
    }
  }
  return v;
}

void NormEvaluator::flux(const double* xi, double* out) const { (void)hp_and_flux(xi, out); }

namespace {

// f(xi + d)^q - f(xi)^q from F0 = f(xi), G = grad f(xi).d and the Bregman
// remainder Df = f(xi + d) - F0 - G.
double power_increment(double F0, double G, double Df, double q) {
  if (q == 1.0) return G + Df;
  if (F0 <= 0.0) return std::pow(std::max(Df, 0.0), q);
  const double t = (G + Df) / F0;
  if (std::abs(t) <= 0.5) return std::pow(F0, q) * (phi_r(q, t) + q * t);
  return std::pow(std::max(F0 + G + Df, 0.0), q) - std::pow(F0, q);
}

}  // namespace

double NormEvaluator::hp_increment(const double* xi, const double* d) const {
  double inc = 0.0;
  if (weighted_) {
    double F0 = 0.0, G = 0.0, Df = 0.0;
    if (quadratic_s_) {
      for (std::size_t i = 0; i < dim_; ++i) {
        F0 += a_[i] * xi[i] * xi[i];
        G += 2.0 * a_[i] * xi[i] * d[i];
        Df += a_[i] * d[i] * d[i];
      }
    } else {
      for (std::size_t i = 0; i < dim_; ++i) {
        if (xi[i] != 0.0) {
          F0 += a_[i] * std::pow(std::abs(xi[i]), s_);
          G += a_[i] * s_ * signed_pow(xi[i], s_ - 1.0) * d[i];
        }
        Df += a_[i] * scalar_bregman_delta(s_, xi[i], d[i]);
      }
    }
    inc += power_increment(F0, G, Df, p_ / s_);
  }
  if (matrix_) {
    double F0 = 0.0, G = 0.0, Df = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double ax = 0.0, ad = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        ax += A_[i * dim_ + j] * xi[j];
        ad += A_[i * dim_ + j] * d[j];
      }
      F0 += xi[i] * ax;
      G += 2.0 * d[i] * ax;
      Df += d[i] * ad;
    }
    inc += power_increment(std::max(F0, 0.0), G, std::max(Df, 0.0), 0.5 * p_);
  }
  return inc;
}

// ---------------------------------------------------------------------------

double weighted_s_norm(std::span<const double> xi, const NormFamily& fam) {
  if (!fam.has_weighted_part()) throw ArgumentError("norm family has no weighted s-part");
  check_dim(xi, fam);
  const auto a = fam.weights();
  double f = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) f += a[i] * std::pow(std::abs(xi[i]), fam.s());
  return std::pow(f, 1.0 / fam.s());
}

double matrix_norm(std::span<const double> xi, const NormFamily& fam) {
  if (!fam.has_matrix_part()) throw ArgumentError("norm family has no matrix part");
  check_dim(xi, fam);
  const auto& A = fam.matrix();
  double q = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    for (std::size_t j = 0; j < xi.size(); ++j) {
      q += xi[i] * A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * xi[j];
    }
  }
  return std::sqrt(std::max(q, 0.0));
}

double norm(std::span<const double> xi, const NormFamily& fam, const ExponentPair& ep) {
  check_dim(xi, fam);
  switch (fam.kind()) {
    case NormKind::WeightedS:
      return weighted_s_norm(xi, fam);
    case NormKind::Matrix:
      return matrix_norm(xi, fam);
    case NormKind::Combined: {
      check_compatible(fam, ep);
      const double p = ep.p();
      return std::pow(std::pow(weighted_s_norm(xi, fam), p) + std::pow(matrix_norm(xi, fam), p),
                      1.0 / p);
    }
  }
  return 0.0;
}

double lagrangian_F(std::span<const double> xi, const NormFamily& fam, const ExponentPair& ep) {
  check_dim(xi, fam);
  NormEvaluator ev(fam, ep);
  return ev.hp(xi.data()) / ep.p();
}

std::vector<double> operator_A(std::span<const double> xi, const NormFamily& fam,
                               const ExponentPair& ep) {
  check_dim(xi, fam);
  NormEvaluator ev(fam, ep);
  std::vector<double> out(xi.size());
  ev.flux(xi.data(), out.data());
  return out;
}

StructureConstants structure_constants(const NormFamily& fam, const ExponentPair& ep) {
  check_compatible(fam, ep);
  const double p = ep.p();
  const double n = static_cast<double>(fam.dim());
  double kappa_w = 0.0, nu_w = 0.0, kappa_m = 0.0, nu_m = 0.0;
  if (fam.has_weighted_part()) {
    const auto a = fam.weights();
    const double amin = *std::min_element(a.begin(), a.end());
    const double amax = *std::max_element(a.begin(), a.end());
    const double c = std::pow(n, 1.0 / fam.s() - 0.5);
    kappa_w = std::pow(amin, 1.0 / fam.s()) * std::min(1.0, c);
    nu_w = std::pow(amax, 1.0 / fam.s()) * std::max(1.0, c);
  }
  if (fam.has_matrix_part()) {
    kappa_m = std::sqrt(fam.matrix_min_eigenvalue());
    nu_m = std::sqrt(fam.matrix_max_eigenvalue());
  }
  StructureConstants sc{};
  switch (fam.kind()) {
    case NormKind::WeightedS:
      sc.kappa = kappa_w;
      sc.nu = nu_w;
      break;
    case NormKind::Matrix:
      sc.kappa = kappa_m;
      sc.nu = nu_m;
      break;
    case NormKind::Combined:
      sc.kappa = std::pow(std::pow(kappa_w, p) + std::pow(kappa_m, p), 1.0 / p);
      sc.nu = std::pow(std::pow(nu_w, p) + std::pow(nu_m, p), 1.0 / p);
      break;
  }
  sc.alpha = std::pow(sc.kappa, p) / p;
  sc.beta = std::pow(2.0, p) * std::pow(sc.nu, p) / p;
  return sc;
}

double modulus_of_convexity_estimate(const NormFamily& fam, const ExponentPair& ep, double eps,
                                     std::size_t samples, std::uint64_t seed) {
  if (!(eps > 0.0) || eps > 2.0) throw ArgumentError("eps must lie in (0, 2]");
  if (samples == 0) throw ArgumentError("sample count must be >= 1");
  const std::size_t n = fam.dim();
  if (n < 2) throw ArgumentError("modulus of convexity needs dimension >= 2");
  NormEvaluator ev(fam, ep);
  Rng rng(seed);
  std::vector<double> d(n), w(n), x(n), y(n), tmp(n);

  auto point_at = [&](double theta, std::vector<double>& out) {
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < n; ++i) out[i] = c * d[i] + s * w[i];
    const double hn = ev.h(out.data());
    for (auto& v : out) v /= hn;
  };
  auto gap = [&](const std::vector<double>& yy) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] - yy[i];
    return ev.h(tmp.data());
  };

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    rng.unit_vector(d);
    // Random direction orthogonal to d spans the 2-plane.
    double dot = 0.0;
    do {
      rng.unit_vector(w);
      dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += w[i] * d[i];
      for (std::size_t i = 0; i < n; ++i) w[i] -= dot * d[i];
    } while (std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0)) < 1e-8);
    const double wn = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    for (auto& v : w) v /= wn;

    point_at(0.0, x);
    if (eps >= 2.0) {
      for (std::size_t i = 0; i < n; ++i) y[i] = -x[i];
    } else {
      double lo = 0.0, hi = std::numbers::pi;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        point_at(mid, y);
        if (gap(y) < eps) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      point_at(hi, y);
    }
    for (std::size_t i = 0; i < n; ++i) tmp[i] = 0.5 * (x[i] + y[i]);
    best = std::min(best, 1.0 - ev.h(tmp.data()));
  }
  return std::max(best, 0.0);
}

}  // namespace finsler
