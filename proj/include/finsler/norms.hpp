#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace finsler {

enum class NormKind { WeightedS, Matrix, Combined };

/// Exponents (p, s) with m = min(s, 2) and M = max(s, 2).
class ExponentPair {
 public:
  ExponentPair(double p, double s);

  double p() const { return p_; }
  double s() const { return s_; }
  double m() const { return s_ < 2.0 ? s_ : 2.0; }
  double M() const { return s_ > 2.0 ? s_ : 2.0; }

 private:
  double p_;
  double s_;
};

/// The norm H(x, .) in force. Constant in x: a and A are fixed vectors/matrices.
///
/// WeightedS:  |xi|_{s,a} = (sum a_i |xi_i|^s)^{1/s}
/// Matrix:     |xi|_A     = sqrt(A xi . xi)
/// Combined:   H(xi)      = (|xi|_{s,a}^p + |xi|_A^p)^{1/p}, which depends on p;
///             the exponent is passed with every evaluation.
class NormFamily {
 public:
  static NormFamily weighted_s(double s, std::vector<double> a);
  static NormFamily matrix(const Eigen::MatrixXd& A);
  static NormFamily combined(double s, std::vector<double> a, const Eigen::MatrixXd& A);

  NormKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  bool has_weighted_part() const { return kind_ != NormKind::Matrix; }
  bool has_matrix_part() const { return kind_ != NormKind::WeightedS; }

  /// s of the weighted part; 2 for a pure matrix norm.
  double s() const { return s_; }
  std::span<const double> weights() const { return a_; }
  const Eigen::MatrixXd& matrix() const { return A_; }
  double matrix_min_eigenvalue() const { return lambda_min_; }
  double matrix_max_eigenvalue() const { return lambda_max_; }

  /// Maps normalized coordinates xi' (in which the norm reads as a plain
  /// s-norm, or the Euclidean norm for Matrix) back to xi. Combined families
  /// use the weighted part.
  void from_normalized(std::span<const double> xi_n, std::span<double> xi) const;

  /// Order-sensitive hash of the parameters, used in result fingerprints.
  std::uint64_t fingerprint() const;

 private:
  NormFamily() = default;
  void set_weights(double s, std::vector<double> a);
  void set_matrix(const Eigen::MatrixXd& A);

  NormKind kind_ = NormKind::WeightedS;
  std::size_t dim_ = 0;
  double s_ = 2.0;
  std::vector<double> a_;
  std::vector<double> a_root_;  // a_i^{1/s}
  Eigen::MatrixXd A_;
  Eigen::MatrixXd chol_upper_inv_;  // L^{-T} with A = L L^T
  std::vector<double> A_rowmajor_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;

  friend class NormEvaluator;
};

/// Pointwise evaluator for hot loops. No dimension checks; pointers must
/// address `dim()` doubles. Holds a copy of the family parameters.
class NormEvaluator {
 public:
  NormEvaluator(const NormFamily& fam, const ExponentPair& ep);

  std::size_t dim() const { return dim_; }
  double p() const { return p_; }

  /// H(xi)^p.
  double hp(const double* xi) const;
  /// H(xi).
  double h(const double* xi) const;
  /// A(xi) = grad_xi (H^p / p), written to out.
  void flux(const double* xi, double* out) const;
  /// H(xi)^p and A(xi) together.
  double hp_and_flux(const double* xi, double* out) const;
  /// H(xi + d)^p - H(xi)^p without cancellation for small d.
  double hp_increment(const double* xi, const double* d) const;

 private:
  double weighted_f(const double* xi) const;  // sum a_i |xi_i|^s
  double quad(const double* xi) const;        // A xi . xi

  std::size_t dim_;
  double p_;
  double s_;
  bool weighted_;
  bool matrix_;
  bool quadratic_s_;  // s == 2
  std::vector<double> a_;
  std::vector<double> A_;
};

double weighted_s_norm(std::span<const double> xi, const NormFamily& fam);
double matrix_norm(std::span<const double> xi, const NormFamily& fam);
double norm(std::span<const double> xi, const NormFamily& fam, const ExponentPair& ep);
double lagrangian_F(std::span<const double> xi, const NormFamily& fam, const ExponentPair& ep);
std::vector<double> operator_A(std::span<const double> xi, const NormFamily& fam,
                               const ExponentPair& ep);

/// Global structure constants for constant-coefficient families:
/// kappa|xi| <= H(xi) <= nu|xi|, alpha|xi|^p <= A(xi).xi, |A(xi)| <= beta|xi|^{p-1},
/// with alpha = kappa^p/p and beta = 2^p nu^p / p.
struct StructureConstants {
  double kappa;
  double nu;
  double alpha;
  double beta;
};
StructureConstants structure_constants(const NormFamily& fam, const ExponentPair& ep);

/// Sampled upper estimate of the modulus of convexity delta(eps) of (R^n, H):
/// min over N unit pairs with H(x - y) = eps of 1 - H((x + y)/2).
double modulus_of_convexity_estimate(const NormFamily& fam, const ExponentPair& ep, double eps,
                                     std::size_t samples, std::uint64_t seed);

/// Throws ArgumentError when the pair does not belong to the family
/// (s mismatch for families with a weighted part).
void check_compatible(const NormFamily& fam, const ExponentPair& ep);

}  // namespace finsler
