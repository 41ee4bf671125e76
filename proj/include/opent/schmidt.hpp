#pragma once

#include "opent/local_basis.hpp"
#include "opent/norms.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace opent {

/// Operator Schmidt decomposition O = sum_i lambda_i A_i x B_i across one
/// cut. Factors are stored through their coefficients in the product
/// Hermitian basis; A_i = sum_p left(p, i) G_p and B_i = sum_q right(q, i) G_q
/// with tr[A_i^dagger A_j] = d^{n_a} delta_ij and tr[B_i^dagger B_j] =
/// d^{n_b} delta_ij. For Hermitian sources the coefficients are real and
/// every A_i, B_i is Hermitian.
class SchmidtDecomposition {
 public:
  SchmidtDecomposition(Bipartition cut, int local_dim, RVector lambdas, CMatrix left, CMatrix right,
                       bool hermitian_factors)
      : cut_(cut),
        local_dim_(local_dim),
        lambdas_(std::move(lambdas)),
        left_(std::move(left)),
        right_(std::move(right)),
        hermitian_factors_(hermitian_factors) {
    if (left_.cols() != lambdas_.size() || right_.cols() != lambdas_.size()) {
      throw DimensionError("SchmidtDecomposition: factor count does not match spectrum length");
    }
  }

  const Bipartition& bipartition() const { return cut_; }
  int local_dim() const { return local_dim_; }
  int n_sites() const { return cut_.n_sites; }
  const RVector& lambdas() const { return lambdas_; }
  Eigen::Index length() const { return lambdas_.size(); }
  bool hermitian_factors() const { return hermitian_factors_; }

  const CMatrix& left_coefficients() const { return left_; }
  const CMatrix& right_coefficients() const { return right_; }

  /// Number of strictly positive Schmidt values.
  Eigen::Index rank() const {
    Eigen::Index r = 0;
    while (r < lambdas_.size() && lambdas_(r) > 0.0) ++r;
    return r;
  }

  /// Squared Schmidt values, the distribution behind the LOE.
  RVector probabilities() const { return lambdas_.array().square(); }

  CMatrix left_factor(Eigen::Index i) const {
    return from_coefficients(left_.col(i), cut_.n_a(), local_dim_);
  }
  CMatrix right_factor(Eigen::Index i) const {
    return from_coefficients(right_.col(i), cut_.n_b(), local_dim_);
  }

 private:
  Bipartition cut_;
  int local_dim_;
  RVector lambdas_;
  CMatrix left_;
  CMatrix right_;
  bool hermitian_factors_;
};

namespace detail {

inline constexpr double kClampRelative = 1e-13;

inline void clamp_small(RVector& s) {
  if (s.size() == 0) return;
  const double floor = kClampRelative * s(0);
  for (auto& x : s) {
    if (x < floor) x = 0.0;
  }
}

/// Row-major view of the coefficient vector as the correlation matrix
/// across `cut`.
inline Eigen::Map<const CMatrix> correlation_view(const CVector& coeffs, const Bipartition& cut,
                                                  int d) {
  const Eigen::Index rows = ipow(d, 2 * cut.n_a());
  const Eigen::Index cols = ipow(d, 2 * cut.n_b());
  return Eigen::Map<const CMatrix>(coeffs.data(), rows, cols);
}

inline Eigen::Map<CMatrix> correlation_view(CVector& coeffs, const Bipartition& cut, int d) {
  const Eigen::Index rows = ipow(d, 2 * cut.n_a());
  const Eigen::Index cols = ipow(d, 2 * cut.n_b());
  return Eigen::Map<CMatrix>(coeffs.data(), rows, cols);
}

inline bool coefficients_real(const CVector& coeffs) {
  return coeffs.size() == 0 || coeffs.imag().cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace detail

/// Schmidt decomposition of an operator given by its basis coefficients.
/// Real coefficients (Hermitian operator) take the real SVD path.
inline SchmidtDecomposition schmidt_from_coefficients(const CVector& coeffs, const Bipartition& cut,
                                                      int d) {
  if (coeffs.size() != ipow(d, 2 * cut.n_sites)) {
    throw DimensionError("schmidt_from_coefficients: coefficient length does not match the cut");
  }
  const auto corr = detail::correlation_view(coeffs, cut, d);
  if (detail::coefficients_real(coeffs)) {
    const Eigen::MatrixXd real = corr.real();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(real, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RVector s = svd.singularValues();
    detail::clamp_small(s);
    return SchmidtDecomposition(cut, d, std::move(s), svd.matrixU().cast<Complex>(),
                                svd.matrixV().cast<Complex>(), true);
  }
  const Eigen::MatrixXcd cplx = corr;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(cplx, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVector s = svd.singularValues();
  detail::clamp_small(s);
  // C = U S V^dagger, so the right coefficients are conj(V).
  return SchmidtDecomposition(cut, d, std::move(s), svd.matrixU(), svd.matrixV().conjugate(),
                              false);
}

/// Operator Schmidt decomposition across `cut`. The source must be
/// normalized unless `allow_unnormalized` is set, in which case
/// sum lambda_i^2 = ||O||_2^2 / D.
inline SchmidtDecomposition schmidt_decompose(const DenseOperator& op, const Bipartition& cut,
                                              bool allow_unnormalized = false) {
  if (cut.n_sites != op.n_sites()) {
    throw DimensionError("schmidt_decompose: bipartition is for " + std::to_string(cut.n_sites) +
                         " sites, operator has " + std::to_string(op.n_sites()));
  }
  if (!allow_unnormalized && !op.is_normalized()) {
    throw DomainError("schmidt_decompose: operator is not normalized");
  }
  return schmidt_from_coefficients(to_coefficients(op), cut, op.local_dim());
}

inline SchmidtDecomposition schmidt_decompose(const DenseOperator& op, int cut,
                                              bool allow_unnormalized = false) {
  return schmidt_decompose(op, Bipartition(op.n_sites(), cut), allow_unnormalized);
}

/// Coefficients of sum_{i <= chi} lambda_i A_i x B_i.
inline CVector truncated_coefficients(const SchmidtDecomposition& sd, Eigen::Index chi) {
  const auto& cut = sd.bipartition();
  const int d = sd.local_dim();
  CVector out(ipow(d, 2 * cut.n_sites));
  auto view = detail::correlation_view(out, cut, d);
  view.noalias() = sd.left_coefficients().leftCols(chi) *
                   sd.lambdas().head(chi).cast<Complex>().asDiagonal() *
                   sd.right_coefficients().leftCols(chi).transpose();
  return out;
}

/// Rank-chi reconstruction sum_{i <= chi} lambda_i A_i x B_i.
inline DenseOperator reconstruct(const SchmidtDecomposition& sd, Eigen::Index chi) {
  if (chi < 1 || chi > sd.length()) {
    throw DomainError("reconstruct: rank " + std::to_string(chi) + " outside 1.." +
                      std::to_string(sd.length()));
  }
  return DenseOperator(sd.n_sites(), sd.local_dim(),
                       from_coefficients(truncated_coefficients(sd, chi), sd.n_sites(),
                                         sd.local_dim()));
}

}  // namespace opent
