#pragma once

#include "opent/dense_operator.hpp"

#include <cmath>
#include <utility>

namespace opent {

/// Unit-norm Choi vector |O>> = (O x 1)|phi+>. Its component (j, i) is
/// O(j, i) / sqrt(D), so <<O1|O2>> = tr[O1^dagger O2] / D.
inline CVector vectorize(const DenseOperator& op, bool allow_unnormalized = false) {
  if (!allow_unnormalized && !op.is_normalized()) {
    throw DomainError("vectorize: operator is not normalized (||O||_2 != sqrt(D))");
  }
  const auto dim = op.dim();
  CVector v(dim * dim);
  Eigen::Map<CMatrix>(v.data(), dim, dim) = op.matrix() / std::sqrt(static_cast<double>(dim));
  return v;
}

/// Frobenius (Schatten-2) norm.
inline double hs_norm(const DenseOperator& op) { return op.hs_norm(); }

/// Largest singular value. Hermitian inputs go through the eigen-solver.
inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  const bool hermitian = (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

inline double spectral_norm(const DenseOperator& op) { return spectral_norm(op.matrix()); }

struct WorstCaseState {
  CVector state;
  double value;  // <psi|Delta|psi>, |value| = ||Delta||_inf
};

/// Eigenvector of a Hermitian Delta whose |eigenvalue| is maximal: the pure
/// state saturating |tr[Delta rho]| <= ||Delta||_inf.
inline WorstCaseState worst_case_state(const DenseOperator& delta) {
  if (!delta.is_hermitian()) throw DomainError("worst_case_state: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(delta.matrix());
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  const double top = ev.cwiseAbs().maxCoeff(&best);
  // Ties between +v and -v resolve to the positive eigenvalue.
  if (ev(ev.size() - 1) >= top * (1.0 - 1e-12)) best = ev.size() - 1;
  CVector psi = es.eigenvectors().col(best);
  const double value = (psi.adjoint() * delta.matrix() * psi)(0, 0).real();
  return {std::move(psi), value};
}

}  // namespace opent
