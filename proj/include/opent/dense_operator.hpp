#pragma once

#include "opent/types.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace opent {

/// An operator on N qudits of local dimension d, stored densely as a
/// d^N x d^N matrix. Site 1 is the most significant tensor factor.
class DenseOperator {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kNormalizedTol = 1e-10;

  DenseOperator(int n_sites, int local_dim, CMatrix matrix)
      : n_sites_(n_sites), local_dim_(local_dim), matrix_(std::move(matrix)) {
    if (n_sites_ < 1) throw DimensionError("DenseOperator: n_sites must be >= 1");
    if (local_dim_ < 2) throw DimensionError("DenseOperator: local_dim must be >= 2");
    const auto dim = ipow(local_dim_, n_sites_);
    if (matrix_.rows() != dim || matrix_.cols() != dim) {
      throw DimensionError("DenseOperator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + ", expected " + std::to_string(dim) +
                           "x" + std::to_string(dim));
    }
    is_hermitian_ = hermiticity_defect() <= kHermitianTol;
  }

  static DenseOperator identity(int n_sites, int local_dim = 2) {
    const auto dim = ipow(local_dim, n_sites);
    return DenseOperator(n_sites, local_dim, CMatrix::Identity(dim, dim));
  }

  static DenseOperator zero(int n_sites, int local_dim = 2) {
    const auto dim = ipow(local_dim, n_sites);
    return DenseOperator(n_sites, local_dim, CMatrix::Zero(dim, dim));
  }

  int n_sites() const { return n_sites_; }
  int local_dim() const { return local_dim_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }
  bool is_hermitian() const { return is_hermitian_; }

  /// Max-entry deviation |M - M^dagger|.
  double hermiticity_defect() const {
    if (matrix_.size() == 0) return 0.0;
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  }

  double hs_norm() const { return matrix_.norm(); }

  /// True when ||O||_2 = sqrt(D) to relative tolerance 1e-10.
  bool is_normalized() const {
    const double target = std::sqrt(static_cast<double>(dim()));
    return std::abs(hs_norm() - target) <= kNormalizedTol * target;
  }

  /// Rescales to ||O||_2 = sqrt(D). Throws on the zero operator.
  DenseOperator normalized() const {
    const double n = hs_norm();
    if (n == 0.0) throw DomainError("DenseOperator::normalized: zero operator");
    return DenseOperator(n_sites_, local_dim_,
                         matrix_ * (std::sqrt(static_cast<double>(dim())) / n));
  }

  bool same_shape(const DenseOperator& other) const {
    return n_sites_ == other.n_sites_ && local_dim_ == other.local_dim_;
  }

  DenseOperator operator-(const DenseOperator& other) const {
    require_same_shape(other, "operator-");
    return DenseOperator(n_sites_, local_dim_, matrix_ - other.matrix_);
  }

  DenseOperator operator+(const DenseOperator& other) const {
    require_same_shape(other, "operator+");
    return DenseOperator(n_sites_, local_dim_, matrix_ + other.matrix_);
  }

  DenseOperator operator*(const DenseOperator& other) const {
    require_same_shape(other, "operator*");
    return DenseOperator(n_sites_, local_dim_, matrix_ * other.matrix_);
  }

  DenseOperator scaled(Complex s) const { return DenseOperator(n_sites_, local_dim_, matrix_ * s); }

  DenseOperator adjoint() const {
    return DenseOperator(n_sites_, local_dim_, matrix_.adjoint());
  }

  void require_same_shape(const DenseOperator& other, const char* what) const {
    if (!same_shape(other)) {
      throw DimensionError(std::string(what) + ": operators live on different spaces");
    }
  }

 private:
  int n_sites_;
  int local_dim_;
  CMatrix matrix_;
  bool is_hermitian_ = false;
};

/// A spatial cut after the first `cut` sites.
struct Bipartition {
  int n_sites;
  int cut;

  Bipartition(int n_sites_, int cut_) : n_sites(n_sites_), cut(cut_) {
    if (cut < 1 || cut > n_sites - 1) {
      throw DimensionError("Bipartition: cut " + std::to_string(cut) + " outside 1.." +
                           std::to_string(n_sites - 1));
    }
  }

  int n_a() const { return cut; }
  int n_b() const { return n_sites - cut; }

  static Bipartition half_chain(int n_sites) { return Bipartition(n_sites, n_sites / 2); }
};

}  // namespace opent
