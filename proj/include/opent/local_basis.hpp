#pragma once

#include "opent/dense_operator.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace opent {

/// Hermitian orthogonal operator basis for a single qudit: the identity
/// followed by the generalized Gell-Mann matrices, each scaled so that
/// tr[G_p^dagger G_q] = d delta_pq. For d = 2 this is (1, sx, sy, sz).
class LocalBasis {
 public:
  explicit LocalBasis(int d) : d_(d) {
    if (d < 2) throw DimensionError("LocalBasis: d must be >= 2");
    const double scale = std::sqrt(d / 2.0);
    elements_.push_back(CMatrix::Identity(d, d));
    labels_.push_back("I");
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        CMatrix sym = CMatrix::Zero(d, d);
        sym(j, k) = sym(k, j) = scale;
        elements_.push_back(sym);
        labels_.push_back(d == 2 ? "X" : "S" + std::to_string(j) + std::to_string(k));
        CMatrix asym = CMatrix::Zero(d, d);
        asym(j, k) = Complex(0.0, -scale);
        asym(k, j) = Complex(0.0, scale);
        elements_.push_back(asym);
        labels_.push_back(d == 2 ? "Y" : "A" + std::to_string(j) + std::to_string(k));
      }
    }
    for (int l = 1; l < d; ++l) {
      CMatrix diag = CMatrix::Zero(d, d);
      const double c = scale * std::sqrt(2.0 / (l * (l + 1.0)));
      for (int j = 0; j < l; ++j) diag(j, j) = c;
      diag(l, l) = -c * l;
      elements_.push_back(diag);
      labels_.push_back(d == 2 ? "Z" : "D" + std::to_string(l));
    }

    const int d2 = d * d;
    analysis_ = CMatrix::Zero(d2, d2);
    synthesis_ = CMatrix::Zero(d2, d2);
    for (int p = 0; p < d2; ++p) {
      for (int s = 0; s < d; ++s) {
        for (int sp = 0; sp < d; ++sp) {
          // c_p = tr[G_p O] / d = sum_{s s'} G_p(s', s) O(s, s') / d
          analysis_(p, s * d + sp) = elements_[p](sp, s) / static_cast<double>(d);
          synthesis_(s * d + sp, p) = elements_[p](s, sp);
        }
      }
    }
  }

  int d() const { return d_; }
  int size() const { return d_ * d_; }
  const CMatrix& element(int p) const { return elements_.at(p); }
  const std::string& label(int p) const { return labels_.at(p); }

  /// Maps a doubled-site index (s, s') to basis coefficients.
  const CMatrix& analysis() const { return analysis_; }
  /// Inverse of analysis().
  const CMatrix& synthesis() const { return synthesis_; }

 private:
  int d_;
  std::vector<CMatrix> elements_;
  std::vector<std::string> labels_;
  CMatrix analysis_;
  CMatrix synthesis_;
};

namespace detail {

inline const LocalBasis& cached_basis(int d) {
  static const LocalBasis b2(2), b3(3), b4(4);
  switch (d) {
    case 2: return b2;
    case 3: return b3;
    case 4: return b4;
    default: throw DimensionError("local dimension " + std::to_string(d) + " unsupported (d <= 4)");
  }
}

// spread(x) places the base-d digits of x at base-d^2 positions.
inline std::vector<Eigen::Index> digit_spread(int n_sites, int d) {
  const auto dim = ipow(d, n_sites);
  std::vector<Eigen::Index> out(static_cast<size_t>(dim));
  const std::int64_t d2 = static_cast<std::int64_t>(d) * d;
  for (std::int64_t x = 0; x < dim; ++x) {
    std::int64_t rem = x, v = 0, place = 1;
    for (int k = 0; k < n_sites; ++k) {
      v += (rem % d) * place;
      rem /= d;
      place *= d2;
    }
    out[static_cast<size_t>(x)] = v;
  }
  return out;
}

// Applies `m` (d^2 x d^2) along every site axis of a (d^2)^N tensor in place.
inline void apply_on_each_site(CVector& tensor, int n_sites, int d, const CMatrix& m) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  using Block = Eigen::Map<CMatrix>;
  CMatrix scratch;
  for (int k = 0; k < n_sites; ++k) {
    const Eigen::Index outer = ipow(d2, k);
    const Eigen::Index inner = ipow(d2, n_sites - k - 1);
    for (Eigen::Index o = 0; o < outer; ++o) {
      Block blk(tensor.data() + o * d2 * inner, d2, inner);
      scratch.noalias() = m * blk;
      blk = scratch;
    }
  }
}

}  // namespace detail

/// Coefficients c_p = tr[(G_{p_1} x ... x G_{p_N}) O] / D of an operator in
/// the product Hermitian basis. The flat index runs over (p_1, ..., p_N) with
/// site 1 most significant, so reshaping to (d^{2n}) x (d^{2(N-n)}) row-major
/// gives the correlation matrix across cut n. sum |c_p|^2 = ||O||_2^2 / D.
inline CVector to_coefficients(const CMatrix& op, int n_sites, int d) {
  const auto dim = ipow(d, n_sites);
  if (op.rows() != dim || op.cols() != dim) throw DimensionError("to_coefficients: shape");
  const auto spread = detail::digit_spread(n_sites, d);
  CVector t(dim * dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Eigen::Index sr = d * spread[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < dim; ++c) t(sr + spread[static_cast<size_t>(c)]) = op(r, c);
  }
  detail::apply_on_each_site(t, n_sites, d, detail::cached_basis(d).analysis());
  return t;
}

inline CVector to_coefficients(const DenseOperator& op) {
  return to_coefficients(op.matrix(), op.n_sites(), op.local_dim());
}

/// Inverse of to_coefficients: O = sum_p c_p G_{p_1} x ... x G_{p_N}.
inline CMatrix from_coefficients(CVector coeffs, int n_sites, int d) {
  const auto dim = ipow(d, n_sites);
  if (coeffs.size() != dim * dim) throw DimensionError("from_coefficients: length");
  detail::apply_on_each_site(coeffs, n_sites, d, detail::cached_basis(d).synthesis());
  const auto spread = detail::digit_spread(n_sites, d);
  CMatrix op(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Eigen::Index sr = d * spread[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < dim; ++c) op(r, c) = coeffs(sr + spread[static_cast<size_t>(c)]);
  }
  return op;
}

/// Product basis element G_{p_1} x ... x G_{p_N} for a flat index.
inline CMatrix basis_string(Eigen::Index flat_index, int n_sites, int d) {
  const auto& basis = detail::cached_basis(d);
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  CMatrix out = CMatrix::Ones(1, 1);
  for (int k = 0; k < n_sites; ++k) {
    const auto p = (flat_index / ipow(d2, n_sites - k - 1)) % d2;
    out = Eigen::kroneckerProduct(out, basis.element(static_cast<int>(p))).eval();
  }
  return out;
}

/// Label such as "IXZY" for a flat basis index.
inline std::string basis_label(Eigen::Index flat_index, int n_sites, int d) {
  const auto& basis = detail::cached_basis(d);
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  std::string out;
  for (int k = 0; k < n_sites; ++k) {
    const auto p = (flat_index / ipow(d2, n_sites - k - 1)) % d2;
    if (k > 0 && d > 2) out += '.';
    out += basis.label(static_cast<int>(p));
  }
  return out;
}

}  // namespace opent
