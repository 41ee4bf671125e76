#pragma once

#include "opent/entropy.hpp"
#include "opent/schmidt.hpp"
#include "opent/truncation.hpp"

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace opent {

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal moved into Q.
inline CMatrix haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= mag > 0.0 ? rjj / mag : Complex(1.0);
  }
  return q;
}

/// How factors are randomized per sample.
///  - shared_haar_signed: one Haar pair (U, V) per sample shared by all
///    indices, times an independent random sign per index. The Schmidt
///    spectrum is preserved exactly and the summands are independent and
///    centered given (U, V).
///  - independent_haar: an independent Haar pair per index. Summands are
///    independent and centered for traceless factors, but the factors stop
///    being orthogonal, so the Schmidt spectrum is not preserved.
enum class ConjugationMode { shared_haar_signed, independent_haar };

struct EnsembleElementSpec {
  SchmidtDecomposition base;
  double l_bound = 1.0;
  std::uint64_t seed = 0;
  ConjugationMode mode = ConjugationMode::shared_haar_signed;
};

/// Dense base factors after validation.
struct PreparedEnsemble {
  EnsembleElementSpec spec;
  std::vector<CMatrix> left;    // A_i, i < rank
  std::vector<CMatrix> right;   // B_i
  std::vector<double> factor_norms;  // ||A_i x B_i||_inf
  /// sum of ||A_i - A_i'||_2 / sqrt(d_A) over factors made traceless.
  double centering_deviation = 0.0;
  int centered_factors = 0;

  Eigen::Index terms() const { return static_cast<Eigen::Index>(left.size()); }
  int n_sites() const { return spec.base.n_sites(); }
  double lambda(Eigen::Index i) const { return spec.base.lambdas()(i); }
};

/// Validates ||A_i x B_i||_inf <= L; in independent mode, factor pairs
/// with nonzero traces on both sides have the left factor projected to its
/// traceless part (renormalized), and the deviation is logged.
inline PreparedEnsemble prepare_ensemble(const EnsembleElementSpec& spec) {
  if (!(spec.l_bound >= 1.0)) throw ConfigError("ensemble: L must be >= 1");
  PreparedEnsemble p{spec, {}, {}, {}, 0.0, 0};
  const auto& sd = spec.base;
  const auto r = sd.rank();
  const double da = static_cast<double>(ipow(sd.local_dim(), sd.bipartition().n_a()));
  for (Eigen::Index i = 0; i < r; ++i) {
    CMatrix a = sd.left_factor(i);
    CMatrix b = sd.right_factor(i);
    const double norm = spectral_norm(a) * spectral_norm(b);
    if (norm > spec.l_bound + 1e-9) {
      throw ConfigError("ensemble: ||A_" + std::to_string(i + 1) + " x B_" + std::to_string(i + 1) +
                        "||_inf = " + std::to_string(norm) + " exceeds L = " + std::to_string(spec.l_bound));
    }
    if (spec.mode == ConjugationMode::independent_haar && std::abs(a.trace()) > 1e-12 &&
        std::abs(b.trace()) > 1e-12) {
      CMatrix centered = a - (a.trace() / da) * CMatrix::Identity(a.rows(), a.cols());
      const double n = centered.norm();
      if (n > 1e-12) {
        centered *= std::sqrt(da) / n;
        p.centering_deviation += (a - centered).norm() / std::sqrt(da);
        a = std::move(centered);
        ++p.centered_factors;
      }
    }
    p.factor_norms.push_back(norm);
    p.left.push_back(std::move(a));
    p.right.push_back(std::move(b));
  }
  return p;
}

/// L measured from the base factors.
inline double measured_l_bound(const SchmidtDecomposition& sd) {
  double l = 1.0;
  for (double v : schmidt_factor_norms(sd).values) l = std::max(l, v);
  return l;
}

namespace detail {

struct SampleTerms {
  std::vector<CMatrix> left;
  std::vector<CMatrix> right;
  std::vector<double> weights;  // lambda_i times the random sign
};

inline SampleTerms draw_terms(const PreparedEnsemble& p, std::uint64_t sample_index) {
  std::mt19937_64 rng(split_seed(p.spec.seed, sample_index));
  SampleTerms s;
  const auto n = p.terms();
  const auto da = p.left.empty() ? 1 : p.left.front().rows();
  const auto db = p.right.empty() ? 1 : p.right.front().rows();
  if (p.spec.mode == ConjugationMode::shared_haar_signed) {
    const CMatrix u = haar_unitary(da, rng);
    const CMatrix v = haar_unitary(db, rng);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < n; ++i) {
      s.left.push_back(u.adjoint() * p.left[static_cast<size_t>(i)] * u);
      s.right.push_back(v.adjoint() * p.right[static_cast<size_t>(i)] * v);
      s.weights.push_back(coin(rng) ? p.lambda(i) : -p.lambda(i));
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const CMatrix u = haar_unitary(da, rng);
      const CMatrix v = haar_unitary(db, rng);
      s.left.push_back(u.adjoint() * p.left[static_cast<size_t>(i)] * u);
      s.right.push_back(v.adjoint() * p.right[static_cast<size_t>(i)] * v);
      s.weights.push_back(p.lambda(i));
    }
  }
  return s;
}

inline CMatrix sum_terms(const SampleTerms& s, Eigen::Index from, Eigen::Index to, Eigen::Index dim) {
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = from; i < to; ++i) {
    out += s.weights[static_cast<size_t>(i)] *
           Eigen::kroneckerProduct(s.left[static_cast<size_t>(i)], s.right[static_cast<size_t>(i)]).eval();
  }
  return out;
}

}  // namespace detail

/// One ensemble element sum_i lambda_i A_i' x B_i'.
inline DenseOperator sample_element(const PreparedEnsemble& p, std::uint64_t sample_index) {
  const auto s = detail::draw_terms(p, sample_index);
  const auto& sd = p.spec.base;
  const Eigen::Index dim = ipow(sd.local_dim(), sd.n_sites());
  return DenseOperator(sd.n_sites(), sd.local_dim(), detail::sum_terms(s, 0, p.terms(), dim));
}

inline DenseOperator sample_element(const EnsembleElementSpec& spec, std::uint64_t sample_index = 0) {
  return sample_element(prepare_ensemble(spec), sample_index);
}

/// ||sum_{i > chi} lambda_i A_i' x B_i'||_inf for one sample.
inline double sample_truncation_error(const PreparedEnsemble& p, std::uint64_t sample_index, Eigen::Index chi) {
  const auto s = detail::draw_terms(p, sample_index);
  const auto& sd = p.spec.base;
  const Eigen::Index dim = ipow(sd.local_dim(), sd.n_sites());
  if (chi >= p.terms()) return 0.0;
  return spectral_norm(detail::sum_terms(s, chi, p.terms(), dim));
}

/// sqrt(2 nu log 2D) + L |lambda_{chi+1}| log(2D) / 3 with nu the tail sum.
inline double bernstein_expectation_bound(double tail_sum, double lambda_next, double l_bound, double dim) {
  if (tail_sum < 0.0 || l_bound < 0.0 || dim < 1.0) {
    throw DomainError("bernstein_expectation_bound: inputs must be nonnegative");
  }
  const double log2d = std::log(2.0 * dim);
  return std::sqrt(2.0 * tail_sum * log2d) + l_bound * std::abs(lambda_next) * log2d / 3.0;
}

/// c(d, alpha, L) = 2 (sqrt(log d) (1-alpha)^{(1-alpha)/(2alpha)} + L log(d) / 3).
inline double thm4_constant(int d, double alpha, double l_bound) {
  detail::require_sub_unit_alpha(alpha, "thm4_constant");
  const double logd = std::log(static_cast<double>(d));
  return 2.0 * (std::sqrt(logd) * std::pow(1.0 - alpha, (1.0 - alpha) / (2.0 * alpha)) + l_bound * logd / 3.0);
}

/// c N exp[((1-alpha) E - log chi) / (2 alpha)].
inline double thm4_bound(double e_alpha, double alpha, double chi, int n_sites, int d, double l_bound) {
  detail::require_positive_chi(chi, "thm4_bound");
  return thm4_constant(d, alpha, l_bound) * n_sites *
         std::exp(((1.0 - alpha) * e_alpha - std::log(chi)) / (2.0 * alpha));
}

/// Normalized spectra with lambda_i proportional to r^i, or flat.
inline RVector geometric_spectrum(Eigen::Index length, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("geometric_spectrum: ratio must be in (0,1]");
  RVector l(length);
  for (Eigen::Index i = 0; i < length; ++i) l(i) = std::pow(ratio, static_cast<double>(i));
  return l / l.norm();
}

inline RVector flat_spectrum(Eigen::Index length) { return RVector::Constant(length, 1.0 / std::sqrt(double(length))); }

/// Decomposition with the given spectrum and Pauli-string factors: A_i is
/// basis string i on the left block, B_i basis string (i + shift) mod m on
/// the right. With shift != 0 no term is identity on both sides.
inline SchmidtDecomposition synthetic_decomposition(const Bipartition& cut, const RVector& lambdas, int d = 2,
                                                    Eigen::Index shift = 1) {
  const Eigen::Index ma = ipow(d, 2 * cut.n_a());
  const Eigen::Index mb = ipow(d, 2 * cut.n_b());
  const Eigen::Index len = std::min(ma, mb);
  if (lambdas.size() > len) throw ConfigError("synthetic_decomposition: spectrum longer than the cut allows");
  for (Eigen::Index i = 1; i < lambdas.size(); ++i) {
    if (lambdas(i) > lambdas(i - 1)) throw ConfigError("synthetic_decomposition: spectrum must be descending");
  }
  RVector full = RVector::Zero(len);
  full.head(lambdas.size()) = lambdas;
  CMatrix left = CMatrix::Zero(ma, len);
  CMatrix right = CMatrix::Zero(mb, len);
  for (Eigen::Index i = 0; i < len; ++i) {
    left(i, i) = 1.0;
    right((i + shift) % mb, i) = 1.0;
  }
  return SchmidtDecomposition(cut, d, std::move(full), std::move(left), std::move(right), true);
}

struct RandmatCell {
  Eigen::Index chi = 0;
  int samples = 0;
  double empirical_mean = 0.0;  // mean ||Delta O||_inf
  double tail_sum = 0.0;
  double lambda_next = 0.0;
  double bernstein = 0.0;
  std::vector<std::pair<double, double>> thm4;  // (alpha, bound)
  double max_loe_deviation = 0.0;               // over samples, all alphas
  double second_moment_deviation = 0.0;         // ||mean A'^dagger A' - 1||_inf, worst index
};

/// Monte Carlo over `samples` elements at one chi.
inline RandmatCell randmat_cell(const PreparedEnsemble& p, Eigen::Index chi, int samples,
                                const std::vector<double>& alphas, bool check_loe = true) {
  if (samples <= 0) throw ConfigError("randmat: samples must be positive");
  const auto& sd = p.spec.base;
  const Eigen::Index dim = ipow(sd.local_dim(), sd.n_sites());
  RandmatCell cell;
  cell.chi = chi;
  cell.samples = samples;
  const RVector probs = sd.probabilities();
  cell.tail_sum = tail_sum(probs, std::min(chi, sd.length()));
  cell.lambda_next = chi < sd.length() ? sd.lambdas()(chi) : 0.0;
  const double l_bound = p.spec.l_bound;
  cell.bernstein = bernstein_expectation_bound(cell.tail_sum, cell.lambda_next, l_bound, static_cast<double>(dim));
  const Distribution base_dist(probs);
  for (double a : alphas) {
    if (a > 0.0 && a < 1.0) {
      cell.thm4.emplace_back(a, thm4_bound(renyi_entropy(base_dist, a), a, static_cast<double>(chi), sd.n_sites(),
                                           sd.local_dim(), l_bound));
    }
  }
  std::vector<CMatrix> second(static_cast<size_t>(p.terms()));
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto terms = detail::draw_terms(p, static_cast<std::uint64_t>(s));
    if (chi < p.terms()) acc += spectral_norm(detail::sum_terms(terms, chi, p.terms(), dim));
    for (Eigen::Index i = 0; i < p.terms(); ++i) {
      const auto& a = terms.left[static_cast<size_t>(i)];
      CMatrix aa = a.adjoint() * a;
      auto& slot = second[static_cast<size_t>(i)];
      if (slot.size() == 0) slot = CMatrix::Zero(aa.rows(), aa.cols());
      slot += aa;
    }
    if (check_loe) {
      const CMatrix full = detail::sum_terms(terms, 0, p.terms(), dim);
      const auto sample_sd = schmidt_decompose(DenseOperator(sd.n_sites(), sd.local_dim(), full),
                                               sd.bipartition(), true);
      // Independent conjugation does not preserve the norm; compare shapes.
      const RVector sp = sample_sd.probabilities();
      const Distribution dist(RVector(sp / sp.sum()));
      for (double a : alphas) {
        cell.max_loe_deviation =
            std::max(cell.max_loe_deviation, std::abs(renyi_entropy(dist, a) - renyi_entropy(base_dist, a)));
      }
    }
  }
  cell.empirical_mean = acc / samples;
  for (auto& m : second) {
    if (m.size() == 0) continue;
    m /= static_cast<double>(samples);
    cell.second_moment_deviation = std::max(
        cell.second_moment_deviation, spectral_norm(CMatrix(m - CMatrix::Identity(m.rows(), m.cols()))));
  }
  return cell;
}

}  // namespace opent
