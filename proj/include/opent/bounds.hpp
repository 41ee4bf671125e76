#pragma once

#include "opent/circuits.hpp"
#include "opent/entropy.hpp"
#include "opent/norms.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace opent {

enum class Theorem { T1_entropy1, T1_alpha, T2, T2_chi, T3, T4 };

inline std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::T1_entropy1: return "T1_entropy1";
    case Theorem::T1_alpha: return "T1_alpha";
    case Theorem::T2: return "T2";
    case Theorem::T2_chi: return "T2_chi";
    case Theorem::T3: return "T3";
    case Theorem::T4: return "T4";
  }
  return "?";
}

/// Whether a theorem asserts lhs >= rhs (true) or lhs <= rhs (false).
inline bool lower_bound_theorem(Theorem t) {
  return t == Theorem::T1_entropy1 || t == Theorem::T1_alpha;
}

/// One evaluated inequality. For T1 checks lhs = log(chi) and rhs is the
/// floor; for the others lhs is a measured error and rhs the ceiling.
struct BoundCheck {
  static constexpr double kSlack = 1e-9;

  Theorem theorem;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  std::map<std::string, double> params;
  // Row context for CSV output.
  int t = 0;
  std::string model;

  static BoundCheck make(Theorem th, double lhs, double rhs, std::map<std::string, double> params = {}) {
    BoundCheck c{th, lhs, rhs, false, std::move(params), 0, {}};
    c.satisfied = lower_bound_theorem(th) ? lhs >= rhs - kSlack : lhs <= rhs + kSlack;
    return c;
  }

  double param(const std::string& key, double fallback = std::nan("")) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

// ---------------------------------------------------------------------------
// Theorem 1: worst-case expectation values.

/// E^(1) - eps N log d - 1.
inline double thm1_entropy1_floor(double e1, double epsilon, int n_sites, int d) {
  if (!(epsilon >= 0.0)) throw DomainError("thm1: epsilon must be >= 0");
  return e1 - epsilon * n_sites * std::log(static_cast<double>(d)) - 1.0;
}

/// E^(alpha) + alpha log(1 - eps^2) / (alpha - 1); alpha = infinity uses the
/// limit ratio 1.
inline double thm1_alpha_floor(double e_alpha, double alpha, double epsilon) {
  if (!(alpha > 1.0)) throw DomainError("thm1: alpha must be > 1");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("thm1: epsilon must lie in [0,1)");
  const double ratio = std::isinf(alpha) ? 1.0 : alpha / (alpha - 1.0);
  return e_alpha + ratio * std::log(1.0 - epsilon * epsilon);
}

/// Lower bound on log(chi): the larger of the two floors.
inline double thm1_chi_floor(double e1, double e_alpha, double alpha, double epsilon, int n_sites, int d) {
  return std::max(thm1_entropy1_floor(e1, epsilon, n_sites, d), thm1_alpha_floor(e_alpha, alpha, epsilon));
}

// ---------------------------------------------------------------------------
// Theorem 2: low-average ensembles.

/// (1-alpha)/(2 alpha) (E - log(chi/(1-alpha))), shared by Thms 2 and 3.
inline double sub_unit_exponent(double e_alpha, double alpha, double chi) {
  detail::require_sub_unit_alpha(alpha, "bound");
  detail::require_positive_chi(chi, "bound");
  return (1.0 - alpha) / (2.0 * alpha) * (e_alpha - std::log(chi / (1.0 - alpha)));
}

/// N b^{1/2} exp[((1-alpha)/(2alpha))(E - log(chi/(1-alpha)))]; with
/// `n_minus_one` the prefactor is N-1 as produced by the stitching argument.
inline double thm2_error_ceiling(double e_alpha, double alpha, double chi, int n_sites, double b,
                                 bool n_minus_one = false) {
  if (!(b >= 1.0)) throw DomainError("thm2_error_ceiling: b must be >= 1");
  const double prefactor = n_minus_one ? n_sites - 1.0 : static_cast<double>(n_sites);
  return prefactor * std::sqrt(b) * std::exp(sub_unit_exponent(e_alpha, alpha, chi));
}

/// chi = N^c (1-alpha) (b N^2 / eps^2)^{alpha/(1-alpha)}: bond dimension
/// sufficient for average error eps when E^(alpha) <= c log N.
inline double thm2_chi_sufficient(double c_log, double alpha, double b, int n_sites, double epsilon) {
  detail::require_sub_unit_alpha(alpha, "thm2_chi_sufficient");
  if (!(epsilon > 0.0)) throw DomainError("thm2_chi_sufficient: epsilon must be positive");
  const double n = n_sites;
  return std::pow(n, c_log) * (1.0 - alpha) * std::pow(b * n * n / (epsilon * epsilon), alpha / (1.0 - alpha));
}

enum class EnsembleKind { single_state, computational_basis_uniform, haar_states };

/// Ensemble of states with ||mean rho||_inf <= b / D.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::computational_basis_uniform;
  int n_sites = 1;
  double b_bound = 1.0;
  /// Density matrix for single_state; maximally mixed when empty.
  std::optional<CMatrix> state;

  Eigen::Index dim() const { return ipow(2, n_sites); }
};

struct AverageError {
  double mean_abs;
  double rms;
};

namespace detail {

inline CVector haar_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace detail

/// Mean |tr[Delta O X rho]| and its root mean square over rho ~ ensemble.
/// Basis-state ensembles with D <= 4096 are enumerated exactly.
inline AverageError avg_expectation_error(const DenseOperator& original, const DenseOperator& approx,
                                          const DenseOperator& x_op, const EnsembleSpec& ensemble,
                                          int samples = 0, std::uint64_t seed = 0) {
  original.require_same_shape(approx, "avg_expectation_error");
  original.require_same_shape(x_op, "avg_expectation_error");
  if (!x_op.is_normalized()) throw DomainError("avg_expectation_error: X must be normalized");
  if (spectral_norm(x_op) > 1.0 + 1e-9) throw DomainError("avg_expectation_error: X must satisfy ||X||_inf <= 1");
  const CMatrix m = (original.matrix() - approx.matrix()) * x_op.matrix();
  const Eigen::Index dim = m.rows();

  switch (ensemble.kind) {
    case EnsembleKind::single_state: {
      const Complex v = ensemble.state ? (m * *ensemble.state).trace()
                                       : m.trace() / static_cast<double>(dim);
      return {std::abs(v), std::abs(v)};
    }
    case EnsembleKind::computational_basis_uniform: {
      if (dim <= 4096 || samples <= 0) {
        double s1 = 0.0, s2 = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
          const double a = std::abs(m(i, i));
          s1 += a;
          s2 += a * a;
        }
        return {s1 / static_cast<double>(dim), std::sqrt(s2 / static_cast<double>(dim))};
      }
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<Eigen::Index> pick(0, dim - 1);
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < samples; ++k) {
        const Eigen::Index i = pick(rng);
        const double a = std::abs(m(i, i));
        s1 += a;
        s2 += a * a;
      }
      return {s1 / samples, std::sqrt(s2 / samples)};
    }
    case EnsembleKind::haar_states: {
      if (samples <= 0) throw DomainError("avg_expectation_error: Haar ensemble needs samples > 0");
      std::mt19937_64 rng(seed);
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < samples; ++k) {
        const CVector psi = detail::haar_state(dim, rng);
        const double a = std::abs(psi.dot(m * psi));
        s1 += a;
        s2 += a * a;
      }
      return {s1 / samples, std::sqrt(s2 / samples)};
    }
  }
  throw DomainError("avg_expectation_error: unknown ensemble");
}

/// D ||mean rho||_inf, the smallest admissible b.
inline double ensemble_first_moment_bound(const EnsembleSpec& ensemble, int samples = 0, std::uint64_t seed = 0) {
  const Eigen::Index dim = ensemble.dim();
  switch (ensemble.kind) {
    case EnsembleKind::computational_basis_uniform: return 1.0;
    case EnsembleKind::single_state:
      if (!ensemble.state) return 1.0;
      return static_cast<double>(dim) * spectral_norm(*ensemble.state);
    case EnsembleKind::haar_states: {
      if (samples <= 0) throw DomainError("ensemble_first_moment_bound: Haar ensemble needs samples > 0");
      std::mt19937_64 rng(seed);
      CMatrix mean = CMatrix::Zero(dim, dim);
      for (int k = 0; k < samples; ++k) {
        const CVector psi = detail::haar_state(dim, rng);
        mean += psi * psi.adjoint();
      }
      mean /= static_cast<double>(samples);
      return static_cast<double>(dim) * spectral_norm(mean);
    }
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Theorem 3: OTOCs.

struct OtocValue {
  double value;         // real part
  double imag_residue;  // |imaginary part|
  bool flagged;         // Hermitian inputs with imag_residue > 1e-10
};

inline CMatrix matrix_power(const CMatrix& m, int k) {
  CMatrix out = CMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

/// D^{-1} tr[(O X)^k].
inline OtocValue otoc(const DenseOperator& op, const DenseOperator& x_op, int k) {
  if (k < 2) throw DomainError("otoc: k must be >= 2");
  op.require_same_shape(x_op, "otoc");
  const Complex v = matrix_power(op.matrix() * x_op.matrix(), k).trace() / static_cast<double>(op.dim());
  const double residue = std::abs(v.imag());
  return {v.real(), residue, op.is_hermitian() && x_op.is_hermitian() && residue > 1e-10};
}

/// Geometric prefactor (x^{k-1} - 1)/(x - 1) + 1, equal to k at x = 1.
inline double thm3_prefactor(double approx_opnorm, int k) {
  if (k < 2) throw DomainError("thm3: k must be >= 2");
  if (std::abs(approx_opnorm - 1.0) < 1e-9) return static_cast<double>(k);
  return (std::pow(approx_opnorm, k - 1) - 1.0) / (approx_opnorm - 1.0) + 1.0;
}

inline double thm3_bound(double e_alpha, double alpha, double chi, int n_sites, int k, double approx_opnorm) {
  if (!(approx_opnorm >= 0.0)) throw DomainError("thm3_bound: negative operator norm");
  return n_sites * thm3_prefactor(approx_opnorm, k) * std::exp(sub_unit_exponent(e_alpha, alpha, chi));
}

/// |Delta OTOC^(k) - D^{-1} sum_j tr[(OX)^j Delta O X (O~X)^{k-1-j}]|.
inline double otoc_telescope_check(const DenseOperator& original, const DenseOperator& approx,
                                   const DenseOperator& x_op, int k) {
  if (k < 2) throw DomainError("otoc_telescope_check: k must be >= 2");
  original.require_same_shape(approx, "otoc_telescope_check");
  original.require_same_shape(x_op, "otoc_telescope_check");
  const double dim = static_cast<double>(original.dim());
  const CMatrix ox = original.matrix() * x_op.matrix();
  const CMatrix ax = approx.matrix() * x_op.matrix();
  const Complex direct = (matrix_power(ox, k).trace() - matrix_power(ax, k).trace()) / dim;
  const CMatrix dx = (original.matrix() - approx.matrix()) * x_op.matrix();
  Complex sum = 0.0;
  CMatrix left = CMatrix::Identity(ox.rows(), ox.cols());
  for (int j = 0; j < k; ++j) {
    sum += (left * dx * matrix_power(ax, k - 1 - j)).trace();
    left = left * ox;
  }
  return std::abs(direct - sum / dim);
}

/// A uniformly random non-identity Pauli string on n qubits.
inline DenseOperator random_pauli_string(int n_sites, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
  std::string label;
  do {
    label.clear();
    for (int i = 0; i < n_sites; ++i) label += kNames[pick(rng)];
  } while (label.find_first_not_of('I') == std::string::npos);
  return pauli_string(label);
}

}  // namespace opent
