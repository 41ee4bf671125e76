#pragma once

#include "opent/entropy.hpp"
#include "opent/schmidt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace opent {

/// Errors and spectrum data for one truncation.
struct TruncationReport {
  std::vector<int> cuts;
  Eigen::Index chi = 0;
  double tail_sum = 0.0;             // sum_{i > chi} lambda_i^2
  double hs_error_normalized = 0.0;  // D^{-1/2} ||Delta O||_2
  double spectral_error = 0.0;       // ||Delta O||_inf
  double lambda_next = 0.0;          // lambda_{chi+1}, 0 past the end
  bool degenerate_cut_flag = false;  // lambda_chi == lambda_{chi+1} within 1e-12

  /// D^{-1/2}||X||_2 <= ||X||_inf <= ||X||_2, with slack.
  bool norm_sandwich_holds(Eigen::Index dim, double tol = 1e-9) const {
    return hs_error_normalized <= spectral_error + tol &&
           spectral_error <= std::sqrt(static_cast<double>(dim)) * hs_error_normalized + tol;
  }
};

/// Largest chi with lambda_chi >= cutoff; 0 if lambda_1 < cutoff.
inline Eigen::Index threshold_rank(const RVector& lambdas, double cutoff) {
  if (!(cutoff > 0.0)) throw DomainError("threshold_rank: cutoff must be positive");
  Eigen::Index chi = 0;
  while (chi < lambdas.size() && lambdas(chi) >= cutoff) ++chi;
  return chi;
}

struct ErrorPair {
  double spectral;
  double hs_normalized;
};

/// (||Delta O||_inf, D^{-1/2} ||Delta O||_2) for Delta O = original - approx.
inline ErrorPair truncation_errors(const DenseOperator& original, const DenseOperator& approx) {
  original.require_same_shape(approx, "truncation_errors");
  const CMatrix delta = original.matrix() - approx.matrix();
  return {spectral_norm(delta), delta.norm() / std::sqrt(static_cast<double>(original.dim()))};
}

namespace detail {

inline TruncationReport spectrum_report(const SchmidtDecomposition& sd, Eigen::Index chi) {
  TruncationReport rep;
  rep.cuts = {sd.bipartition().cut};
  rep.chi = chi;
  rep.tail_sum = tail_sum(sd.probabilities(), chi);
  rep.lambda_next = chi < sd.length() ? sd.lambdas()(chi) : 0.0;
  if (chi >= 1 && chi < sd.length()) {
    rep.degenerate_cut_flag =
        rep.lambda_next > 0.0 && sd.lambdas()(chi - 1) - rep.lambda_next <= 1e-12;
  }
  return rep;
}

}  // namespace detail

struct Truncated {
  DenseOperator op;
  TruncationReport report;
};

/// Rank-chi truncation across a single cut (chi = 0 gives the zero operator).
inline Truncated truncate_single_cut(const SchmidtDecomposition& sd, const DenseOperator& source,
                                     Eigen::Index chi) {
  if (chi < 0 || chi > sd.length()) {
    throw DomainError("truncate_single_cut: chi " + std::to_string(chi) + " outside 0.." +
                      std::to_string(sd.length()));
  }
  DenseOperator approx = chi == 0 ? DenseOperator::zero(sd.n_sites(), sd.local_dim())
                                  : reconstruct(sd, chi);
  auto rep = detail::spectrum_report(sd, chi);
  const auto err = truncation_errors(source, approx);
  rep.spectral_error = err.spectral;
  rep.hs_error_normalized = err.hs_normalized;
  return {std::move(approx), std::move(rep)};
}

inline Truncated truncate_single_cut(const DenseOperator& op, const Bipartition& cut, Eigen::Index chi) {
  return truncate_single_cut(schmidt_decompose(op, cut), op, chi);
}

/// P_n restricted to coefficient space: C -> U_chi U_chi^dagger C, with U
/// the left Schmidt coefficients of the operator defining the projector.
inline void project_coefficients(CVector& coeffs, const SchmidtDecomposition& sd, Eigen::Index chi) {
  auto view = detail::correlation_view(coeffs, sd.bipartition(), sd.local_dim());
  const auto u = sd.left_coefficients().leftCols(chi);
  const CMatrix overlap = u.adjoint() * view;
  view.noalias() = u * overlap;
}

/// Orthogonal projector P_n built from the first chi left factors of `sd`.
inline DenseOperator project_cut(const DenseOperator& x, const SchmidtDecomposition& sd, Eigen::Index chi) {
  if (!x.same_shape(DenseOperator::zero(sd.n_sites(), sd.local_dim()))) {
    throw DimensionError("project_cut: operator and decomposition disagree on the space");
  }
  if (chi < 0 || chi > sd.length()) throw DomainError("project_cut: chi out of range");
  CVector c = to_coefficients(x);
  project_coefficients(c, sd, chi);
  return DenseOperator(x.n_sites(), x.local_dim(), from_coefficients(std::move(c), x.n_sites(), x.local_dim()));
}

/// P_n(X) = d^{-n_a} sum_i A_i x tr_A[(A_i^dagger x 1_B) X], evaluated
/// directly on dense matrices. The A_i must satisfy tr[A_i^dagger A_j] =
/// d^{n_a} delta_ij.
inline DenseOperator project_cut(const DenseOperator& x, const Bipartition& cut,
                                 std::span<const CMatrix> kept_left_factors) {
  if (cut.n_sites != x.n_sites()) throw DimensionError("project_cut: bipartition size mismatch");
  const int d = x.local_dim();
  const Eigen::Index da = ipow(d, cut.n_a());
  const Eigen::Index db = ipow(d, cut.n_b());
  CMatrix out = CMatrix::Zero(x.dim(), x.dim());
  for (const auto& a : kept_left_factors) {
    if (a.rows() != da || a.cols() != da) throw DimensionError("project_cut: left factor has wrong shape");
    CMatrix reduced = CMatrix::Zero(db, db);
    for (Eigen::Index i = 0; i < da; ++i) {
      for (Eigen::Index k = 0; k < da; ++k) {
        const Complex w = std::conj(a(k, i));
        if (w == Complex(0.0)) continue;
        reduced += w * x.matrix().block(k * db, i * db, db, db);
      }
    }
    out += Eigen::kroneckerProduct(a, reduced).eval();
  }
  out /= static_cast<double>(da);
  return DenseOperator(x.n_sites(), d, std::move(out));
}

struct MpoOptions {
  bool compute_spectral = true;  // per-cut and total spectral errors
  bool verify_rank = true;       // Schmidt spectrum of the result at every cut
  double rank_tol = 1e-10;
};

struct MpoApproximation {
  DenseOperator op;
  /// Single-cut data for every cut n = 1..N-1 of the source operator.
  std::vector<TruncationReport> cut_reports;
  /// Total errors of the stitched approximation.
  TruncationReport total;
  /// sum_n ||O - P_n(O)||_2, the stitching upper bound on ||O - result||_2.
  double stitching_bound = 0.0;
  /// Largest lambda_{chi+1} of the result across all cuts.
  double rank_certificate = 0.0;
  bool rank_certified = true;
};

/// P_1(P_2(...P_{N-1}(O)...)) with every P_n built from the Schmidt
/// decomposition of the source across cut n.
inline MpoApproximation mpo_approximate(const DenseOperator& op, Eigen::Index chi,
                                        const MpoOptions& opts = {}) {
  if (chi < 1) throw DomainError("mpo_approximate: chi must be >= 1");
  const int n = op.n_sites();
  const int d = op.local_dim();
  const double sqrt_dim = std::sqrt(static_cast<double>(op.dim()));
  const CVector source = to_coefficients(op);
  CVector work = source;

  std::vector<TruncationReport> reports(static_cast<size_t>(std::max(n - 1, 0)));
  double stitching = 0.0;
  for (int cut = n - 1; cut >= 1; --cut) {
    const auto sd = schmidt_from_coefficients(source, Bipartition(n, cut), d);
    const Eigen::Index keep = std::min(chi, sd.length());
    auto rep = detail::spectrum_report(sd, keep);
    // ||O - P_n(O)||_2 = sqrt(D * tail) by orthonormality of the factors.
    rep.hs_error_normalized = std::sqrt(std::max(rep.tail_sum, 0.0));
    if (opts.compute_spectral) {
      const CMatrix single = from_coefficients(truncated_coefficients(sd, keep), n, d);
      rep.spectral_error = spectral_norm(CMatrix(op.matrix() - single));
    }
    stitching += sqrt_dim * rep.hs_error_normalized;
    reports[static_cast<size_t>(cut - 1)] = std::move(rep);
    project_coefficients(work, sd, keep);
  }

  MpoApproximation res{DenseOperator(n, d, from_coefficients(work, n, d)), std::move(reports), {}, stitching,
                       0.0, true};
  for (int cut = 1; cut < n; ++cut) res.total.cuts.push_back(cut);
  res.total.chi = chi;
  const CMatrix delta = op.matrix() - res.op.matrix();
  res.total.hs_error_normalized = delta.norm() / sqrt_dim;
  if (opts.compute_spectral) res.total.spectral_error = spectral_norm(delta);
  double worst_tail = 0.0;
  for (const auto& r : res.cut_reports) worst_tail = std::max(worst_tail, r.tail_sum);
  res.total.tail_sum = worst_tail;

  if (opts.verify_rank) {
    for (int cut = 1; cut < n; ++cut) {
      const auto sd = schmidt_from_coefficients(work, Bipartition(n, cut), d);
      if (chi < sd.length()) res.rank_certificate = std::max(res.rank_certificate, sd.lambdas()(chi));
    }
    res.rank_certified = res.rank_certificate <= opts.rank_tol;
  }
  return res;
}

struct FactorNormSummary {
  std::vector<double> values;  // descending
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double iqr() const { return q3 - q1; }
};

namespace detail {
// Linear interpolation between order statistics.
inline double quantile_sorted_ascending(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}
}  // namespace detail

inline FactorNormSummary summarize_norms(std::vector<double> values) {
  FactorNormSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = detail::quantile_sorted_ascending(values, 0.25);
  s.median = detail::quantile_sorted_ascending(values, 0.5);
  s.q3 = detail::quantile_sorted_ascending(values, 0.75);
  s.values.assign(values.rbegin(), values.rend());
  return s;
}

/// ||A_i x B_i||_inf = ||A_i||_inf ||B_i||_inf over the nonzero Schmidt values.
inline FactorNormSummary schmidt_factor_norms(const SchmidtDecomposition& sd) {
  std::vector<double> values;
  const auto r = sd.rank();
  values.reserve(static_cast<size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) {
    values.push_back(spectral_norm(sd.left_factor(i)) * spectral_norm(sd.right_factor(i)));
  }
  return summarize_norms(std::move(values));
}

/// MPO site tensors in the product Hermitian basis:
/// c_{p_1...p_N} = Lambda1[0, p_1, :] Lambda2[:, p_2, :] ... LambdaN[:, p_N, 0].
struct MpoTensors {
  int n_sites = 0;
  int local_dim = 2;
  std::vector<Eigen::Index> bond_dims;  // N+1 entries, first and last are 1
  std::vector<CVector> tensors;         // site l: (left, p, right) row-major

  CVector contract() const {
    const Eigen::Index d2 = static_cast<Eigen::Index>(local_dim) * local_dim;
    // Running matrix rows = flat prefix index, cols = right bond.
    CMatrix acc = CMatrix::Ones(1, 1);
    for (int l = 0; l < n_sites; ++l) {
      const Eigen::Index bl = bond_dims[static_cast<size_t>(l)];
      const Eigen::Index br = bond_dims[static_cast<size_t>(l) + 1];
      Eigen::Map<const CMatrix> t(tensors[static_cast<size_t>(l)].data(), bl, d2 * br);
      CMatrix next = acc * t;  // (prefix, p * br)
      acc = Eigen::Map<CMatrix>(next.data(), next.rows() * d2, br);
    }
    return Eigen::Map<CVector>(acc.data(), acc.size());
  }

  DenseOperator to_operator() const {
    return DenseOperator(n_sites, local_dim, from_coefficients(contract(), n_sites, local_dim));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "opent-mpo v1";
    j["n_sites"] = n_sites;
    j["local_dim"] = local_dim;
    j["bond_dims"] = bond_dims;
    std::vector<std::string> labels;
    for (int p = 0; p < local_dim * local_dim; ++p) labels.push_back(detail::cached_basis(local_dim).label(p));
    j["basis_labels"] = labels;
    j["index_order"] = "left,basis,right";
    auto& ts = j["tensors"];
    ts = nlohmann::json::array();
    for (int l = 0; l < n_sites; ++l) {
      const auto& t = tensors[static_cast<size_t>(l)];
      std::vector<double> re(static_cast<size_t>(t.size())), im(static_cast<size_t>(t.size()));
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        re[static_cast<size_t>(i)] = t(i).real();
        im[static_cast<size_t>(i)] = t(i).imag();
      }
      ts.push_back({{"site", l + 1},
                    {"shape", {bond_dims[static_cast<size_t>(l)], local_dim * local_dim,
                               bond_dims[static_cast<size_t>(l) + 1]}},
                    {"re", re},
                    {"im", im}});
    }
    return j;
  }

  static MpoTensors from_json(const nlohmann::json& j) {
    if (j.at("format") != "opent-mpo v1") throw ConfigError("MpoTensors: unknown format");
    MpoTensors m;
    m.n_sites = j.at("n_sites");
    m.local_dim = j.at("local_dim");
    m.bond_dims = j.at("bond_dims").get<std::vector<Eigen::Index>>();
    for (const auto& t : j.at("tensors")) {
      const auto re = t.at("re").get<std::vector<double>>();
      const auto im = t.at("im").get<std::vector<double>>();
      CVector v(static_cast<Eigen::Index>(re.size()));
      for (size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
      m.tensors.push_back(std::move(v));
    }
    return m;
  }
};

/// Site tensors of an operator by successive SVDs from the left, keeping
/// singular values above `tol` relative to the largest. Applied to an
/// mpo_approximate result, bond dimensions stay <= chi.
inline MpoTensors export_mpo(const DenseOperator& op, double tol = 1e-12) {
  const int n = op.n_sites();
  const int d = op.local_dim();
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  MpoTensors out;
  out.n_sites = n;
  out.local_dim = d;
  out.bond_dims.push_back(1);
  CVector rest = to_coefficients(op);
  Eigen::Index left = 1;
  for (int l = 0; l < n - 1; ++l) {
    const Eigen::Index rows = left * d2;
    const Eigen::Index cols = rest.size() / rows;
    const Eigen::MatrixXcd m = Eigen::Map<const CMatrix>(rest.data(), rows, cols);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > tol * std::max(s(0), 1e-300)) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    CMatrix u = svd.matrixU().leftCols(keep);
    out.tensors.emplace_back(Eigen::Map<CVector>(u.data(), u.size()));
    CMatrix r = s.head(keep).cast<Complex>().asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
    rest = Eigen::Map<CVector>(r.data(), r.size());
    left = keep;
    out.bond_dims.push_back(keep);
  }
  out.tensors.push_back(rest);
  out.bond_dims.push_back(1);
  return out;
}

}  // namespace opent
