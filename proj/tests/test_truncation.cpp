#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace opent;

namespace {

DenseOperator swap_op() {
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = s(1, 2) = s(2, 1) = 1;
  return DenseOperator(2, 2, s);
}

/// Dense P_n(X) from the explicit partial-trace formula, written out with
/// index loops as an independent check of project_cut.
CMatrix dense_projector(const CMatrix& x, int n_sites, int cut, const std::vector<CMatrix>& kept) {
  const auto da = ipow(2, cut), db = ipow(2, n_sites - cut);
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (const auto& a : kept) {
    CMatrix b = CMatrix::Zero(db, db);  // tr_A[(A^dagger x 1) X]
    for (Eigen::Index i = 0; i < da; ++i) {
      for (Eigen::Index k = 0; k < da; ++k) {
        const Complex aik = std::conj(a(k, i));
        if (aik == Complex(0)) continue;
        b += aik * x.block(k * db, i * db, db, db);
      }
    }
    out += Eigen::kroneckerProduct(a, b).eval();
  }
  return out / static_cast<double>(da);
}

}  // namespace

TEST(ThresholdRank, Examples) {
  RVector l(3);
  l << 0.9, 0.3, 0.01;
  EXPECT_EQ(threshold_rank(l, 0.02), 2);
  EXPECT_EQ(threshold_rank(l, 0.95), 0);
  EXPECT_EQ(threshold_rank(l, 0.01), 3);
  EXPECT_THROW(threshold_rank(l, 0.0), DomainError);
}

TEST(TruncationErrors, Examples) {
  const auto z = pauli_string("Z");
  const auto e0 = truncation_errors(z, z);
  EXPECT_EQ(e0.spectral, 0.0);
  EXPECT_EQ(e0.hs_normalized, 0.0);
  const auto e1 = truncation_errors(z, DenseOperator::zero(1));
  EXPECT_NEAR(e1.spectral, 1.0, 1e-14);
  EXPECT_NEAR(e1.hs_normalized, 1.0, 1e-14);
  EXPECT_THROW(truncation_errors(z, DenseOperator::zero(2)), DimensionError);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto a = oracle::random_hermitian(3, rng), b = oracle::random_hermitian(3, rng);
    const auto e = truncation_errors(a, b);
    EXPECT_GE(e.spectral, e.hs_normalized - 1e-12);
  }
}

TEST(TruncateSingleCut, SwapAndFullRank) {
  const auto tr = truncate_single_cut(swap_op(), Bipartition(2, 1), 2);
  EXPECT_NEAR(tr.report.hs_error_normalized, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(tr.report.tail_sum, 0.5, 1e-12);
  EXPECT_TRUE(tr.report.degenerate_cut_flag);
  EXPECT_TRUE(tr.report.norm_sandwich_holds(4));
  const auto full = truncate_single_cut(swap_op(), Bipartition(2, 1), 4);
  EXPECT_LT(full.report.spectral_error, 1e-12);
  EXPECT_LT(full.report.hs_error_normalized, 1e-12);
  EXPECT_THROW(truncate_single_cut(swap_op(), Bipartition(2, 1), 5), DomainError);
}

TEST(TruncateSingleCut, ReportInvariantsOnEvolvedOperators) {
  const auto traj = evolve(initial_local_z(6), ModelSpec::kim(), 8);
  for (const auto& s : traj) {
    const auto sd = schmidt_decompose(s.op, Bipartition(6, 3));
    for (Eigen::Index chi = 0; chi <= 16; chi += 2) {
      const auto tr = truncate_single_cut(sd, s.op, chi);
      EXPECT_NEAR(tr.report.hs_error_normalized * tr.report.hs_error_normalized, tr.report.tail_sum, 1e-8);
      EXPECT_TRUE(tr.report.norm_sandwich_holds(s.op.dim()));
      EXPECT_LT(tr.op.hermiticity_defect(), 1e-10);
    }
  }
}

TEST(TruncateSingleCut, SvdBeatsRotatedAnsatz) {
  std::mt19937_64 rng(13);
  const auto op = oracle::random_hermitian(4, rng);
  const Bipartition cut(4, 2);
  const auto sd = schmidt_decompose(op, cut);
  const Eigen::Index chi = 3;
  const double best = truncate_single_cut(sd, op, chi).report.hs_error_normalized;
  for (int s = 0; s < 100; ++s) {
    // Rotate the left Schmidt frame by a random unitary and keep the best
    // rank-chi fit inside the first chi rotated columns.
    CMatrix rnd = oracle::random_complex(sd.length(), rng) * 0.3;
    CMatrix h = (rnd + rnd.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    CMatrix rot = es.eigenvectors() *
                  es.eigenvalues().unaryExpr([](double x) { return std::exp(Complex(0, x)); }).asDiagonal() *
                  es.eigenvectors().adjoint();
    const CMatrix u = sd.left_coefficients() * rot;
    const CVector c = to_coefficients(op);
    auto corr = detail::correlation_view(c, cut, 2);
    const CMatrix uk = u.leftCols(chi);
    const CMatrix approx = uk * (uk.adjoint() * corr);  // best fit within the rotated left span
    const double err = (CMatrix(corr) - approx).norm();
    EXPECT_GE(err, best - 1e-10);
  }
}

TEST(ProjectCut, IdentityMapWhenAllKept) {
  std::mt19937_64 rng(2);
  const auto op = oracle::random_hermitian(4, rng);
  const auto sd = schmidt_decompose(op, 2);
  const auto x = oracle::random_hermitian(4, rng);
  EXPECT_LT((project_cut(x, sd, sd.length()).matrix() - x.matrix()).norm(), 1e-10);
}

TEST(ProjectCut, MatchesDenseFormulaIdempotentContractive) {
  std::mt19937_64 rng(3);
  const auto src = evolve(initial_local_z(6), ModelSpec::xxz(), 4).back().op;
  for (int cut = 1; cut < 6; ++cut) {
    const auto sd = schmidt_decompose(src, cut);
    for (Eigen::Index chi : {1, 2, 4}) {
      std::vector<CMatrix> kept;
      for (Eigen::Index i = 0; i < chi; ++i) kept.push_back(sd.left_factor(i));
      const auto x = oracle::random_hermitian(6, rng);
      const auto px = project_cut(x, sd, chi);
      const auto px_dense = project_cut(x, Bipartition(6, cut), kept);
      const CMatrix ref = dense_projector(x.matrix(), 6, cut, kept);
      EXPECT_LT((px.matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((px_dense.matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((project_cut(px, sd, chi).matrix() - px.matrix()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LE(px.hs_norm(), x.hs_norm() + 1e-10);
    }
  }
}

TEST(Mpo, ExactWhenChiLarge) {
  const auto op = evolve(initial_local_z(6), ModelSpec::kim(), 3).back().op;
  const auto res = mpo_approximate(op, 64);
  EXPECT_LT((res.op.matrix() - op.matrix()).norm(), 1e-9);
  const auto prod = pauli_string("XZYIZX");
  EXPECT_LT((mpo_approximate(prod, 1).op.matrix() - prod.matrix()).norm(), 1e-10);
  EXPECT_THROW(mpo_approximate(op, 0), DomainError);
}

TEST(Mpo, StitchingRankAndOrder) {
  for (const auto& model : {ModelSpec::xxz(), ModelSpec::kim()}) {
    const auto op = evolve(initial_local_z(6), model, 8).back().op;
    for (Eigen::Index chi : {1, 2, 4, 8}) {
      const auto res = mpo_approximate(op, chi);
      EXPECT_TRUE(res.rank_certified) << res.rank_certificate;
      const double lhs = (op.matrix() - res.op.matrix()).norm();
      EXPECT_LE(lhs, res.stitching_bound + 1e-10);
      EXPECT_TRUE(res.total.norm_sandwich_holds(op.dim()));
      // Independent composition with the dense projector, right to left.
      CMatrix x = op.matrix();
      for (int cut = 5; cut >= 1; --cut) {
        const auto sd = schmidt_decompose(op, cut);
        std::vector<CMatrix> kept;
        for (Eigen::Index i = 0; i < std::min(chi, sd.length()); ++i) kept.push_back(sd.left_factor(i));
        x = dense_projector(x, 6, cut, kept);
      }
      EXPECT_LT((x - res.op.matrix()).cwiseAbs().maxCoeff(), 1e-9);
      for (int cut = 1; cut < 6; ++cut) {
        const auto sd = schmidt_decompose(res.op, cut, true);
        if (chi < sd.length()) EXPECT_LE(sd.lambdas()(chi), 1e-10);
      }
    }
  }
}

TEST(FactorNorms, IdentityAndBounds) {
  const auto id = schmidt_factor_norms(schmidt_decompose(DenseOperator::identity(4), 2));
  ASSERT_EQ(id.values.size(), 1u);
  EXPECT_NEAR(id.values[0], 1.0, 1e-12);
  const auto op = evolve(initial_local_z(6), ModelSpec::xxz(), 6).back().op;
  const auto s = schmidt_factor_norms(schmidt_decompose(op, 3));
  EXPECT_LE(s.max, 8.0 + 1e-8);
  EXPECT_LE(s.min, s.q1);
  EXPECT_LE(s.q1, s.median);
  EXPECT_LE(s.median, s.q3);
  EXPECT_LE(s.q3, s.max);
  for (std::size_t i = 1; i < s.values.size(); ++i) EXPECT_LE(s.values[i], s.values[i - 1]);
}

TEST(FactorNorms, TfimNearUnit) {
  const auto op = evolve(initial_local_z(8), ModelSpec::tfim(), 20).back().op;
  const auto s = schmidt_factor_norms(schmidt_decompose(op, 4));
  // Recorded, not asserted to 10%: the spread is reported by fig2_right.
  EXPECT_GT(s.min, 0.0);
  EXPECT_LE(s.max, 16.0);
}

TEST(MpoExport, RoundTripThroughJson) {
  const auto op = evolve(initial_local_z(6), ModelSpec::kim(), 4).back().op;
  const auto approx = mpo_approximate(op, 4).op;
  const auto tensors = export_mpo(approx);
  for (auto b : tensors.bond_dims) EXPECT_LE(b, 4);
  EXPECT_LT((tensors.to_operator().matrix() - approx.matrix()).norm(), 1e-9);
  const auto back = MpoTensors::from_json(nlohmann::json::parse(tensors.to_json().dump()));
  EXPECT_EQ(back.bond_dims, tensors.bond_dims);
  EXPECT_LT((back.to_operator().matrix() - approx.matrix()).norm(), 1e-9);
}
