#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace opent;

namespace {

CMatrix swap2() {
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1;
  s(1, 2) = s(2, 1) = 1;
  return s;
}

}  // namespace

TEST(DenseOperator, RejectsWrongShape) {
  EXPECT_THROW(DenseOperator(2, 2, CMatrix::Identity(3, 3)), DimensionError);
  EXPECT_THROW(DenseOperator(1, 1, CMatrix::Identity(1, 1)), DimensionError);
}

TEST(DenseOperator, HermitianFlagIsVerified) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_FALSE(DenseOperator(1, 2, m).is_hermitian());
  EXPECT_TRUE(pauli_string("XY").is_hermitian());
}

TEST(Bipartition, CutRange) {
  EXPECT_THROW(Bipartition(4, 0), DimensionError);
  EXPECT_THROW(Bipartition(4, 4), DimensionError);
  Bipartition b(5, 2);
  EXPECT_EQ(b.n_a() + b.n_b(), 5);
}

TEST(Vectorize, IdentityAndSigmaZ) {
  const auto v = vectorize(DenseOperator::identity(1));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(v(0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(2)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(3) - r), 0.0, 1e-15);
  const auto z = vectorize(pauli_string("Z"));
  EXPECT_NEAR(std::abs(z(3) + r), 0.0, 1e-15);
}

TEST(Vectorize, UnitNormAndInnerProduct) {
  std::mt19937_64 rng(7);
  const auto a = oracle::random_hermitian(3, rng);
  const auto b = oracle::random_hermitian(3, rng);
  EXPECT_NEAR(vectorize(a).norm(), 1.0, 1e-12);
  const Complex ip = vectorize(a).dot(vectorize(b));
  const Complex expected = (a.matrix().adjoint() * b.matrix()).trace() / 8.0;
  EXPECT_NEAR(std::abs(ip - expected), 0.0, 1e-12);
}

TEST(Vectorize, RejectsUnnormalizedUnlessAllowed) {
  const DenseOperator half(1, 2, CMatrix::Identity(2, 2) * 0.5);
  EXPECT_THROW(vectorize(half), DomainError);
  EXPECT_NO_THROW(vectorize(half, true));
}

TEST(Schmidt, IdentityAndProductOperators) {
  for (int cut = 1; cut < 3; ++cut) {
    const auto sd = schmidt_decompose(DenseOperator::identity(3), cut);
    EXPECT_NEAR(sd.lambdas()(0), 1.0, 1e-12);
    EXPECT_NEAR(sd.lambdas().tail(sd.length() - 1).norm(), 0.0, 1e-12);
  }
  const auto zz = schmidt_decompose(pauli_string("ZZ"), 1);
  EXPECT_EQ(zz.length(), 4);
  EXPECT_NEAR(zz.lambdas()(0), 1.0, 1e-12);
  EXPECT_EQ(zz.rank(), 1);
}

TEST(Schmidt, SwapMatchesRealignmentOracle) {
  const DenseOperator swap(2, 2, swap2());
  const auto sd = schmidt_decompose(swap, 1);
  const auto ref = oracle::realignment_lambdas(swap.matrix(), 2, 1);
  ASSERT_EQ(sd.length(), 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(sd.lambdas()(i), 0.5, 1e-12);
    EXPECT_NEAR(sd.lambdas()(i), ref(i), 1e-12);
  }
}

TEST(Schmidt, RandomOperatorsMatchRealignmentAtEveryCut) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto op = oracle::random_hermitian(4, rng);
    for (int cut = 1; cut < 4; ++cut) {
      const auto sd = schmidt_decompose(op, cut);
      const auto ref = oracle::realignment_lambdas(op.matrix(), 4, cut);
      for (Eigen::Index i = 0; i < sd.length(); ++i) EXPECT_NEAR(sd.lambdas()(i), ref(i), 1e-10);
      EXPECT_NEAR(sd.lambdas().squaredNorm(), 1.0, 1e-10);
    }
  }
}

TEST(Schmidt, FactorOrthonormalityAndHermiticity) {
  std::mt19937_64 rng(3);
  const auto op = oracle::random_hermitian(4, rng);
  const auto sd = schmidt_decompose(op, 1);
  const double da = 2.0, db = 8.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const Complex ta = (sd.left_factor(i).adjoint() * sd.left_factor(j)).trace();
      const Complex tb = (sd.right_factor(i).adjoint() * sd.right_factor(j)).trace();
      EXPECT_NEAR(std::abs(ta - (i == j ? da : 0.0)), 0.0, 1e-8);
      EXPECT_NEAR(std::abs(tb - (i == j ? db : 0.0)), 0.0, 1e-8);
    }
    EXPECT_LT((sd.left_factor(i) - sd.left_factor(i).adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((sd.right_factor(i) - sd.right_factor(i).adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Schmidt, NonHermitianOperatorUsesComplexPath) {
  std::mt19937_64 rng(5);
  CMatrix m = oracle::random_complex(8, rng);
  m *= std::sqrt(8.0) / m.norm();
  const DenseOperator op(3, 2, m);
  const auto sd = schmidt_decompose(op, 2);
  const auto ref = oracle::realignment_lambdas(m, 3, 2);
  for (Eigen::Index i = 0; i < sd.length(); ++i) EXPECT_NEAR(sd.lambdas()(i), ref(i), 1e-10);
  EXPECT_LT((reconstruct(sd, sd.length()).matrix() - m).norm(), 1e-8 * std::sqrt(8.0));
}

TEST(Reconstruct, FullRankAndRangeChecks) {
  std::mt19937_64 rng(9);
  const auto op = oracle::random_hermitian(3, rng);
  const auto sd = schmidt_decompose(op, 1);
  EXPECT_LT((reconstruct(sd, sd.length()).matrix() - op.matrix()).norm(), 1e-8 * std::sqrt(8.0));
  EXPECT_THROW(reconstruct(sd, 0), DomainError);
  EXPECT_THROW(reconstruct(sd, sd.length() + 1), DomainError);
  const auto prod = schmidt_decompose(pauli_string("XZY"), 2);
  EXPECT_LT((reconstruct(prod, 1).matrix() - pauli_string("XZY").matrix()).norm(), 1e-12);
}

TEST(Reconstruct, SwapRankTwo) {
  const DenseOperator swap(2, 2, swap2());
  const auto sd = schmidt_decompose(swap, 1);
  const auto approx = reconstruct(sd, 2);
  EXPECT_NEAR((swap.matrix() - approx.matrix()).norm() / 2.0, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(tail_sum(sd.probabilities(), 2), 0.5, 1e-12);
}

TEST(Reconstruct, SingleCutErrorIdentityAndHermiticity) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const auto op = oracle::random_hermitian(4, rng);
    for (int cut = 1; cut < 4; ++cut) {
      const auto sd = schmidt_decompose(op, cut);
      for (Eigen::Index chi = 1; chi <= sd.length(); ++chi) {
        const auto approx = reconstruct(sd, chi);
        const double err = (op.matrix() - approx.matrix()).norm() / 4.0;
        EXPECT_NEAR(err, std::sqrt(tail_sum(sd.probabilities(), chi)), 1e-8);
        EXPECT_LT(approx.hermiticity_defect(), 1e-8);
      }
    }
  }
}

TEST(Norms, SpectralExamples) {
  EXPECT_NEAR(spectral_norm(DenseOperator::identity(2)), 1.0, 1e-12);
  EXPECT_NEAR(spectral_norm(pauli_string("ZX")), 1.0, 1e-12);
  CMatrix d = CMatrix::Zero(4, 4);
  d.diagonal() << 3, 1, -2, 0;
  EXPECT_NEAR(spectral_norm(d), 3.0, 1e-12);
  std::mt19937_64 rng(1);
  const CMatrix m = oracle::random_complex(8, rng);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  EXPECT_NEAR(spectral_norm(m), svd.singularValues()(0), 1e-9 * svd.singularValues()(0));
}

TEST(Norms, HsExamples) {
  EXPECT_NEAR(hs_norm(DenseOperator::identity(2)), 2.0, 1e-14);
  EXPECT_NEAR(hs_norm(pauli_string("XYZZ")), 4.0, 1e-14);
  EXPECT_EQ(hs_norm(DenseOperator::zero(2)), 0.0);
}

TEST(Norms, SandwichOnRandomSamples) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const auto dim = ipow(2, n);
    const CMatrix x = oracle::random_complex(dim, rng);
    const double hs = x.norm(), sp = spectral_norm(x);
    EXPECT_LE(hs / std::sqrt(double(dim)), sp + 1e-12);
    EXPECT_LE(sp, hs + 1e-12);
  }
}

TEST(WorstCaseState, Examples) {
  const auto z = worst_case_state(pauli_string("Z"));
  EXPECT_NEAR(std::abs(z.state(0)), 1.0, 1e-12);
  EXPECT_NEAR(z.value, 1.0, 1e-12);
  const auto zero = worst_case_state(DenseOperator::zero(2));
  EXPECT_NEAR(zero.value, 0.0, 1e-15);
  EXPECT_NEAR(zero.state.norm(), 1.0, 1e-12);
  CMatrix nh = CMatrix::Zero(2, 2);
  nh(0, 1) = 1;
  EXPECT_THROW(worst_case_state(DenseOperator(1, 2, nh)), DomainError);
}

TEST(WorstCaseState, AchievesSpectralNorm) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto op = oracle::random_hermitian(3, rng);
    const auto w = worst_case_state(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix());
    const double ref = es.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(std::abs(w.value), ref, 1e-9);
    EXPECT_NEAR(std::abs(w.value), spectral_norm(op), 1e-9);
  }
}

TEST(LocalBasis, QutritRoundTripAndSchmidt) {
  std::mt19937_64 rng(2);
  const auto op = oracle::random_hermitian(2, rng, 3);
  const auto c = to_coefficients(op);
  EXPECT_LT((from_coefficients(c, 2, 3) - op.matrix()).norm(), 1e-12);
  const auto sd = schmidt_decompose(op, 1);
  const auto ref = oracle::realignment_lambdas(op.matrix(), 2, 1, 3);
  for (Eigen::Index i = 0; i < sd.length(); ++i) EXPECT_NEAR(sd.lambdas()(i), ref(i), 1e-10);
  EXPECT_LT(reconstruct(sd, 3).hermiticity_defect(), 1e-10);
}
