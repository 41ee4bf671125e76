#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace opent;

TEST(Haar, UnitaryAndCentered) {
  std::mt19937_64 rng(4);
  CMatrix mean = CMatrix::Zero(4, 4);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const CMatrix u = haar_unitary(4, rng);
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
    mean += u;
  }
  mean /= static_cast<double>(n);
  // Entries have variance 1/4, so the sample mean is within ~4 sigma.
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 4.0 * 0.5 / std::sqrt(double(n)));
}

TEST(Haar, SecondMomentOfEntries) {
  std::mt19937_64 rng(5);
  double acc = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) acc += std::norm(haar_unitary(3, rng)(0, 1));
  EXPECT_NEAR(acc / n, 1.0 / 3.0, 0.02);
}

TEST(Bernstein, Examples) {
  EXPECT_EQ(bernstein_expectation_bound(0.0, 0.0, 1.0, 64), 0.0);
  EXPECT_NEAR(bernstein_expectation_bound(1.0, 0.0, 1.0, 2), std::sqrt(2.0 * std::log(4.0)), 1e-14);
  EXPECT_NEAR(bernstein_expectation_bound(0.0, 0.3, 2.0, 8), 2.0 * 0.3 * std::log(16.0) / 3.0, 1e-14);
}

TEST(Thm4, ConstantAndMonotonicity) {
  EXPECT_NEAR(thm4_constant(2, 0.5, 1.0), 2.0 * (std::sqrt(std::log(2.0)) * std::sqrt(0.5) + std::log(2.0) / 3.0),
              1e-14);
  double prev = kInfinity;
  for (int chi = 1; chi <= 64; chi *= 2) {
    const double b = thm4_bound(2.0, 0.5, chi, 6, 2, 1.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(thm4_bound(2.0, 1.0, 4, 6, 2, 1.0), DomainError);
}

TEST(Synthetic, SpectraAndFactors) {
  const auto g = geometric_spectrum(10, 0.5);
  EXPECT_NEAR(g.norm(), 1.0, 1e-14);
  EXPECT_NEAR(g(1) / g(0), 0.5, 1e-14);
  EXPECT_NEAR(flat_spectrum(16)(3), 0.25, 1e-15);
  const auto sd = synthetic_decomposition(Bipartition(4, 2), geometric_spectrum(16, 0.7));
  const auto op = reconstruct(sd, sd.length());
  EXPECT_TRUE(op.is_normalized());
  const auto back = schmidt_decompose(op, 2);
  EXPECT_LT((back.lambdas() - sd.lambdas()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(measured_l_bound(sd), 1.0, 1e-12);
}

TEST(Ensemble, RejectsFactorsAboveL) {
  const auto op = evolve(initial_local_z(4), ModelSpec::xxz(), 4).back().op;
  const auto sd = schmidt_decompose(op, 2);
  const double l = measured_l_bound(sd);
  if (l > 1.0 + 1e-6) EXPECT_THROW(prepare_ensemble({sd, 1.0, 1, ConjugationMode::shared_haar_signed}), ConfigError);
  EXPECT_NO_THROW(prepare_ensemble({sd, l, 1, ConjugationMode::shared_haar_signed}));
  EXPECT_THROW(prepare_ensemble({sd, 0.5, 1, ConjugationMode::shared_haar_signed}), ConfigError);
}

TEST(Ensemble, SingleTermIsUnitarilyEquivalent) {
  RVector one(1);
  one << 1.0;
  const auto sd = synthetic_decomposition(Bipartition(4, 2), one);
  const auto base = reconstruct(sd, 1);
  const auto s = sample_element(EnsembleElementSpec{sd, 1.0, 7, ConjugationMode::shared_haar_signed}, 0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> a(base.matrix()), b(s.matrix());
  EXPECT_LT((a.singularValues() - b.singularValues()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ensemble, SpectrumPreservedAndCentered) {
  const auto sd = synthetic_decomposition(Bipartition(4, 2), geometric_spectrum(16, 0.6));
  const auto prepared = prepare_ensemble({sd, 1.0, 11, ConjugationMode::shared_haar_signed});
  CMatrix mean_factor = CMatrix::Zero(4, 4);
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_element(prepared, static_cast<std::uint64_t>(i));
    const auto ssd = schmidt_decompose(s, 2, true);
    EXPECT_LT((ssd.lambdas() - sd.lambdas()).cwiseAbs().maxCoeff(), 1e-8);
    for (double a : {0.5, 1.0, 2.0}) EXPECT_NEAR(loe(ssd, a), loe(sd, a), 1e-7);
    const auto terms = detail::draw_terms(prepared, static_cast<std::uint64_t>(i));
    mean_factor += terms.left[1];
  }
  mean_factor /= static_cast<double>(n);
  // Random signs centre every term; entries are O(1), so 5 / sqrt(n) is generous.
  EXPECT_LT(mean_factor.cwiseAbs().maxCoeff(), 5.0 / std::sqrt(double(n)));
}

TEST(Ensemble, DeterministicPerIndex) {
  const auto sd = synthetic_decomposition(Bipartition(4, 2), flat_spectrum(16));
  const auto p = prepare_ensemble({sd, 1.0, 3, ConjugationMode::shared_haar_signed});
  EXPECT_EQ((sample_element(p, 5).matrix() - sample_element(p, 5).matrix()).norm(), 0.0);
  EXPECT_GT((sample_element(p, 5).matrix() - sample_element(p, 6).matrix()).norm(), 1e-3);
}

TEST(Ensemble, IndependentModeRuns) {
  const auto sd = synthetic_decomposition(Bipartition(4, 2), geometric_spectrum(16, 0.5));
  const auto p = prepare_ensemble({sd, 1.0, 3, ConjugationMode::independent_haar});
  const auto cell = randmat_cell(p, 4, 20, {0.5});
  EXPECT_GE(cell.empirical_mean, 0.0);
  EXPECT_LE(cell.empirical_mean, cell.bernstein);
}

TEST(Cell, BoundsHoldOnSyntheticSpectra) {
  for (const auto& lam : {geometric_spectrum(64, 0.5), geometric_spectrum(64, 0.8), flat_spectrum(64)}) {
    const auto sd = synthetic_decomposition(Bipartition(6, 3), lam);
    const auto p = prepare_ensemble({sd, measured_l_bound(sd), 17, ConjugationMode::shared_haar_signed});
    for (Eigen::Index chi : {1, 4, 16}) {
      const auto cell = randmat_cell(p, chi, 100, {0.5, 0.7});
      EXPECT_LE(cell.empirical_mean, cell.bernstein);
      for (const auto& [a, b] : cell.thm4) EXPECT_LE(cell.empirical_mean, b) << "alpha=" << a;
      EXPECT_LE(cell.max_loe_deviation, 1e-7);
    }
    const auto full = randmat_cell(p, 64, 10, {0.5});
    EXPECT_LE(full.empirical_mean, 1e-8);
  }
  const auto sd = synthetic_decomposition(Bipartition(4, 2), flat_spectrum(16));
  EXPECT_THROW(randmat_cell(prepare_ensemble({sd, 1.0, 1, ConjugationMode::shared_haar_signed}), 2, 0, {0.5}),
               ConfigError);
}
