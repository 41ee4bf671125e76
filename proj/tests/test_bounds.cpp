#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace opent;

TEST(Thm1, FloorFormulas) {
  EXPECT_NEAR(thm1_alpha_floor(1.3, 2.0, 0.0), 1.3, 1e-15);
  EXPECT_NEAR(thm1_alpha_floor(1.3, kInfinity, 1e-9), 1.3, 1e-12);
  EXPECT_NEAR(thm1_alpha_floor(1.0, 2.0, 0.5), 1.0 + 2.0 * std::log(0.75), 1e-14);
  EXPECT_LE(thm1_entropy1_floor(0.0, 0.3, 8, 2), -1.0);
  EXPECT_THROW(thm1_alpha_floor(1.0, 2.0, 1.0), DomainError);
  EXPECT_THROW(thm1_alpha_floor(1.0, 1.0, 0.1), DomainError);
  EXPECT_NEAR(thm1_chi_floor(2.0, 1.0, 2.0, 0.1, 4, 2),
              std::max(2.0 - 0.4 * std::log(2.0) - 1.0, 1.0 + 2.0 * std::log(0.99)), 1e-14);
}

TEST(Thm2, CeilingFormulas) {
  const double a = 0.5, chi = 4;
  const double e = std::log(chi / (1 - a));
  EXPECT_NEAR(thm2_error_ceiling(e, a, chi, 8, 1.0), 8.0, 1e-12);
  EXPECT_NEAR(thm2_error_ceiling(e, a, chi, 8, 4.0), 16.0, 1e-12);
  EXPECT_NEAR(thm2_error_ceiling(e, a, chi, 8, 1.0, true), 7.0, 1e-12);
  EXPECT_THROW(thm2_error_ceiling(e, 1.0, chi, 8, 1.0), DomainError);
  EXPECT_THROW(thm2_error_ceiling(e, a, chi, 8, 0.5), DomainError);
}

TEST(Thm2, SufficientChi) {
  EXPECT_NEAR(thm2_chi_sufficient(1.0, 0.5, 1.0, 10, 1.0), 500.0, 1e-9);
  EXPECT_NEAR(thm2_chi_sufficient(1.0, 1e-9, 1.0, 10, 1.0), 10.0, 1e-6);
  EXPECT_GT(thm2_chi_sufficient(1.0, 0.5, 1.0, 10, 0.1), thm2_chi_sufficient(1.0, 0.5, 1.0, 10, 1.0));
  EXPECT_THROW(thm2_chi_sufficient(1.0, 0.5, 1.0, 10, 0.0), DomainError);
  // Consistency: the ceiling evaluated at the sufficient chi equals eps.
  for (double a : {0.3, 0.5, 0.7}) {
    for (double eps : {0.5, 0.1}) {
      const int n = 12;
      const double c = 0.8;
      const double chi = thm2_chi_sufficient(c, a, 1.0, n, eps);
      const auto chk = BoundCheck::make(Theorem::T2_chi, thm2_error_ceiling(c * std::log(n), a, chi, n, 1.0), eps);
      EXPECT_TRUE(chk.satisfied);
      EXPECT_NEAR(chk.lhs, eps, 1e-10);
    }
  }
}

TEST(BoundCheck, DirectionAndSlack) {
  EXPECT_TRUE(BoundCheck::make(Theorem::T1_alpha, 1.0, 1.0 + 5e-10).satisfied);
  EXPECT_FALSE(BoundCheck::make(Theorem::T1_alpha, 1.0, 1.1).satisfied);
  EXPECT_TRUE(BoundCheck::make(Theorem::T2, 1.0, 1.0 - 5e-10).satisfied);
  EXPECT_FALSE(BoundCheck::make(Theorem::T3, 1.2, 1.0).satisfied);
  EXPECT_TRUE(BoundCheck::make(Theorem::T1_alpha, 0.0, -kInfinity).satisfied);
}

TEST(Ensemble, FirstMoment) {
  EXPECT_EQ(ensemble_first_moment_bound({EnsembleKind::computational_basis_uniform, 4, 1.0, std::nullopt}), 1.0);
  CMatrix pure = CMatrix::Zero(16, 16);
  pure(3, 3) = 1.0;
  EXPECT_NEAR(ensemble_first_moment_bound({EnsembleKind::single_state, 4, 16.0, pure}), 16.0, 1e-12);
  const double b = ensemble_first_moment_bound({EnsembleKind::haar_states, 4, 1.0, std::nullopt}, 10000, 5);
  // ||mean - 1/D|| concentrates like sqrt(D / samples).
  EXPECT_NEAR(b, 1.0, 0.15);
}

TEST(AvgError, Examples) {
  const auto op = evolve(initial_local_z(4), ModelSpec::kim(), 3).back().op;
  const auto x = pauli_string("XIZY");
  const EnsembleSpec basis{EnsembleKind::computational_basis_uniform, 4, 1.0, std::nullopt};
  const auto zero = avg_expectation_error(op, op, x, basis);
  EXPECT_EQ(zero.mean_abs, 0.0);
  const auto approx = truncate_single_cut(op, Bipartition(4, 2), 2).op;
  const auto id = DenseOperator::identity(4);
  const auto mixed = avg_expectation_error(op, approx, id, {EnsembleKind::single_state, 4, 16.0, std::nullopt});
  EXPECT_NEAR(mixed.mean_abs, std::abs((op.matrix() - approx.matrix()).trace()) / 16.0, 1e-14);
  const DenseOperator big(4, 2, CMatrix(2.0 * x.matrix()));
  EXPECT_THROW(avg_expectation_error(op, approx, big, basis), DomainError);
}

TEST(AvgError, BasisEnumerationAgainstHsError) {
  for (const auto& model : {ModelSpec::xxz(), ModelSpec::kim()}) {
    const auto traj = evolve(initial_local_z(6), model, 8);
    std::mt19937_64 rng(3);
    for (const auto& s : traj) {
      const auto x = random_pauli_string(6, rng);
      const auto tr = truncate_single_cut(s.op, Bipartition(6, 3), 4);
      const EnsembleSpec basis{EnsembleKind::computational_basis_uniform, 6, 1.0, std::nullopt};
      const auto e = avg_expectation_error(s.op, tr.op, x, basis);
      // Explicit loop over the 64 basis states.
      double mean = 0.0;
      const CMatrix m = (s.op.matrix() - tr.op.matrix()) * x.matrix();
      for (int i = 0; i < 64; ++i) mean += std::abs(m(i, i));
      EXPECT_NEAR(e.mean_abs, mean / 64.0, 1e-12);
      EXPECT_LE(e.rms, tr.report.hs_error_normalized + 1e-12);
    }
  }
}

TEST(AvgError, HaarEnsembleSampling) {
  const auto op = evolve(initial_local_z(4), ModelSpec::xxz(), 4).back().op;
  const auto approx = truncate_single_cut(op, Bipartition(4, 2), 1).op;
  const auto e = avg_expectation_error(op, approx, pauli_string("ZZII"),
                                       {EnsembleKind::haar_states, 4, 1.0, std::nullopt}, 2000, 9);
  EXPECT_LE(e.rms, truncate_single_cut(op, Bipartition(4, 2), 1).report.hs_error_normalized * 1.1);
  EXPECT_THROW(avg_expectation_error(op, approx, pauli_string("ZZII"),
                                     {EnsembleKind::haar_states, 4, 1.0, std::nullopt}, 0),
               DomainError);
}

TEST(Otoc, PauliExamples) {
  const auto z = pauli_string("Z"), x = pauli_string("X");
  EXPECT_NEAR(otoc(z, z, 2).value, 1.0, 1e-15);
  EXPECT_NEAR(otoc(z, x, 2).value, -1.0, 1e-15);
  EXPECT_FALSE(otoc(z, x, 2).flagged);
  EXPECT_THROW(otoc(z, x, 1), DomainError);
}

TEST(Otoc, MatchesDenseOracle) {
  const auto op = evolve(initial_local_z(6), ModelSpec::xxz(), 2).back().op;
  const auto x = local_pauli(6, 1, 'Z');
  const CMatrix u = oracle::circuit_unitary(ModelSpec::xxz(), 2, 6);
  const CMatrix o = u.adjoint() * initial_local_z(6).matrix() * u;
  const CMatrix ox = o * x.matrix();
  const Complex ref = (ox * ox * ox).trace() / 64.0;
  const auto got = otoc(op, x, 3);
  EXPECT_NEAR(got.value, ref.real(), 1e-12);
  EXPECT_LE(got.imag_residue, 1e-10);
}

TEST(Thm3, PrefactorAndBound) {
  EXPECT_EQ(thm3_prefactor(1.0, 2), 2.0);
  EXPECT_EQ(thm3_prefactor(1.0 + 1e-12, 5), 5.0);
  EXPECT_NEAR(thm3_prefactor(2.0, 3), 3.0 + 1.0, 1e-14);
  EXPECT_NEAR(thm3_prefactor(0.5, 2), 2.0, 1e-14);
  const double ea = 1.2, a = 0.5, chi = 4;
  EXPECT_NEAR(thm3_bound(ea, a, chi, 8, 2, 1.0) / 2.0, thm2_error_ceiling(ea, a, chi, 8, 1.0), 1e-12);
}

TEST(Thm3, TelescopeResidual) {
  std::mt19937_64 rng(12);
  const auto a = oracle::random_hermitian(2, rng), b = oracle::random_hermitian(2, rng),
             x = oracle::random_hermitian(2, rng);
  EXPECT_LE(otoc_telescope_check(a, a, x, 3), 1e-14);
  EXPECT_LE(otoc_telescope_check(a, b, x, 2), 1e-12);
  const auto c = oracle::random_hermitian(4, rng), d = oracle::random_hermitian(4, rng),
             y = oracle::random_hermitian(4, rng);
  EXPECT_LE(otoc_telescope_check(c, d, y, 4), 1e-10);
}

TEST(Thm3, KimTrajectoryRespectsBound) {
  std::mt19937_64 rng(21);
  evolve_each(initial_local_z(8), ModelSpec::kim(), 8, [&](const EvolutionState& s) {
    const auto x = random_pauli_string(8, rng);
    const double ea = loe_max_over_cuts(s.op, 0.5).value;
    for (int chi : {1, 4, 16}) {
      const auto approx = mpo_approximate(s.op, chi).op;
      const double lhs = std::abs(otoc(s.op, x, 2).value - otoc(approx, x, 2).value);
      EXPECT_LE(lhs, thm3_bound(ea, 0.5, chi, 8, 2, spectral_norm(approx)) + 1e-9);
    }
  });
}

TEST(Thm1, WorstCaseErrorRespectsFloorAcrossChi) {
  const auto traj = evolve(initial_local_z(8), ModelSpec::kim(), 10);
  for (const auto& s : traj) {
    const double e1 = loe_max_over_cuts(s.op, 1.0).value;
    for (double a : {2.0, kInfinity}) {
      const double ea = loe_max_over_cuts(s.op, a).value;
      for (int chi : {1, 2, 4, 8, 16, 32}) {
        const auto approx = mpo_approximate(s.op, chi).op;
        const double eps = std::abs(worst_case_state(s.op - approx).value);
        const double floor = eps < 1.0 ? thm1_chi_floor(e1, ea, a, eps, 8, 2) : thm1_entropy1_floor(e1, eps, 8, 2);
        EXPECT_GE(std::log(double(chi)), floor - 1e-9) << "t=" << s.layers_applied << " chi=" << chi;
      }
    }
  }
}

TEST(RandomPauli, NonIdentityAndNormalized) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_pauli_string(1, rng);
    EXPECT_TRUE(p.is_normalized());
    EXPECT_GT((p.matrix() - CMatrix::Identity(2, 2)).norm(), 0.1);
  }
}
