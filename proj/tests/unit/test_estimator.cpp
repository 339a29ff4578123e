#include "oracles.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/estimator.hpp"
#include "rbmscale/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rbmscale;

namespace {

RbmParams toy(int nv, int nh, double scale, std::uint64_t seed) {
  RbmParams p = RbmParams::random(nv, nh, scale, seed);
  Rng rng(seed ^ 0xabcdefULL);
  for (Eigen::Index i = 0; i < nv; ++i) p.visible_bias(i) = 0.5 * scale * rng.normal();
  for (Eigen::Index j = 0; j < nh; ++j) p.hidden_bias(j) = 0.5 * scale * rng.normal();
  return p;
}

EstimatorConfig small_estimator(std::uint64_t seed, std::size_t n = 10000) {
  EstimatorConfig c;
  c.n_samples = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(LocalEnergy, DiagonalOnly) {
  EXPECT_DOUBLE_EQ(local_energy(toy(3, 2, 1.0, 1), {3, 1.0, 0.0}, Eigen::Vector3d(1, 1, 1)), -2.0);
}

TEST(LocalEnergy, UniformAmplitudes) {
  EXPECT_DOUBLE_EQ(local_energy(RbmParams::zeros(2, 2), {2, 1.0, 1.0}, Eigen::Vector2d(1, 1)), -3.0);
}

TEST(LocalEnergy, MatchesDenseProduct) {
  for (int n : {2, 3, 5}) {
    const RbmParams p = toy(n, 3, 1.0, 7 + static_cast<std::uint64_t>(n));
    const TfimSpec spec{n, 0.7, 1.3};
    const Eigen::VectorXd psi = exact_distribution(p).probabilities.cwiseSqrt();
    const Eigen::VectorXd hpsi = oracle::dense_tfim(n, 0.7, 1.3) * psi;
    for (int s = 0; s < (1 << n); ++s) {
      EXPECT_NEAR(local_energy(p, spec, oracle::bits(s, n)), hpsi(s) / psi(s), 1e-10);
    }
    const Eigen::MatrixXd all = enumerate_states(n);
    const Eigen::VectorXd batch = local_energies(p, spec, all);
    EXPECT_LT((batch - hpsi.cwiseQuotient(psi)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExactEnergy, Cases) {
  EXPECT_NEAR(exact_rbm_energy(RbmParams::zeros(5, 2), {5, 0.0, 1.0}), -5.0, 1e-12);
  EXPECT_NEAR(exact_rbm_energy(RbmParams::zeros(3, 2), {3, 1.0, 0.0}), 0.0, 1e-12);
  for (int n : {2, 4}) {
    const RbmParams p = toy(n, 2, 1.2, 30 + static_cast<std::uint64_t>(n));
    const double dense = oracle::dense_energy_of_distribution(oracle::joint_marginal(p.weights, p.visible_bias,
                                                                                     p.hidden_bias),
                                                              n, 1.0, 0.9);
    EXPECT_NEAR(exact_rbm_energy(p, {n, 1.0, 0.9}), dense, 1e-10);
  }
  EXPECT_THROW(exact_rbm_energy(RbmParams::zeros(17, 1), {17, 1.0, 1.0}), CapacityError);
}

TEST(ExactEnergy, AverageOfLocalEnergies) {
  for (int n : {6, 10}) {
    const RbmParams p = toy(n, 4, 0.8, 50 + static_cast<std::uint64_t>(n));
    const TfimSpec spec{n, 1.0, 1.0};
    const Eigen::VectorXd prob = exact_distribution(p).probabilities;
    const Eigen::VectorXd el = local_energies(p, spec, enumerate_states(n));
    EXPECT_NEAR(prob.dot(el), exact_rbm_energy(p, spec), 1e-10);
  }
}

TEST(Estimate, ConstantEstimator) {
  const EnergyEstimate e = estimate_energy(RbmParams::zeros(6, 3), {6, 0.0, 1.0}, small_estimator(3, 2000));
  EXPECT_DOUBLE_EQ(e.mean, -6.0);
  EXPECT_DOUBLE_EQ(e.std_dev, 0.0);
  EXPECT_EQ(e.n_samples, 2000U);
}

TEST(Estimate, ReseededRunsCoverExact) {
  const RbmParams p = toy(4, 3, 1.0, 60);
  const TfimSpec spec{4, 1.0, 1.0};
  const double exact = exact_rbm_energy(p, spec);
  int inside = 0;
  for (std::uint64_t r = 0; r < 30; ++r) {
    const EnergyEstimate e = estimate_energy(p, spec, small_estimator(derive_seed(100, r)));
    inside += std::abs(e.mean - exact) <= 3 * e.std_error() ? 1 : 0;
  }
  EXPECT_GE(inside, 28);
}

TEST(Estimate, ErrorBarScaling) {
  const RbmParams p = toy(5, 3, 1.0, 61);
  const TfimSpec spec{5, 1.0, 1.0};
  const EnergyEstimate a = estimate_energy(p, spec, small_estimator(9, 20000));
  const EnergyEstimate b = estimate_energy(p, spec, small_estimator(9, 40000));
  EXPECT_NEAR(b.std_dev / a.std_dev, 1.0, 0.2);
  EXPECT_NEAR(a.std_error() / b.std_error(), std::sqrt(2.0), 0.25);
}

TEST(Estimate, Deterministic) {
  const RbmParams p = toy(5, 3, 1.0, 62);
  const EnergyEstimate a = estimate_energy(p, {5, 1.0, 1.0}, small_estimator(4, 3000));
  const EnergyEstimate b = estimate_energy(p, {5, 1.0, 1.0}, small_estimator(4, 3000));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_dev, b.std_dev);
  EstimatorConfig bad = small_estimator(1, 1);
  EXPECT_THROW(estimate_energy(p, {5, 1.0, 1.0}, bad), DomainError);
}

TEST(Estimate, IntervalCoverage) {
  const RbmParams p = toy(6, 3, 1.0, 63);
  const TfimSpec spec{6, 1.0, 1.0};
  const double exact = exact_rbm_energy(p, spec);
  int covered = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const EnergyEstimate e = estimate_energy(p, spec, small_estimator(derive_seed(200, r)));
    covered += std::abs(e.mean - exact) <= kConfidence99 * e.std_error() ? 1 : 0;
  }
  EXPECT_GE(covered, 95);
}

TEST(Roe, ExactMatch) {
  const RoeResult r = roe({-3.0, 0.0, 100}, -3.0, 0.002);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Roe, WorkedArithmetic) {
  // sigma / sqrt(n) = 0.001
  const RoeResult r = roe({-2.2300000, 0.1, 10000}, -2.2360680, 0.002, 2.576);
  EXPECT_NEAR(r.epsilon, (0.006068 + 0.002576) / 2.2360680, 1e-12);
  EXPECT_NEAR(r.epsilon, 0.003866, 1e-6);
  EXPECT_FALSE(r.converged);
}

TEST(Roe, SymmetricInterval) {
  const RoeResult r = roe({-5.0, 0.3, 900}, -5.0, 0.002, 2.0);
  EXPECT_NEAR(r.epsilon, 2.0 * 0.01 / 5.0, 1e-15);
}

TEST(Roe, Monotone) {
  double prev = -1.0;
  for (double sigma = 0.0; sigma < 1.0; sigma += 0.05) {
    const double e = roe({-4.1, sigma, 1000}, -4.0, 0.002).epsilon;
    EXPECT_GE(e, prev);
    prev = e;
  }
  prev = -1.0;
  for (double shift = 0.0; shift < 0.5; shift += 0.02) {
    const double e = roe({-4.0 + shift, 0.2, 1000}, -4.0, 0.002).epsilon;
    EXPECT_GE(e, prev);
    prev = e;
    EXPECT_GE(roe({-4.0 - shift, 0.2, 1000}, -4.0, 0.002).epsilon, e - 1e-15);
  }
}

TEST(Roe, ZeroConfidenceIsPlainRelativeError) {
  EXPECT_DOUBLE_EQ(roe({-3.9, 0.7, 50}, -4.0, 0.002, 0.0).epsilon, std::abs(-4.0 + 3.9) / 4.0);
}

TEST(Roe, ConvergedIffBelowThreshold) {
  const RoeResult at = roe({-1.002, 0.0, 10}, -1.0, 0.002);
  EXPECT_EQ(at.converged, at.epsilon <= 0.002);
  EXPECT_THROW(roe({-1.0, 0.0, 10}, 0.0, 0.002), DomainError);
  EXPECT_THROW(roe({-1.0, 0.0, 1}, -1.0, 0.002), DomainError);
}

TEST(Criterion, StopsAtFirstPassingCheck) {
  // Uniform amplitudes are the exact ground state of the pure-field chain.
  const TfimSpec spec{4, 0.0, 1.0};
  const Eigen::MatrixXd data = enumerate_states(4);
  CriterionSchedule cs;
  cs.check_initial = true;
  cs.check_every = 5;
  cs.epoch_budget = 20;
  const CriterionRun run =
      train_to_criterion(RbmParams::zeros(4, 2), data, spec, -4.0, TrainConfig{}, small_estimator(1, 1000), cs);
  EXPECT_TRUE(run.converged);
  EXPECT_EQ(run.epochs_used, 0);
  ASSERT_EQ(run.checks.size(), 1U);
  EXPECT_EQ(run.checks[0].estimator_seed, derive_seed(1, 0));
}

TEST(Criterion, ExhaustsBudgetWithRegularChecks) {
  const TfimSpec spec{4, 1.0, 1.0};
  const double u = solve_ground_state(spec).energy;
  MeasurementDataset ds{4, std::vector<State>(200, 0), 0};  // wrong target on purpose
  CriterionSchedule cs;
  cs.check_every = 3;
  cs.epoch_budget = 10;
  const CriterionRun run = train_to_criterion(RbmParams::zeros(4, 1), ds.to_matrix(), spec, u, TrainConfig{},
                                              small_estimator(2, 500), cs);
  EXPECT_FALSE(run.converged);
  EXPECT_EQ(run.epochs_used, 10);
  ASSERT_EQ(run.checks.size(), 4U);
  EXPECT_EQ(run.checks[0].epoch, 3);
  EXPECT_EQ(run.checks[2].epoch, 9);
  EXPECT_EQ(run.checks[3].epoch, 10);
}

TEST(Criterion, CsvRow) {
  const RoeResult r = roe({-2.0, 0.5, 100}, -2.0, 0.002);
  EXPECT_EQ(roe_csv_row({2, 1.0, 1.0}, 3, 500, 50, r, 7), "2,1,3,500,50,-2,-2,0.5,100,0.064400000000000013,0,7");
}
