#include "oracles.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/tfim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace rbmscale;

namespace {

TfimSpec chain(int n, double J, double h) { return {n, J, h}; }

}  // namespace

TEST(GroundState, ClassicalFerromagnetLimit) {
  EXPECT_NEAR(solve_ground_state(chain(3, 1.0, 0.0)).energy, -2.0, 1e-10);
  EXPECT_NEAR(free_fermion_energy(chain(3, 1.0, 0.0)), -2.0, 1e-10);
}

TEST(GroundState, PureFieldLimit) {
  const GroundState gs = solve_ground_state(chain(2, 0.0, 1.0));
  EXPECT_NEAR(gs.energy, -2.0, 1e-10);
  for (int s = 0; s < 4; ++s) EXPECT_NEAR(gs.amplitudes(s), 0.5, 1e-10);
}

TEST(GroundState, TwoSitesCritical) {
  // Even-parity block [[-1,-2],[-2,1]] has eigenvalues +-sqrt(5).
  EXPECT_NEAR(solve_ground_state(chain(2, 1.0, 1.0)).energy, -std::sqrt(5.0), 1e-10);
  EXPECT_NEAR(free_fermion_energy(chain(2, 1.0, 1.0)), -std::sqrt(5.0), 1e-10);
}

TEST(GroundState, MatchesDenseDiagonalisation) {
  for (int n = 1; n <= 8; ++n) {
    for (double h : {0.3, 1.0, 2.5}) {
      const GroundState gs = solve_ground_state(chain(n, 1.0, h));
      const oracle::DenseGround ref = oracle::dense_ground(n, 1.0, h);
      EXPECT_NEAR(gs.energy, ref.energy, 1e-10) << "N=" << n << " h=" << h;
      EXPECT_LT((gs.amplitudes - ref.vector).cwiseAbs().maxCoeff(), 1e-8) << "N=" << n << " h=" << h;
    }
  }
}

TEST(GroundState, PositiveNormalisedRayleigh) {
  for (int n : {4, 9, 12}) {
    for (double h : {0.2, 1.0, 2.0}) {
      const TfimSpec spec = chain(n, 1.0, h);
      const GroundState gs = solve_ground_state(spec);
      EXPECT_NEAR(gs.amplitudes.squaredNorm(), 1.0, 1e-12);
      EXPECT_GT(gs.amplitudes.minCoeff(), 0.0);
      Eigen::VectorXd hv(gs.amplitudes.size());
      apply_hamiltonian(spec, {gs.amplitudes.data(), static_cast<std::size_t>(gs.amplitudes.size())},
                        {hv.data(), static_cast<std::size_t>(hv.size())});
      EXPECT_NEAR(gs.amplitudes.dot(hv), gs.energy, 1e-10);
    }
  }
}

TEST(GroundState, DegenerateZeroFieldIsSymmetricCombination) {
  const GroundState gs = solve_ground_state(chain(4, 1.0, 0.0));
  EXPECT_NEAR(gs.amplitudes(0), std::sqrt(0.5), 1e-10);
  EXPECT_NEAR(gs.amplitudes(15), std::sqrt(0.5), 1e-10);
}

TEST(GroundState, FreeFermionAgreesAcrossGrid) {
  for (int n = 2; n <= 12; n += 2) {
    for (double h : {0.2, 0.5, 0.8, 1.0, 1.5, 2.0}) {
      EXPECT_NEAR(solve_ground_state(chain(n, 1.0, h)).energy, free_fermion_energy(chain(n, 1.0, h)), 1e-8);
    }
  }
}

TEST(GroundState, FreeFermionBeyondExactCap) {
  // Extensive: the energy per site approaches -4/pi at criticality.
  const double e = free_fermion_energy(chain(200, 1.0, 1.0));
  EXPECT_NEAR(e / 200.0, -4.0 / M_PI, 5e-3);
}

TEST(GroundState, Errors) {
  LanczosOptions small;
  small.max_qubits = 6;
  EXPECT_THROW(solve_ground_state(chain(7, 1.0, 1.0), small), CapacityError);
  EXPECT_THROW(solve_ground_state(chain(0, 1.0, 1.0)), DomainError);
  EXPECT_THROW(solve_ground_state(chain(3, -1.0, 1.0)), DomainError);
  LanczosOptions starved;
  starved.krylov_dim = 3;
  starved.max_restarts = 1;
  starved.residual_tolerance = 1e-15;
  EXPECT_THROW(solve_ground_state(chain(10, 1.0, 1.0), starved), NumericalError);
}

TEST(Sampling, PointMass) {
  GroundState gs{chain(3, 1.0, 0.0), Eigen::VectorXd::Zero(8), -2.0, 0};
  gs.amplitudes(0) = 1.0;
  const MeasurementDataset ds = sample_measurements(gs, 500, 9);
  for (State s : ds.shots) EXPECT_EQ(s, 0U);
}

TEST(Sampling, FrequenciesWithinBinomialErrors) {
  const GroundState gs = solve_ground_state(chain(2, 1.0, 1.0));
  const std::size_t m = 1000000;
  const MeasurementDataset ds = sample_measurements(gs, m, 2024);
  std::vector<double> counts(4, 0.0);
  for (State s : ds.shots) counts[s] += 1.0;
  for (int s = 0; s < 4; ++s) {
    const double p = gs.amplitudes(s) * gs.amplitudes(s);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(m));
    EXPECT_NEAR(counts[s] / m, p, 4 * se) << "state " << s;
  }
}

TEST(Sampling, TotalVariationSmall) {
  for (int n : {3, 6}) {
    const GroundState gs = solve_ground_state(chain(n, 1.0, 0.8));
    const MeasurementDataset ds = sample_measurements(gs, 1000000, 5);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(1 << n);
    for (State s : ds.shots) freq(static_cast<Eigen::Index>(s)) += 1.0;
    freq /= static_cast<double>(ds.size());
    EXPECT_LT(oracle::total_variation(freq, gs.amplitudes.cwiseAbs2()), 5e-3);
  }
}

TEST(Sampling, DeterministicBytes) {
  const GroundState gs = solve_ground_state(chain(5, 1.0, 1.0));
  std::ostringstream a;
  std::ostringstream b;
  write_dataset(a, sample_measurements(gs, 1000, 77));
  write_dataset(b, sample_measurements(gs, 1000, 77));
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_dataset(c, sample_measurements(gs, 1000, 78));
  EXPECT_NE(a.str(), c.str());
}

TEST(Sampling, SymmetryBreakSector) {
  const GroundState gs = solve_ground_state(chain(6, 1.0, 0.8));
  const MeasurementDataset ds = sample_measurements(gs, 20000, 3, SamplingSector::kPositiveMagnetization);
  for (State s : ds.shots) {
    const int m = magnetization(s, 6);
    EXPECT_TRUE(m > 0 || (m == 0 && bit(s, 0)));
  }
  EXPECT_GT(dataset_statistics(ds).magnetization, 1.0);
}

TEST(Sampling, ZeroShotsRejected) {
  const GroundState gs = solve_ground_state(chain(2, 1.0, 1.0));
  EXPECT_THROW(sample_measurements(gs, 0, 1), DomainError);
}

TEST(Statistics, AllUp) {
  MeasurementDataset ds{4, {0b1111, 0b1111, 0b1111}, 0};
  const DatasetStatistics st = dataset_statistics(ds);
  EXPECT_DOUBLE_EQ(st.magnetization, 4.0);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(st.occupation(i), 1.0);
}

TEST(Statistics, BalancedPairCancels) {
  MeasurementDataset ds{2, {0b00, 0b11, 0b00, 0b11}, 0};
  EXPECT_DOUBLE_EQ(dataset_statistics(ds).magnetization, 0.0);
  EXPECT_THROW(dataset_statistics(MeasurementDataset{2, {}, 0}), DomainError);
}

TEST(Statistics, ExactSamplerIsZ2Balanced) {
  const GroundState gs = solve_ground_state(chain(8, 1.0, 1.0));
  const DatasetStatistics st = dataset_statistics(sample_measurements(gs, 100000, 11));
  EXPECT_LT(std::abs(st.magnetization), 4 * st.magnetization_std_error);
}

TEST(DatasetFile, RoundTripAndBitOrder) {
  MeasurementDataset ds{3, {from_bitstring("100"), from_bitstring("011")}, 42};
  EXPECT_EQ(ds.shots[0], 1U);  // leftmost character is site 0
  std::ostringstream os;
  write_dataset(os, ds);
  EXPECT_EQ(os.str(), "3 2 42\n100\n011\n");
  std::istringstream is(os.str());
  const MeasurementDataset back = read_dataset(is);
  EXPECT_EQ(back.shots, ds.shots);
  EXPECT_EQ(back.seed, 42U);
  std::istringstream bad("3 2 42\n10\n011\n");
  EXPECT_THROW(read_dataset(bad), IoError);
}

TEST(DatasetFile, EnergyRowPrecision) {
  EXPECT_EQ(energy_csv_row(chain(2, 1.0, 1.0), -std::sqrt(5.0)), "2,1,1,-2.2360679774997898");
}
