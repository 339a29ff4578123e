#pragma once

#include "rbmscale/bits.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rbmscale {

/// Open-boundary transverse-field Ising chain
///   H = -J sum_{i=0}^{N-2} sz_i sz_{i+1} - h sum_i sx_i.
struct TfimSpec {
  int n_qubits = 1;
  double coupling = 1.0;  // J
  double field = 1.0;     // h

  double field_ratio() const { return field / coupling; }
  int bond_count() const { return n_qubits - 1; }

  // Throws DomainError unless N >= 1, J >= 0, h >= 0 and J + h > 0.
  void validate() const;

  static TfimSpec from_ratio(int n_qubits, double h_over_j, double coupling = 1.0) {
    return {n_qubits, coupling, h_over_j * coupling};
  }
};

/// Exact ground state; amplitudes indexed by State value.
struct GroundState {
  TfimSpec spec;
  Eigen::VectorXd amplitudes;
  double energy = 0.0;
  int matvecs = 0;
};

inline constexpr int kDefaultMaxExactQubits = 20;

struct LanczosOptions {
  int krylov_dim = 60;
  int max_restarts = 500;
  double residual_tolerance = 1e-10;
  int max_qubits = kDefaultMaxExactQubits;
};

/// Diagonal (bond) energy of one basis state.
double diagonal_energy(const TfimSpec& spec, State s);

/// out = H in, without forming the matrix. Both spans have length 2^N.
void apply_hamiltonian(const TfimSpec& spec, std::span<const double> in, std::span<double> out);

/// Ground state by restarted Lanczos with full reorthogonalization, started from
/// the uniform vector. Amplitudes are sign-fixed to be non-negative (strictly
/// positive whenever h > 0).
GroundState solve_ground_state(const TfimSpec& spec, const LanczosOptions& options = {});

/// Ground energy from the Jordan-Wigner free-fermion form of the open chain.
/// Works for any N; cost is one dense 2N x 2N symmetric eigensolve.
double free_fermion_energy(const TfimSpec& spec);

/// Projective sigma^z measurements.
struct MeasurementDataset {
  int n_qubits = 0;
  std::vector<State> shots;
  std::uint64_t seed = 0;

  std::size_t size() const { return shots.size(); }
  // Rows are shots, entries 0.0 / 1.0.
  Eigen::MatrixXd to_matrix() const;
  // First m shots, same seed.
  MeasurementDataset prefix(std::size_t m) const;
};

enum class SamplingSector {
  kFull,
  // Only states with positive total magnetization, or zero magnetization with
  // site 0 up. Mimics a symmetry-broken data source.
  kPositiveMagnetization,
};

/// m i.i.d. draws from |psi|^2 by inverse CDF.
MeasurementDataset sample_measurements(const GroundState& gs, std::size_t m, std::uint64_t seed,
                                       SamplingSector sector = SamplingSector::kFull);

struct DatasetStatistics {
  Eigen::VectorXd occupation;  // per-site mean of v_i
  double magnetization = 0.0;  // mean of sum_i (2 v_i - 1)
  double magnetization_std_error = 0.0;
};

DatasetStatistics dataset_statistics(const MeasurementDataset& ds);

// Dataset file: "N M seed" header, then M lines of N '0'/'1' characters.
void write_dataset(std::ostream& os, const MeasurementDataset& ds);
MeasurementDataset read_dataset(std::istream& is);

// "N,J,h,energy" with 17 significant digits.
inline constexpr const char* kEnergyCsvHeader = "N,J,h,energy";
std::string energy_csv_row(const TfimSpec& spec, double energy);

}  // namespace rbmscale
