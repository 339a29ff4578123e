#include "rbmscale/tfim.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"
#include "rbmscale/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace rbmscale {

void TfimSpec::validate() const {
  if (n_qubits < 1) throw DomainError("TFIM needs at least one qubit");
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw DomainError("coupling J must be finite and >= 0");
  if (!(field >= 0.0) || !std::isfinite(field)) throw DomainError("field h must be finite and >= 0");
  if (coupling + field <= 0.0) throw DomainError("J and h cannot both vanish");
}

double diagonal_energy(const TfimSpec& spec, State s) {
  const int bonds = spec.bond_count();
  if (bonds <= 0) return 0.0;
  const State bond_mask = (State{1} << bonds) - 1;
  const int domain_walls = std::popcount((s ^ (s >> 1)) & bond_mask);
  return -spec.coupling * static_cast<double>(bonds - 2 * domain_walls);
}

namespace {

std::size_t hilbert_dim(int n) { return std::size_t{1} << n; }

void apply_with_diagonal(const TfimSpec& spec, const Eigen::VectorXd& diag, const double* in,
                         double* out) {
  const std::size_t dim = hilbert_dim(spec.n_qubits);
  const double h = spec.field;
  for (std::size_t s = 0; s < dim; ++s) {
    double acc = diag[static_cast<Eigen::Index>(s)] * in[s];
    double offdiag = 0.0;
    for (int i = 0; i < spec.n_qubits; ++i) offdiag += in[s ^ (std::size_t{1} << i)];
    out[s] = acc - h * offdiag;
  }
}

Eigen::VectorXd diagonal_vector(const TfimSpec& spec) {
  const std::size_t dim = hilbert_dim(spec.n_qubits);
  Eigen::VectorXd diag(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) diag[static_cast<Eigen::Index>(s)] = diagonal_energy(spec, s);
  return diag;
}

}  // namespace

void apply_hamiltonian(const TfimSpec& spec, std::span<const double> in, std::span<double> out) {
  spec.validate();
  const std::size_t dim = hilbert_dim(spec.n_qubits);
  if (in.size() != dim || out.size() != dim) throw DimensionError("vector length must be 2^N");
  apply_with_diagonal(spec, diagonal_vector(spec), in.data(), out.data());
}

GroundState solve_ground_state(const TfimSpec& spec, const LanczosOptions& options) {
  spec.validate();
  if (spec.n_qubits > options.max_qubits) {
    throw CapacityError("exact diagonalization capped at N = " + std::to_string(options.max_qubits) +
                        ", requested N = " + std::to_string(spec.n_qubits));
  }
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(spec.n_qubits));
  const Eigen::VectorXd diag = diagonal_vector(spec);
  const Eigen::Index m = std::min<Eigen::Index>(options.krylov_dim, dim);

  Eigen::MatrixXd basis(dim, m);
  Eigen::VectorXd w(dim);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  int matvecs = 0;
  double residual = 0.0;
  double ritz_value = 0.0;

  for (int restart = 0; restart < options.max_restarts; ++restart) {
    basis.col(0) = x;
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      apply_with_diagonal(spec, diag, basis.col(j).data(), w.data());
      ++matvecs;
      double a = basis.col(j).dot(w);
      // Two rounds of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coeffs = basis.leftCols(j + 1).transpose() * w;
        w.noalias() -= basis.leftCols(j + 1) * coeffs;
        if (pass == 0) a = coeffs(j);
      }
      alpha.push_back(a);
      used = j + 1;
      const double b = w.norm();
      if (j + 1 == m || b < 1e-13) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
      tri(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < used) {
        tri(j, j + 1) = beta[static_cast<std::size_t>(j)];
        tri(j + 1, j) = beta[static_cast<std::size_t>(j)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    ritz_value = eig.eigenvalues()(0);
    x = basis.leftCols(used) * eig.eigenvectors().col(0);
    x.normalize();

    apply_with_diagonal(spec, diag, x.data(), w.data());
    ++matvecs;
    ritz_value = x.dot(w);
    residual = (w - ritz_value * x).norm();
    if (residual < options.residual_tolerance) {
      // Perron-Frobenius: the ground state has one sign; remove numerical noise.
      if (x.sum() < 0.0) x = -x;
      const double negative_weight = x.cwiseMin(0.0).squaredNorm();
      if (negative_weight > 1e-10) {
        throw NumericalError("ground state has mixed signs (negative weight " +
                             format_real(negative_weight) + ")");
      }
      x = x.cwiseAbs();
      x.normalize();
      apply_with_diagonal(spec, diag, x.data(), w.data());
      ++matvecs;
      const double energy = x.dot(w);
      return GroundState{spec, std::move(x), energy, matvecs};
    }
  }
  throw NumericalError("Lanczos did not converge after " + std::to_string(matvecs) +
                       " matrix-vector products (residual " + format_real(residual) + ")");
}

double free_fermion_energy(const TfimSpec& spec) {
  spec.validate();
  const int n = spec.n_qubits;
  // Single-particle coupling matrix of the open chain; its singular values are
  // half the quasiparticle energies.
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    coupling(i, i) = spec.field;
    if (i + 1 < n) coupling(i, i + 1) = spec.coupling;
  }
  Eigen::MatrixXd bdg = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  bdg.topRightCorner(n, n) = coupling;
  bdg.bottomLeftCorner(n, n) = coupling.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(bdg, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("single-particle eigensolve failed");
  return -0.5 * eig.eigenvalues().cwiseAbs().sum();
}

Eigen::MatrixXd MeasurementDataset::to_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(shots.size()), n_qubits);
  for (std::size_t r = 0; r < shots.size(); ++r) {
    for (int i = 0; i < n_qubits; ++i) out(static_cast<Eigen::Index>(r), i) = bit(shots[r], i) ? 1.0 : 0.0;
  }
  return out;
}

MeasurementDataset MeasurementDataset::prefix(std::size_t m) const {
  if (m > shots.size()) throw DomainError("prefix longer than dataset");
  return {n_qubits, std::vector<State>(shots.begin(), shots.begin() + static_cast<std::ptrdiff_t>(m)), seed};
}

MeasurementDataset sample_measurements(const GroundState& gs, std::size_t m, std::uint64_t seed,
                                       SamplingSector sector) {
  if (m < 1) throw DomainError("need at least one shot");
  const int n = gs.spec.n_qubits;
  const auto dim = static_cast<std::size_t>(gs.amplitudes.size());
  std::vector<double> cdf(dim);
  double total = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    double p = gs.amplitudes[static_cast<Eigen::Index>(s)];
    p *= p;
    if (sector == SamplingSector::kPositiveMagnetization) {
      const int mag = magnetization(s, n);
      if (mag < 0 || (mag == 0 && !bit(s, 0))) p = 0.0;
    }
    total += p;
    cdf[s] = total;
  }
  if (!(total > 0.0)) throw DomainError("sampling distribution has no weight");

  // Last state with nonzero weight, for u * total landing on the top edge.
  std::size_t last = dim - 1;
  while (last > 0 && cdf[last] == cdf[last - 1]) --last;

  Rng rng(seed);
  MeasurementDataset ds{n, {}, seed};
  ds.shots.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), last);
    ds.shots.push_back(idx);
  }
  return ds;
}

DatasetStatistics dataset_statistics(const MeasurementDataset& ds) {
  if (ds.shots.empty()) throw DomainError("statistics of an empty dataset");
  const int n = ds.n_qubits;
  DatasetStatistics st;
  st.occupation = Eigen::VectorXd::Zero(n);
  double sum_m = 0.0;
  double sum_m2 = 0.0;
  for (State s : ds.shots) {
    for (int i = 0; i < n; ++i) {
      if (bit(s, i)) st.occupation(i) += 1.0;
    }
    const double mag = magnetization(s, n);
    sum_m += mag;
    sum_m2 += mag * mag;
  }
  const auto count = static_cast<double>(ds.shots.size());
  st.occupation /= count;
  st.magnetization = sum_m / count;
  if (ds.shots.size() > 1) {
    const double var = std::max(0.0, (sum_m2 - count * st.magnetization * st.magnetization) / (count - 1.0));
    st.magnetization_std_error = std::sqrt(var / count);
  }
  return st;
}

void write_dataset(std::ostream& os, const MeasurementDataset& ds) {
  os << ds.n_qubits << ' ' << ds.shots.size() << ' ' << ds.seed << '\n';
  for (State s : ds.shots) os << to_bitstring(s, ds.n_qubits) << '\n';
  if (!os) throw IoError("failed writing dataset");
}

MeasurementDataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("dataset file is empty");
  std::istringstream header(line);
  MeasurementDataset ds;
  std::size_t m = 0;
  if (!(header >> ds.n_qubits >> m >> ds.seed) || ds.n_qubits < 1 || ds.n_qubits > kMaxStateBits) {
    throw IoError("malformed dataset header '" + line + "'");
  }
  ds.shots.reserve(m);
  while (ds.shots.size() < m && std::getline(is, line)) {
    const std::string row = trim(line);
    if (row.size() != static_cast<std::size_t>(ds.n_qubits)) {
      throw IoError("dataset row " + std::to_string(ds.shots.size() + 1) + " has wrong length");
    }
    try {
      ds.shots.push_back(from_bitstring(row));
    } catch (const DomainError& e) {
      throw IoError(e.what());
    }
  }
  if (ds.shots.size() != m) throw IoError("dataset truncated: expected " + std::to_string(m) + " shots");
  if (m < 1) throw IoError("dataset has no shots");
  return ds;
}

std::string energy_csv_row(const TfimSpec& spec, double energy) {
  return std::to_string(spec.n_qubits) + "," + format_real(spec.coupling) + "," + format_real(spec.field) +
         "," + format_real(energy);
}

}  // namespace rbmscale
