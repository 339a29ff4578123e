#pragma once

// Brute-force references shared by the test binaries. Nothing here calls the
// library routine it is used to check.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// Dense open-chain TFIM Hamiltonian with site i = bit i, bit 1 = spin up.
inline Eigen::MatrixXd dense_tfim(int n, double J, double h) {
  const int dim = 1 << n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      const int a = (s >> i) & 1;
      const int b = (s >> (i + 1)) & 1;
      diag -= J * (a == b ? 1.0 : -1.0);
    }
    H(s, s) = diag;
    for (int i = 0; i < n; ++i) H(s ^ (1 << i), s) -= h;
  }
  return H;
}

struct DenseGround {
  double energy;
  Eigen::VectorXd vector;  // sign fixed so the sum is positive
};

inline DenseGround dense_ground(int n, double J, double h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_tfim(n, J, h));
  Eigen::VectorXd v = es.eigenvectors().col(0);
  if (v.sum() < 0) v = -v;
  return {es.eigenvalues()(0), v};
}

// v in {0,1}^n of integer s, site i = bit i.
inline Eigen::VectorXd bits(int s, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = (s >> i) & 1;
  return v;
}

// Unnormalised log p(v) by explicit sum over all 2^nh hidden configurations.
inline double log_unnorm_by_hidden_sum(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                       const Eigen::VectorXd& v) {
  const int nh = static_cast<int>(c.size());
  double total = 0.0;
  for (int t = 0; t < (1 << nh); ++t) {
    const Eigen::VectorXd hv = bits(t, nh);
    total += std::exp(v.dot(W * hv) + b.dot(v) + c.dot(hv));
  }
  return std::log(total);
}

// Exact visible distribution by brute force over (v, h).
inline Eigen::VectorXd joint_marginal(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int nv = static_cast<int>(b.size());
  Eigen::VectorXd p(1 << nv);
  for (int s = 0; s < (1 << nv); ++s) p(s) = std::exp(log_unnorm_by_hidden_sum(W, b, c, bits(s, nv)));
  return p / p.sum();
}

// <H> for amplitudes psi = sqrt(p) by dense matrix algebra.
inline double dense_energy_of_distribution(const Eigen::VectorXd& p, int n, double J, double h) {
  const Eigen::VectorXd psi = p.cwiseSqrt();
  return psi.dot(dense_tfim(n, J, h) * psi) / psi.squaredNorm();
}

inline double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace oracle
