#pragma once

#include "rbmscale/rbm.hpp"
#include "rbmscale/tfim.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rbmscale {

inline constexpr double kConfidence99 = 2.576;
inline constexpr double kDefaultRoeThreshold = 0.002;

struct EstimatorConfig {
  std::size_t n_samples = 100000;
  int n_chains = 100;
  int burn_in = 200;
  int keep_every = 5;
  double confidence = kConfidence99;
  std::uint64_t seed = 1;

  void validate() const;
  SamplerConfig sampler() const { return {n_chains, burn_in, keep_every, n_samples, seed}; }
};

struct EnergyEstimate {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation of the local energies
  std::size_t n_samples = 0;

  double std_error() const;
};

struct RoeResult {
  double epsilon = 0.0;
  double exact_energy = 0.0;
  EnergyEstimate estimate;
  double threshold = kDefaultRoeThreshold;
  bool converged = false;
};

/// E_loc(v) = -J sum s_i s_{i+1} - h sum_i psi(flip_i v) / psi(v), s_i = 2 v_i - 1.
double local_energy(const RbmParams& p, const TfimSpec& spec, const VectorRef& v);

/// Local energies of every row of `samples`.
Eigen::VectorXd local_energies(const RbmParams& p, const TfimSpec& spec, const Eigen::MatrixXd& samples);

EnergyEstimate estimate_energy(const RbmParams& p, const TfimSpec& spec, const EstimatorConfig& config);

/// <H> under the exact model distribution, by enumeration (N <= 16).
double exact_rbm_energy(const RbmParams& p, const TfimSpec& spec);

/// Upper bound on the relative energy error over the confidence interval
/// mean +/- c * std_dev / sqrt(n).
RoeResult roe(const EnergyEstimate& estimate, double exact_u, double threshold, double c = kConfidence99);

/// How often, and for how long, the learning criterion is checked while training.
struct CriterionSchedule {
  int check_every = 50;
  int epoch_budget = 1000;
  double threshold = kDefaultRoeThreshold;
  // Evaluate once before any training (used when fine-tuning an already good model).
  bool check_initial = false;

  void validate() const;
};

struct CriterionCheck {
  int epoch = 0;
  std::uint64_t estimator_seed = 0;
  RoeResult result;
};

struct CriterionRun {
  RbmParams params;         // model at the final check
  int epochs_used = 0;
  bool converged = false;
  std::vector<CriterionCheck> checks;

  const RoeResult& last() const { return checks.back().result; }
};

/// Trains until roe() passes at a check or the epoch budget runs out. Check i
/// uses estimator seed derive_seed(estimator.seed, i).
CriterionRun train_to_criterion(const RbmParams& init, const Eigen::MatrixXd& data, const TfimSpec& spec,
                                double exact_u, const TrainConfig& train, const EstimatorConfig& estimator,
                                const CriterionSchedule& schedule);

inline constexpr const char* kRoeCsvHeader =
    "N,h_over_J,N_hidden,M,epoch,U_exact,U_mean,sigma,n,epsilon,converged,seed";

std::string roe_csv_row(const TfimSpec& spec, int n_hidden, std::size_t m, int epoch, const RoeResult& r,
                        std::uint64_t seed);

}  // namespace rbmscale
