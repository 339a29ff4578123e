#pragma once

#include "rbmscale/rng.hpp"
#include "rbmscale/tfim.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rbmscale {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Binary {0,1} RBM: E(v,h) = -v'Wh - b'v - c'h, W is n_visible x n_hidden.
struct RbmParams {
  Eigen::MatrixXd weights;
  Eigen::VectorXd visible_bias;
  Eigen::VectorXd hidden_bias;

  int n_visible() const { return static_cast<int>(weights.rows()); }
  int n_hidden() const { return static_cast<int>(weights.cols()); }

  static RbmParams zeros(int n_visible, int n_hidden);
  // Gaussian weights with standard deviation `scale`, zero biases.
  static RbmParams random(int n_visible, int n_hidden, double scale, std::uint64_t seed);

  // Throws DimensionError on inconsistent shapes, NumericalError on non-finite entries.
  void validate() const;
};

/// Per-weight trainability: 1 = free, 0 = frozen at exactly zero.
using WeightMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

WeightMask full_mask(int n_visible, int n_hidden);
std::size_t active_count(const WeightMask& mask);

/// Same layout as RbmParams; used for ascent directions on the log-likelihood.
struct RbmGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd visible_bias;
  Eigen::VectorXd hidden_bias;

  static RbmGradient zeros(int n_visible, int n_hidden);
  double max_abs() const;
};

double softplus(double x);
double logistic(double x);

double config_energy(const RbmParams& p, const VectorRef& v, const VectorRef& h);

/// F(v) = -b'v - sum_j softplus(c_j + (W'v)_j); p(v) is proportional to exp(-F(v)).
double free_energy(const RbmParams& p, const VectorRef& v);

/// psi(v_num) / psi(v_den) with psi = sqrt(p).
double amplitude_ratio(const RbmParams& p, const VectorRef& v_num, const VectorRef& v_den);

/// One block-Gibbs sweep (h | v, then v | h) on every row of `chains` in place.
/// Random numbers are drawn for all hidden units (row-major), then all visible units.
void gibbs_sweep(const RbmParams& p, Eigen::MatrixXd& chains, Rng& rng);

Eigen::VectorXd gibbs_step(const RbmParams& p, const VectorRef& v, Rng& rng);

struct SamplerConfig {
  int n_chains = 100;
  int burn_in = 200;
  int keep_every = 5;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Independent Gibbs chains from uniform random starts. After burn-in, every
/// keep_every-th sweep all chains are recorded in chain order until n_samples
/// rows are collected.
Eigen::MatrixXd sample_model(const RbmParams& p, const SamplerConfig& config);

/// CD-k ascent direction averaged over the batch rows.
RbmGradient cd_gradient(const RbmParams& p, const Eigen::MatrixXd& batch, int k, Rng& rng);

inline constexpr int kMaxEnumerationQubits = 16;

/// Exact p(v) over all 2^N visible states, indexed by State value.
struct ExactRbmStats {
  Eigen::VectorXd probabilities;
  double log_partition = 0.0;
};

ExactRbmStats exact_distribution(const RbmParams& p);

/// All 2^n visible configurations as 0/1 rows; row index = State value.
Eigen::MatrixXd enumerate_states(int n);

/// Mean log-likelihood of the rows of `data` under the exact marginal.
double mean_log_likelihood(const RbmParams& p, const Eigen::MatrixXd& data);

/// Exact gradient of mean_log_likelihood (negative phase by enumeration).
RbmGradient exact_log_likelihood_gradient(const RbmParams& p, const Eigen::MatrixXd& data);

/// KL(target || p_model) with 0 log 0 = 0.
double kl_divergence(const Eigen::VectorXd& target, const RbmParams& p);

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 100;
  int cd_steps = 1;
  int epochs = 100;
  std::uint64_t seed = 1;
  double init_scale = 0.01;
  double momentum = 0.0;
  std::optional<WeightMask> freeze_mask;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double weight_norm = 0.0;      // Frobenius norm of W after the epoch
  double max_gradient = 0.0;     // largest |component| of the last mini-batch gradient
};

/// Stateful CD-k optimizer over a fixed data matrix. Each epoch is one pass over
/// a fresh shuffle of the rows. Epoch e (1-based) draws from stream e of the seed,
/// so running epochs in several calls gives the same result as one call.
class Trainer {
 public:
  Trainer(RbmParams init, Eigen::MatrixXd data, TrainConfig config);

  void run_epochs(int count);

  const RbmParams& params() const { return params_; }
  const std::vector<EpochLog>& log() const { return log_; }
  int epochs_done() const { return epochs_done_; }
  const TrainConfig& config() const { return config_; }

 private:
  void apply_mask();

  RbmParams params_;
  Eigen::MatrixXd data_;
  TrainConfig config_;
  RbmGradient velocity_;
  std::vector<EpochLog> log_;
  int epochs_done_ = 0;
};

struct TrainResult {
  RbmParams params;
  std::vector<EpochLog> log;
};

TrainResult train(const RbmParams& init, const MeasurementDataset& dataset, const TrainConfig& config);

// Checkpoint: "N N_h", N rows of W, b, c, optional "MASK" + N rows of 0/1.
void write_checkpoint(std::ostream& os, const RbmParams& p, const WeightMask* mask = nullptr);

struct Checkpoint {
  RbmParams params;
  std::optional<WeightMask> mask;
};

Checkpoint read_checkpoint(std::istream& is);

}  // namespace rbmscale
