#include "rbmscale/rbm.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace rbmscale {

namespace {

void require_visible(const RbmParams& p, Eigen::Index n, const char* what) {
  if (n != p.n_visible()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(p.n_visible()) +
                         " visible units, got " + std::to_string(n));
  }
}

void require_enumerable(const RbmParams& p) {
  if (p.n_visible() > kMaxEnumerationQubits) {
    throw CapacityError("exact enumeration capped at N = " + std::to_string(kMaxEnumerationQubits) +
                        ", model has N = " + std::to_string(p.n_visible()));
  }
}

// -F(v) for every row of `rows`.
Eigen::VectorXd negative_free_energies(const RbmParams& p, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd act = rows * p.weights;
  act.rowwise() += p.hidden_bias.transpose();
  Eigen::VectorXd out = rows * p.visible_bias;
  for (Eigen::Index r = 0; r < act.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < act.cols(); ++j) acc += softplus(act(r, j));
    out(r) += acc;
  }
  return out;
}

double log_sum_exp(const Eigen::VectorXd& x) {
  const double top = x.maxCoeff();
  return top + std::log((x.array() - top).exp().sum());
}

Eigen::MatrixXd hidden_probabilities(const RbmParams& p, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd act = rows * p.weights;
  act.rowwise() += p.hidden_bias.transpose();
  return act.unaryExpr([](double x) { return logistic(x); });
}

// Sufficient statistics <v h'>, <v>, <P(h|v)> averaged with the given row weights.
RbmGradient weighted_statistics(const RbmParams& p, const Eigen::MatrixXd& rows,
                                const Eigen::VectorXd& row_weights) {
  const Eigen::MatrixXd ph = hidden_probabilities(p, rows);
  RbmGradient g;
  g.weights = rows.transpose() * row_weights.asDiagonal() * ph;
  g.visible_bias = rows.transpose() * row_weights;
  g.hidden_bias = ph.transpose() * row_weights;
  return g;
}

RbmGradient mean_statistics(const RbmParams& p, const Eigen::MatrixXd& rows) {
  const Eigen::MatrixXd ph = hidden_probabilities(p, rows);
  const double inv = 1.0 / static_cast<double>(rows.rows());
  RbmGradient g;
  g.weights = (rows.transpose() * ph) * inv;
  g.visible_bias = rows.colwise().sum().transpose() * inv;
  g.hidden_bias = ph.colwise().sum().transpose() * inv;
  return g;
}

void subtract(RbmGradient& a, const RbmGradient& b) {
  a.weights -= b.weights;
  a.visible_bias -= b.visible_bias;
  a.hidden_bias -= b.hidden_bias;
}

}  // namespace

RbmParams RbmParams::zeros(int n_visible, int n_hidden) {
  if (n_visible < 1 || n_hidden < 1) throw DimensionError("RBM needs at least one visible and one hidden unit");
  return {Eigen::MatrixXd::Zero(n_visible, n_hidden), Eigen::VectorXd::Zero(n_visible),
          Eigen::VectorXd::Zero(n_hidden)};
}

RbmParams RbmParams::random(int n_visible, int n_hidden, double scale, std::uint64_t seed) {
  RbmParams p = zeros(n_visible, n_hidden);
  Rng rng(seed);
  for (int i = 0; i < n_visible; ++i) {
    for (int j = 0; j < n_hidden; ++j) p.weights(i, j) = scale * rng.normal();
  }
  return p;
}

void RbmParams::validate() const {
  if (weights.rows() < 1 || weights.cols() < 1) throw DimensionError("empty weight matrix");
  if (visible_bias.size() != weights.rows()) throw DimensionError("visible bias length does not match W rows");
  if (hidden_bias.size() != weights.cols()) throw DimensionError("hidden bias length does not match W columns");
  if (!weights.allFinite() || !visible_bias.allFinite() || !hidden_bias.allFinite()) {
    throw NumericalError("RBM parameters contain non-finite values");
  }
}

WeightMask full_mask(int n_visible, int n_hidden) { return WeightMask::Ones(n_visible, n_hidden); }

std::size_t active_count(const WeightMask& mask) {
  return static_cast<std::size_t>((mask.array() != 0).count());
}

RbmGradient RbmGradient::zeros(int n_visible, int n_hidden) {
  return {Eigen::MatrixXd::Zero(n_visible, n_hidden), Eigen::VectorXd::Zero(n_visible),
          Eigen::VectorXd::Zero(n_hidden)};
}

double RbmGradient::max_abs() const {
  return std::max({weights.cwiseAbs().maxCoeff(), visible_bias.cwiseAbs().maxCoeff(),
                   hidden_bias.cwiseAbs().maxCoeff()});
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double config_energy(const RbmParams& p, const VectorRef& v, const VectorRef& h) {
  require_visible(p, v.size(), "config_energy");
  if (h.size() != p.n_hidden()) throw DimensionError("config_energy: hidden vector length mismatch");
  return -v.dot(p.weights * h) - p.visible_bias.dot(v) - p.hidden_bias.dot(h);
}

double free_energy(const RbmParams& p, const VectorRef& v) {
  require_visible(p, v.size(), "free_energy");
  const Eigen::VectorXd act = p.weights.transpose() * v + p.hidden_bias;
  double acc = -p.visible_bias.dot(v);
  for (Eigen::Index j = 0; j < act.size(); ++j) acc -= softplus(act(j));
  return acc;
}

double amplitude_ratio(const RbmParams& p, const VectorRef& v_num, const VectorRef& v_den) {
  return std::exp(-0.5 * (free_energy(p, v_num) - free_energy(p, v_den)));
}

void gibbs_sweep(const RbmParams& p, Eigen::MatrixXd& chains, Rng& rng) {
  require_visible(p, chains.cols(), "gibbs_sweep");
  Eigen::MatrixXd hidden = chains * p.weights;
  hidden.rowwise() += p.hidden_bias.transpose();
  for (Eigen::Index r = 0; r < hidden.rows(); ++r) {
    for (Eigen::Index j = 0; j < hidden.cols(); ++j) {
      hidden(r, j) = rng.uniform() < logistic(hidden(r, j)) ? 1.0 : 0.0;
    }
  }
  chains.noalias() = hidden * p.weights.transpose();
  chains.rowwise() += p.visible_bias.transpose();
  for (Eigen::Index r = 0; r < chains.rows(); ++r) {
    for (Eigen::Index i = 0; i < chains.cols(); ++i) {
      chains(r, i) = rng.uniform() < logistic(chains(r, i)) ? 1.0 : 0.0;
    }
  }
}

Eigen::VectorXd gibbs_step(const RbmParams& p, const VectorRef& v, Rng& rng) {
  Eigen::MatrixXd chain = v.transpose();
  gibbs_sweep(p, chain, rng);
  return chain.row(0).transpose();
}

void SamplerConfig::validate() const {
  if (n_chains < 1) throw DomainError("n_chains must be >= 1");
  if (burn_in < 0) throw DomainError("burn_in must be >= 0");
  if (keep_every < 1) throw DomainError("keep_every must be >= 1");
}

Eigen::MatrixXd sample_model(const RbmParams& p, const SamplerConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Eigen::MatrixXd chains(config.n_chains, p.n_visible());
  for (Eigen::Index r = 0; r < chains.rows(); ++r) {
    for (Eigen::Index i = 0; i < chains.cols(); ++i) chains(r, i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  for (int s = 0; s < config.burn_in; ++s) gibbs_sweep(p, chains, rng);

  const auto total = static_cast<Eigen::Index>(config.n_samples);
  Eigen::MatrixXd out(total, p.n_visible());
  Eigen::Index filled = 0;
  while (filled < total) {
    for (int s = 0; s < config.keep_every; ++s) gibbs_sweep(p, chains, rng);
    const Eigen::Index take = std::min<Eigen::Index>(chains.rows(), total - filled);
    out.middleRows(filled, take) = chains.topRows(take);
    filled += take;
  }
  return out;
}

RbmGradient cd_gradient(const RbmParams& p, const Eigen::MatrixXd& batch, int k, Rng& rng) {
  if (batch.rows() == 0) throw DomainError("cd_gradient: empty batch");
  if (k < 1) throw DomainError("cd_gradient: k must be >= 1");
  require_visible(p, batch.cols(), "cd_gradient");
  RbmGradient g = mean_statistics(p, batch);
  Eigen::MatrixXd chains = batch;
  for (int s = 0; s < k; ++s) gibbs_sweep(p, chains, rng);
  subtract(g, mean_statistics(p, chains));
  return g;
}

Eigen::MatrixXd enumerate_states(int n) {
  if (n > kMaxEnumerationQubits) throw CapacityError("state enumeration capped at N = 16");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd v(dim, n);
  for (Eigen::Index s = 0; s < dim; ++s) {
    for (int i = 0; i < n; ++i) v(s, i) = ((s >> i) & 1) != 0 ? 1.0 : 0.0;
  }
  return v;
}

ExactRbmStats exact_distribution(const RbmParams& p) {
  require_enumerable(p);
  const Eigen::VectorXd neg_f = negative_free_energies(p, enumerate_states(p.n_visible()));
  ExactRbmStats st;
  st.log_partition = log_sum_exp(neg_f);
  st.probabilities = (neg_f.array() - st.log_partition).exp().matrix();
  return st;
}

double mean_log_likelihood(const RbmParams& p, const Eigen::MatrixXd& data) {
  require_enumerable(p);
  require_visible(p, data.cols(), "mean_log_likelihood");
  if (data.rows() == 0) throw DomainError("mean_log_likelihood: empty data");
  const double log_z = log_sum_exp(negative_free_energies(p, enumerate_states(p.n_visible())));
  return negative_free_energies(p, data).mean() - log_z;
}

RbmGradient exact_log_likelihood_gradient(const RbmParams& p, const Eigen::MatrixXd& data) {
  require_enumerable(p);
  require_visible(p, data.cols(), "exact_log_likelihood_gradient");
  if (data.rows() == 0) throw DomainError("exact_log_likelihood_gradient: empty data");
  RbmGradient g = mean_statistics(p, data);
  const Eigen::MatrixXd states = enumerate_states(p.n_visible());
  const ExactRbmStats st = exact_distribution(p);
  subtract(g, weighted_statistics(p, states, st.probabilities));
  return g;
}

double kl_divergence(const Eigen::VectorXd& target, const RbmParams& p) {
  require_enumerable(p);
  const Eigen::Index dim = Eigen::Index{1} << p.n_visible();
  if (target.size() != dim) throw DimensionError("kl_divergence: target must have 2^N entries");
  const Eigen::VectorXd neg_f = negative_free_energies(p, enumerate_states(p.n_visible()));
  const double log_z = log_sum_exp(neg_f);
  double kl = 0.0;
  for (Eigen::Index s = 0; s < dim; ++s) {
    const double q = target(s);
    if (q > 0.0) kl += q * (std::log(q) - (neg_f(s) - log_z));
  }
  return kl;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
  if (batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (cd_steps < 1) throw DomainError("cd_steps must be >= 1");
  if (epochs < 0) throw DomainError("epochs must be >= 0");
  if (!(init_scale >= 0.0)) throw DomainError("init_scale must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must be in [0, 1)");
}

Trainer::Trainer(RbmParams init, Eigen::MatrixXd data, TrainConfig config)
    : params_(std::move(init)), data_(std::move(data)), config_(std::move(config)) {
  params_.validate();
  config_.validate();
  require_visible(params_, data_.cols(), "train");
  if (data_.rows() == 0) throw DomainError("train: empty dataset");
  if (config_.freeze_mask &&
      (config_.freeze_mask->rows() != params_.weights.rows() || config_.freeze_mask->cols() != params_.weights.cols())) {
    throw DimensionError("freeze mask shape does not match W");
  }
  velocity_ = RbmGradient::zeros(params_.n_visible(), params_.n_hidden());
}

void Trainer::run_epochs(int count) {
  const Eigen::Index rows = data_.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  Eigen::MatrixXd batch;
  for (int e = 0; e < count; ++e) {
    const int epoch = epochs_done_ + 1;
    Rng rng(derive_seed(config_.seed, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    RbmGradient g;
    for (Eigen::Index start = 0; start < rows; start += config_.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(config_.batch_size, rows - start);
      batch.resize(size, data_.cols());
      for (Eigen::Index r = 0; r < size; ++r) batch.row(r) = data_.row(order[static_cast<std::size_t>(start + r)]);
      g = cd_gradient(params_, batch, config_.cd_steps, rng);

      const double lr = config_.learning_rate;
      const double mu = config_.momentum;
      velocity_.weights = mu * velocity_.weights + lr * g.weights;
      velocity_.visible_bias = mu * velocity_.visible_bias + lr * g.visible_bias;
      velocity_.hidden_bias = mu * velocity_.hidden_bias + lr * g.hidden_bias;
      if (config_.freeze_mask) {
        // Frozen entries are never written, so a zero stays bitwise zero.
        const auto& mask = *config_.freeze_mask;
        for (Eigen::Index j = 0; j < params_.weights.cols(); ++j) {
          for (Eigen::Index i = 0; i < params_.weights.rows(); ++i) {
            if (mask(i, j) != 0) params_.weights(i, j) += velocity_.weights(i, j);
          }
        }
      } else {
        params_.weights += velocity_.weights;
      }
      params_.visible_bias += velocity_.visible_bias;
      params_.hidden_bias += velocity_.hidden_bias;
    }
    if (!params_.weights.allFinite() || !params_.visible_bias.allFinite() || !params_.hidden_bias.allFinite()) {
      throw NumericalError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    epochs_done_ = epoch;
    log_.push_back({epoch, params_.weights.norm(), g.max_abs()});
  }
}

TrainResult train(const RbmParams& init, const MeasurementDataset& dataset, const TrainConfig& config) {
  if (dataset.n_qubits != init.n_visible()) {
    throw DimensionError("dataset has " + std::to_string(dataset.n_qubits) + " qubits, model has " +
                         std::to_string(init.n_visible()) + " visible units");
  }
  Trainer trainer(init, dataset.to_matrix(), config);
  trainer.run_epochs(config.epochs);
  return {trainer.params(), trainer.log()};
}

void write_checkpoint(std::ostream& os, const RbmParams& p, const WeightMask* mask) {
  const auto row = [&os](const auto& values) {
    for (Eigen::Index k = 0; k < values.size(); ++k) os << (k ? " " : "") << format_real(values(k));
    os << '\n';
  };
  os << p.n_visible() << ' ' << p.n_hidden() << '\n';
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) row(p.weights.row(i));
  row(p.visible_bias);
  row(p.hidden_bias);
  if (mask != nullptr) {
    os << "MASK\n";
    for (Eigen::Index i = 0; i < mask->rows(); ++i) {
      for (Eigen::Index j = 0; j < mask->cols(); ++j) os << (j ? " " : "") << ((*mask)(i, j) != 0 ? 1 : 0);
      os << '\n';
    }
  }
  if (!os) throw IoError("failed writing checkpoint");
}

namespace {

std::vector<double> read_row(std::istream& is, Eigen::Index expected, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(std::string("checkpoint truncated before ") + what);
  std::vector<double> values;
  std::istringstream ls(line);
  std::string token;
  while (ls >> token) {
    try {
      values.push_back(parse_real(token));
    } catch (const DomainError& e) {
      throw IoError(std::string("checkpoint ") + what + ": " + e.what());
    }
  }
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw IoError(std::string("checkpoint ") + what + " has " + std::to_string(values.size()) + " values, expected " +
                  std::to_string(expected));
  }
  return values;
}

}  // namespace

Checkpoint read_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("checkpoint file is empty");
  std::istringstream header(line);
  int n = 0;
  int nh = 0;
  if (!(header >> n >> nh) || n < 1 || nh < 1) throw IoError("malformed checkpoint header '" + line + "'");
  Checkpoint cp{RbmParams::zeros(n, nh), std::nullopt};
  for (int i = 0; i < n; ++i) {
    const auto r = read_row(is, nh, "weight row");
    for (int j = 0; j < nh; ++j) cp.params.weights(i, j) = r[static_cast<std::size_t>(j)];
  }
  const auto b = read_row(is, n, "visible bias");
  const auto c = read_row(is, nh, "hidden bias");
  for (int i = 0; i < n; ++i) cp.params.visible_bias(i) = b[static_cast<std::size_t>(i)];
  for (int j = 0; j < nh; ++j) cp.params.hidden_bias(j) = c[static_cast<std::size_t>(j)];
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t != "MASK") throw IoError("unexpected checkpoint trailer '" + t + "'");
    WeightMask mask(n, nh);
    for (int i = 0; i < n; ++i) {
      const auto r = read_row(is, nh, "mask row");
      for (int j = 0; j < nh; ++j) {
        const double f = r[static_cast<std::size_t>(j)];
        if (f != 0.0 && f != 1.0) throw IoError("mask flags must be 0 or 1");
        mask(i, j) = static_cast<std::uint8_t>(f);
      }
    }
    cp.mask = std::move(mask);
    break;
  }
  try {
    cp.params.validate();
  } catch (const std::exception& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  return cp;
}

}  // namespace rbmscale
