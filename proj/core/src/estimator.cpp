#include "rbmscale/estimator.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <algorithm>
#include <cmath>

namespace rbmscale {

void EstimatorConfig::validate() const {
  if (n_samples < 2) throw DomainError("estimator needs n_samples >= 2");
  if (!(confidence > 0.0)) throw DomainError("confidence multiplier C must be positive");
  sampler().validate();
}

double EnergyEstimate::std_error() const {
  return n_samples > 0 ? std_dev / std::sqrt(static_cast<double>(n_samples)) : 0.0;
}

namespace {

void require_match(const RbmParams& p, const TfimSpec& spec) {
  if (spec.n_qubits != p.n_visible()) {
    throw DimensionError("model has " + std::to_string(p.n_visible()) + " visible units, TFIM has " +
                         std::to_string(spec.n_qubits) + " qubits");
  }
}

double bond_energy(const TfimSpec& spec, const double* v, Eigen::Index stride) {
  double acc = 0.0;
  for (int i = 0; i + 1 < spec.n_qubits; ++i) {
    const double si = 2.0 * v[i * stride] - 1.0;
    const double sj = 2.0 * v[(i + 1) * stride] - 1.0;
    acc += si * sj;
  }
  return -spec.coupling * acc;
}

}  // namespace

Eigen::VectorXd local_energies(const RbmParams& p, const TfimSpec& spec, const Eigen::MatrixXd& samples) {
  require_match(p, spec);
  if (samples.cols() != p.n_visible()) throw DimensionError("sample width does not match the model");
  const Eigen::Index n = samples.rows();
  const int nv = p.n_visible();
  const int nh = p.n_hidden();
  Eigen::MatrixXd theta = samples * p.weights;
  theta.rowwise() += p.hidden_bias.transpose();
  const Eigen::MatrixXd w_rows = p.weights.transpose();  // column i = row i of W

  Eigen::VectorXd out(n);
  Eigen::VectorXd sp(nh);
  for (Eigen::Index r = 0; r < n; ++r) {
    double base = 0.0;
    for (int j = 0; j < nh; ++j) base += softplus(theta(r, j));
    double offdiag = 0.0;
    if (spec.field != 0.0) {
      for (int i = 0; i < nv; ++i) {
        const double delta = 1.0 - 2.0 * samples(r, i);
        double flipped = 0.0;
        for (int j = 0; j < nh; ++j) flipped += softplus(theta(r, j) + delta * w_rows(j, i));
        // F(flip) - F(v) = -b_i delta - (sum softplus' - sum softplus)
        const double df = -p.visible_bias(i) * delta - (flipped - base);
        offdiag += std::exp(-0.5 * df);
      }
    }
    out(r) = bond_energy(spec, samples.data() + r, samples.outerStride()) - spec.field * offdiag;
  }
  return out;
}

double local_energy(const RbmParams& p, const TfimSpec& spec, const VectorRef& v) {
  if (v.size() != p.n_visible()) throw DimensionError("local_energy: visible vector length mismatch");
  Eigen::MatrixXd row = v.transpose();
  return local_energies(p, spec, row)(0);
}

EnergyEstimate estimate_energy(const RbmParams& p, const TfimSpec& spec, const EstimatorConfig& config) {
  config.validate();
  require_match(p, spec);
  const Eigen::VectorXd e = local_energies(p, spec, sample_model(p, config.sampler()));
  EnergyEstimate est;
  est.n_samples = static_cast<std::size_t>(e.size());
  est.mean = e.mean();
  const double ss = (e.array() - est.mean).square().sum();
  est.std_dev = std::sqrt(ss / static_cast<double>(e.size() - 1));
  return est;
}

double exact_rbm_energy(const RbmParams& p, const TfimSpec& spec) {
  require_match(p, spec);
  const ExactRbmStats st = exact_distribution(p);
  return st.probabilities.dot(local_energies(p, spec, enumerate_states(p.n_visible())));
}

RoeResult roe(const EnergyEstimate& estimate, double exact_u, double threshold, double c) {
  if (exact_u == 0.0) throw DomainError("relative error undefined for exact energy 0");
  if (estimate.n_samples < 2) throw DomainError("roe needs at least two samples");
  const double half_width = c * estimate.std_error();
  const double upper = std::abs(exact_u - (estimate.mean + half_width));
  const double lower = std::abs(exact_u - (estimate.mean - half_width));
  RoeResult r;
  r.epsilon = std::max(upper, lower) / std::abs(exact_u);
  r.exact_energy = exact_u;
  r.estimate = estimate;
  r.threshold = threshold;
  r.converged = r.epsilon <= threshold;
  return r;
}

void CriterionSchedule::validate() const {
  if (check_every < 1) throw DomainError("check_every must be >= 1");
  if (epoch_budget < 0) throw DomainError("epoch_budget must be >= 0");
  if (!(threshold >= 0.0)) throw DomainError("criterion threshold must be >= 0");
}

CriterionRun train_to_criterion(const RbmParams& init, const Eigen::MatrixXd& data, const TfimSpec& spec,
                                double exact_u, const TrainConfig& train, const EstimatorConfig& estimator,
                                const CriterionSchedule& schedule) {
  schedule.validate();
  estimator.validate();
  Trainer trainer(init, data, train);
  CriterionRun run;
  std::uint64_t check_index = 0;
  const auto check = [&] {
    EstimatorConfig cfg = estimator;
    cfg.seed = derive_seed(estimator.seed, check_index++);
    const RoeResult r = roe(estimate_energy(trainer.params(), spec, cfg), exact_u, schedule.threshold,
                            cfg.confidence);
    run.checks.push_back({trainer.epochs_done(), cfg.seed, r});
    return r.converged;
  };

  bool done = schedule.check_initial && check();
  while (!done && trainer.epochs_done() < schedule.epoch_budget) {
    trainer.run_epochs(std::min(schedule.check_every, schedule.epoch_budget - trainer.epochs_done()));
    done = check();
  }
  if (run.checks.empty()) check();
  run.converged = run.last().converged;
  run.params = trainer.params();
  run.epochs_used = trainer.epochs_done();
  return run;
}

std::string roe_csv_row(const TfimSpec& spec, int n_hidden, std::size_t m, int epoch, const RoeResult& r,
                        std::uint64_t seed) {
  return std::to_string(spec.n_qubits) + "," + format_real(spec.field_ratio()) + "," + std::to_string(n_hidden) +
         "," + std::to_string(m) + "," + std::to_string(epoch) + "," + format_real(r.exact_energy) + "," +
         format_real(r.estimate.mean) + "," + format_real(r.estimate.std_dev) + "," +
         std::to_string(r.estimate.n_samples) + "," + format_real(r.epsilon) + "," + (r.converged ? "1" : "0") +
         "," + std::to_string(seed);
}

}  // namespace rbmscale
