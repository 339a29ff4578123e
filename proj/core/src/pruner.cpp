#include "rbmscale/pruner.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace rbmscale {

void PruneSchedule::validate() const {
  const auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
  if (!in_unit(first_fraction) || !in_unit(later_fraction)) throw DomainError("prune fractions must lie in (0, 1)");
  if (finetune_epoch_budget < 0) throw DomainError("finetune_epoch_budget must be >= 0");
  if (check_every < 1) throw DomainError("check_every must be >= 1");
  if (!(criterion_threshold >= 0.0)) throw DomainError("criterion threshold must be >= 0");
}

namespace {

struct Candidate {
  double magnitude;
  Eigen::Index flat;  // row-major i * N_h + j
};

void require_mask_shape(const RbmParams& p, const WeightMask& mask) {
  if (mask.rows() != p.weights.rows() || mask.cols() != p.weights.cols()) {
    throw DimensionError("weight mask shape does not match W");
  }
}

std::vector<Candidate> active_by_magnitude(const RbmParams& p, const WeightMask& mask) {
  std::vector<Candidate> out;
  const Eigen::Index nh = p.weights.cols();
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < nh; ++j) {
      if (mask(i, j) != 0) out.push_back({std::abs(p.weights(i, j)), i * nh + j});
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.magnitude, a.flat) < std::tie(b.magnitude, b.flat);
  });
  return out;
}

void freeze(PrunedModel& m, Eigen::Index flat) {
  const Eigen::Index nh = m.params.weights.cols();
  m.params.weights(flat / nh, flat % nh) = 0.0;
  m.mask(flat / nh, flat % nh) = 0;
}

}  // namespace

PruneCut prune_threshold(const RbmParams& p, const WeightMask& mask, double fraction) {
  require_mask_shape(p, mask);
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("prune fraction must lie in (0, 1)");
  const auto active = active_by_magnitude(p, mask);
  if (active.empty()) throw PreconditionError("no unpruned weights left");
  // The small offset keeps products like 0.05 * 20 from rounding down.
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(active.size()) + 1e-9));
  if (k == 0) {
    return {std::nextafter(active.front().magnitude, -std::numeric_limits<double>::infinity()), 0};
  }
  return {active[k - 1].magnitude, k};
}

PrunedModel apply_prune(const RbmParams& p, const WeightMask& mask, double delta) {
  require_mask_shape(p, mask);
  PrunedModel out{p, mask};
  for (const Candidate& c : active_by_magnitude(p, mask)) {
    if (c.magnitude > delta) break;
    freeze(out, c.flat);
  }
  return out;
}

PrunedModel apply_prune(const RbmParams& p, const WeightMask& mask, const PruneCut& cut) {
  require_mask_shape(p, mask);
  PrunedModel out{p, mask};
  const auto active = active_by_magnitude(p, mask);
  if (cut.count > active.size()) throw DomainError("prune count exceeds active weights");
  for (std::size_t k = 0; k < cut.count; ++k) {
    if (active[k].magnitude > cut.delta) throw DomainError("prune cut is inconsistent with its threshold");
    freeze(out, active[k].flat);
  }
  return out;
}

PruneReport prune_loop(const RbmParams& params, const Eigen::MatrixXd& data, const TfimSpec& spec, double exact_u,
                       const PruneSchedule& schedule, const TrainConfig& train, const EstimatorConfig& estimator,
                       const WeightMask* initial_mask) {
  schedule.validate();
  estimator.validate();
  params.validate();
  WeightMask mask = initial_mask != nullptr ? *initial_mask : full_mask(params.n_visible(), params.n_hidden());
  require_mask_shape(params, mask);

  EstimatorConfig first_check = estimator;
  first_check.seed = derive_seed(estimator.seed, 0);
  const RoeResult start = roe(estimate_energy(params, spec, first_check), exact_u, schedule.criterion_threshold,
                              estimator.confidence);
  if (!start.converged) {
    throw PreconditionError("input model fails the criterion (epsilon " + format_real(start.epsilon) + ")");
  }

  PruneReport report;
  report.initial_epsilon = start.epsilon;
  RbmParams current = params;
  const CriterionSchedule finetune{schedule.check_every, schedule.finetune_epoch_budget,
                                   schedule.criterion_threshold, true};

  for (int t = 0;; ++t) {
    const std::size_t active = active_count(mask);
    if (active == 0) {
      report.stop = PruneStop::kNothingToPrune;
      break;
    }
    const PruneCut cut = prune_threshold(current, mask, t == 0 ? schedule.first_fraction : schedule.later_fraction);
    if (cut.count == 0) {
      report.stop = PruneStop::kNothingToPrune;
      break;
    }
    const PrunedModel pruned = apply_prune(current, mask, cut);

    const auto attempt = [&](std::uint64_t stream) {
      TrainConfig tc = train;
      tc.freeze_mask = pruned.mask;
      tc.seed = derive_seed(train.seed, stream);
      EstimatorConfig ec = estimator;
      ec.seed = derive_seed(estimator.seed, stream);
      return train_to_criterion(pruned.params, data, spec, exact_u, tc, ec, finetune);
    };
    const auto base_stream = 2 * static_cast<std::uint64_t>(t) + 1;
    CriterionRun run = attempt(base_stream);
    int attempts = 1;
    if (!run.converged && schedule.retry_on_failure) {
      run = attempt(base_stream + 1);
      attempts = 2;
    }
    report.iterations.push_back({t, cut.delta, cut.count, active - cut.count, run.epochs_used, run.last().epsilon,
                                 run.converged, attempts});
    if (!run.converged) {
      report.stop = PruneStop::kCriterionFailed;
      break;
    }
    current = std::move(run.params);
    mask = pruned.mask;
  }
  report.final_model = std::move(current);
  report.final_mask = std::move(mask);
  report.final_nonzero_weights = active_count(report.final_mask);
  return report;
}

std::string prune_csv_row(const PruneIteration& it) {
  return std::to_string(it.iteration) + "," + format_real(it.delta) + "," + std::to_string(it.weights_remaining) +
         "," + std::to_string(it.finetune_epochs) + "," + format_real(it.epsilon) + "," + (it.passed ? "1" : "0");
}

}  // namespace rbmscale
