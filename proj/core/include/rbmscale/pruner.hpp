#pragma once

#include "rbmscale/estimator.hpp"
#include "rbmscale/rbm.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rbmscale {

struct PruneSchedule {
  double first_fraction = 0.40;
  double later_fraction = 0.05;
  int finetune_epoch_budget = 500;
  int check_every = 25;
  double criterion_threshold = kDefaultRoeThreshold;
  // Retry a failed fine-tune once with fresh seeds before giving up.
  bool retry_on_failure = false;

  void validate() const;
};

/// Magnitude cut: prune every active weight with |W| < delta, plus as many
/// |W| == delta ties (lowest row-major flat index first) as needed to remove
/// exactly `count` weights.
struct PruneCut {
  double delta = 0.0;
  std::size_t count = 0;
};

/// delta = k-th smallest |W| among active weights, k = floor(fraction * active).
/// For k = 0, delta lies strictly below the smallest active magnitude.
PruneCut prune_threshold(const RbmParams& p, const WeightMask& mask, double fraction);

struct PrunedModel {
  RbmParams params;
  WeightMask mask;
};

/// Zeroes and freezes every active weight with |W| <= delta. Biases are untouched.
PrunedModel apply_prune(const RbmParams& p, const WeightMask& mask, double delta);

/// Zeroes and freezes exactly cut.count active weights, smallest magnitude first.
PrunedModel apply_prune(const RbmParams& p, const WeightMask& mask, const PruneCut& cut);

struct PruneIteration {
  int iteration = 0;
  double delta = 0.0;
  std::size_t pruned = 0;
  std::size_t weights_remaining = 0;
  int finetune_epochs = 0;
  double epsilon = 0.0;
  bool passed = false;
  int attempts = 1;
};

enum class PruneStop {
  kCriterionFailed,   // fine-tuning could not restore the criterion
  kNothingToPrune,    // floor(fraction * active) reached zero
};

struct PruneReport {
  double initial_epsilon = 0.0;
  std::vector<PruneIteration> iterations;
  RbmParams final_model;      // last model that satisfied the criterion
  WeightMask final_mask;
  std::size_t final_nonzero_weights = 0;  // active (unfrozen) weights of final_model
  PruneStop stop = PruneStop::kCriterionFailed;
};

/// Iterative prune -> fine-tune -> check loop. The input model must already pass
/// the criterion (PreconditionError otherwise). `initial_mask`, if given, marks
/// weights that are already pruned.
PruneReport prune_loop(const RbmParams& params, const Eigen::MatrixXd& data, const TfimSpec& spec, double exact_u,
                       const PruneSchedule& schedule, const TrainConfig& train, const EstimatorConfig& estimator,
                       const WeightMask* initial_mask = nullptr);

inline constexpr const char* kPruneCsvHeader = "iteration,delta,weights_remaining,finetune_epochs,epsilon,passed";
std::string prune_csv_row(const PruneIteration& it);

}  // namespace rbmscale
