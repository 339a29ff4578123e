#pragma once

#include "rbmscale/rbm.hpp"

#include <string>
#include <vector>

namespace rbmscale {

/// Bias-free RBM in the +/-1 language: E(s_v, s_h) = -s_v' W s_h.
struct SpinRbm {
  Eigen::MatrixXd weights;
};

/// Occupation-basis parameters with the same visible marginal:
/// W = 4 W~, b_i = -2 sum_j W~_ij, c_j = -2 sum_i W~_ij. The constant
/// sum_ij W~_ij left over by the substitution cancels in the partition function.
RbmParams spin_to_occupation(const SpinRbm& spin);

inline constexpr double kRatioBiasGuard = 1e-12;

struct SymmetryReport {
  Eigen::VectorXd alpha;  // sum_j W_ij / b_i, NaN where undefined
  Eigen::VectorXd beta;   // sum_i W_ij / c_j, NaN where undefined
  double z2_deviation = 0.0;
  std::vector<int> undefined_alpha;  // visible indices with |b_i| < guard
  std::vector<int> undefined_beta;   // hidden indices with |c_j| < guard
};

/// Row/column weight sums over biases; leaves z2_deviation at 0.
SymmetryReport bias_ratios(const RbmParams& p);

/// max_v |p(v) - p(flip-all v)| under the exact marginal (N <= 16).
double z2_invariance_check(const RbmParams& p);

/// bias_ratios plus z2_invariance_check.
SymmetryReport symmetry_report(const RbmParams& p);

/// Median of the defined entries; NaN if none.
double median_defined(const Eigen::VectorXd& ratios);

// CSV "kind,index,value": one alpha row per visible unit, one beta row per
// hidden unit ("undefined" for guarded entries), then "z2_deviation,,<value>".
inline constexpr const char* kSymmetryCsvHeader = "kind,index,value";
std::vector<std::string> symmetry_csv_rows(const SymmetryReport& report);

}  // namespace rbmscale
