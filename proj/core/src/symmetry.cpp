#include "rbmscale/symmetry.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbmscale {

RbmParams spin_to_occupation(const SpinRbm& spin) {
  if (spin.weights.size() == 0) throw DimensionError("spin RBM has no weights");
  if (!spin.weights.allFinite()) throw NumericalError("spin RBM weights must be finite");
  RbmParams p;
  p.weights = 4.0 * spin.weights;
  p.visible_bias = -2.0 * spin.weights.rowwise().sum();
  p.hidden_bias = -2.0 * spin.weights.colwise().sum().transpose();
  return p;
}

SymmetryReport bias_ratios(const RbmParams& p) {
  p.validate();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SymmetryReport r;
  const Eigen::VectorXd row_sums = p.weights.rowwise().sum();
  const Eigen::VectorXd col_sums = p.weights.colwise().sum().transpose();
  r.alpha.resize(p.n_visible());
  r.beta.resize(p.n_hidden());
  for (int i = 0; i < p.n_visible(); ++i) {
    if (std::abs(p.visible_bias(i)) < kRatioBiasGuard) {
      r.alpha(i) = nan;
      r.undefined_alpha.push_back(i);
    } else {
      r.alpha(i) = row_sums(i) / p.visible_bias(i);
    }
  }
  for (int j = 0; j < p.n_hidden(); ++j) {
    if (std::abs(p.hidden_bias(j)) < kRatioBiasGuard) {
      r.beta(j) = nan;
      r.undefined_beta.push_back(j);
    } else {
      r.beta(j) = col_sums(j) / p.hidden_bias(j);
    }
  }
  return r;
}

double z2_invariance_check(const RbmParams& p) {
  const Eigen::VectorXd probs = exact_distribution(p).probabilities;
  const int n = p.n_visible();
  double worst = 0.0;
  for (Eigen::Index s = 0; s < probs.size(); ++s) {
    const auto mirror = static_cast<Eigen::Index>(flip_all(static_cast<State>(s), n));
    worst = std::max(worst, std::abs(probs(s) - probs(mirror)));
  }
  return worst;
}

SymmetryReport symmetry_report(const RbmParams& p) {
  SymmetryReport r = bias_ratios(p);
  r.z2_deviation = z2_invariance_check(p);
  return r;
}

double median_defined(const Eigen::VectorXd& ratios) {
  std::vector<double> v;
  for (Eigen::Index k = 0; k < ratios.size(); ++k) {
    if (!std::isnan(ratios(k))) v.push_back(ratios(k));
  }
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<std::string> symmetry_csv_rows(const SymmetryReport& report) {
  std::vector<std::string> rows;
  const auto emit = [&rows](const char* kind, const Eigen::VectorXd& values) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      rows.push_back(std::string(kind) + "," + std::to_string(k) + "," +
                     (std::isnan(values(k)) ? std::string("undefined") : format_real(values(k))));
    }
  };
  emit("alpha", report.alpha);
  emit("beta", report.beta);
  rows.push_back("z2_deviation,," + format_real(report.z2_deviation));
  return rows;
}

}  // namespace rbmscale
