#pragma once

#include "rbmscale/estimator.hpp"
#include "rbmscale/pruner.hpp"
#include "rbmscale/rbm.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rbmscale {

/// Line-oriented "key = value" settings. '#' starts a comment; later keys win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void merge(const KeyValueConfig& other);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  void write(std::ostream& os) const;

 private:
  std::map<std::string, std::string> entries_;
};

struct HiddenGrid {
  int start = 1;
  int step = 1;
  int max = 20;
};

struct SweepConfig {
  std::vector<int> qubit_sizes{6, 8, 10};
  std::vector<double> field_ratios{1.0};
  double coupling = 1.0;
  HiddenGrid hidden_grid;
  std::size_t pool_size = 100000;
  std::size_t sample_step = 500;
  std::size_t sample_max = 20000;
  double alpha_ratio = 0.5;
  int repeats = 3;
  // Sample-complexity runs count their budget in mini-batch updates so that
  // small datasets get as many optimizer steps as large ones. 0 = use epochs.
  std::size_t update_budget = 300000;
  std::size_t check_every_updates = 20000;
  bool symmetry_break = false;
  std::uint64_t seed = 1;
  int workers = 1;
  TrainConfig train;
  EstimatorConfig estimator;
  CriterionSchedule criterion;

  void validate() const;
};

/// Everything a CLI invocation can be configured with.
struct RunSettings {
  std::uint64_t seed = 1;
  int workers = 1;
  int n_qubits = 10;
  double coupling = 1.0;
  double field_ratio = 1.0;
  int n_hidden = 5;
  std::string data_file;
  std::string model_file;
  std::string input_file;
  TrainConfig train;
  EstimatorConfig estimator;
  CriterionSchedule criterion;
  PruneSchedule prune;
  SweepConfig sweep;

  TfimSpec spec() const { return TfimSpec::from_ratio(n_qubits, field_ratio, coupling); }
};

/// Throws ConfigError for unknown keys or malformed values. Keys beginning with
/// "manifest." are ignored so a run manifest can be fed back as a config.
RunSettings settings_from_config(const KeyValueConfig& config);

/// Full snapshot, suitable for settings_from_config.
KeyValueConfig config_from_settings(const RunSettings& settings);

const std::vector<std::string>& known_config_keys();

}  // namespace rbmscale
