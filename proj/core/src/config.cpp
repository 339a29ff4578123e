#include "rbmscale/config.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rbmscale {

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, trim(body.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse(in);
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::write(std::ostream& os) const {
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

void SweepConfig::validate() const {
  if (qubit_sizes.empty()) throw ConfigError("qubit_sizes must not be empty");
  if (field_ratios.empty()) throw ConfigError("field_ratios must not be empty");
  for (int n : qubit_sizes) {
    if (n < 1 || n > kMaxEnumerationQubits) throw ConfigError("qubit sizes must lie in [1, 16]");
  }
  if (hidden_grid.start < 1 || hidden_grid.step < 1 || hidden_grid.max < hidden_grid.start) {
    throw ConfigError("hidden grid needs start >= 1, step >= 1, max >= start");
  }
  if (sample_step < 1 || sample_max < sample_step) throw ConfigError("need sample_step >= 1 and sample_max >= sample_step");
  if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (!(alpha_ratio > 0.0)) throw ConfigError("alpha_ratio must be positive");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (update_budget > 0 && check_every_updates < 1) throw ConfigError("check_every_updates must be >= 1");
  try {
    train.validate();
    estimator.validate();
    criterion.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

namespace {

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    if (v < static_cast<long long>(std::numeric_limits<T>::min()) ||
        static_cast<unsigned long long>(std::max(v, 0LL)) > static_cast<unsigned long long>(std::numeric_limits<T>::max())) {
      throw std::out_of_range("range");
    }
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
  }
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    const double v = parse_real(text);
    if (!std::isfinite(v)) throw DomainError("non-finite");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a real number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<std::string> list_items(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream ss(normalized);
  std::vector<std::string> out;
  std::string item;
  while (ss >> item) out.push_back(item);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + std::to_string(v[k]);
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + format_real(v[k]);
  return out;
}

using Setter = std::function<void(RunSettings&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const RunSettings&)>;

struct KeyBinding {
  std::string key;
  Setter set;
  Getter get;
};

template <typename T>
KeyBinding int_key(std::string key, T RunSettings::*outer) {
  return {key, [outer](RunSettings& s, const std::string& k, const std::string& v) { s.*outer = parse_integer<T>(k, v); },
          [outer](const RunSettings& s) { return std::to_string(s.*outer); }};
}

template <typename T, typename Inner>
KeyBinding nested_int_key(std::string key, Inner RunSettings::*outer, T Inner::*inner) {
  return {key,
          [outer, inner](RunSettings& s, const std::string& k, const std::string& v) {
            (s.*outer).*inner = parse_integer<T>(k, v);
          },
          [outer, inner](const RunSettings& s) { return std::to_string((s.*outer).*inner); }};
}

template <typename Inner>
KeyBinding nested_real_key(std::string key, Inner RunSettings::*outer, double Inner::*inner) {
  return {key,
          [outer, inner](RunSettings& s, const std::string& k, const std::string& v) {
            (s.*outer).*inner = parse_double(k, v);
          },
          [outer, inner](const RunSettings& s) { return format_real((s.*outer).*inner); }};
}

KeyBinding real_key(std::string key, double RunSettings::*outer) {
  return {key, [outer](RunSettings& s, const std::string& k, const std::string& v) { s.*outer = parse_double(k, v); },
          [outer](const RunSettings& s) { return format_real(s.*outer); }};
}

KeyBinding string_key(std::string key, std::string RunSettings::*outer) {
  return {key, [outer](RunSettings& s, const std::string&, const std::string& v) { s.*outer = v; },
          [outer](const RunSettings& s) { return s.*outer; }};
}

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = [] {
    std::vector<KeyBinding> b;
    b.push_back({"seed", [](RunSettings& s, const std::string& k, const std::string& v) { s.seed = parse_u64(k, v); },
                 [](const RunSettings& s) { return std::to_string(s.seed); }});
    b.push_back(int_key("workers", &RunSettings::workers));
    b.push_back(int_key("n_qubits", &RunSettings::n_qubits));
    b.push_back(real_key("coupling", &RunSettings::coupling));
    b.push_back(real_key("field_ratio", &RunSettings::field_ratio));
    b.push_back(int_key("n_hidden", &RunSettings::n_hidden));
    b.push_back(string_key("data_file", &RunSettings::data_file));
    b.push_back(string_key("model_file", &RunSettings::model_file));
    b.push_back(string_key("input_file", &RunSettings::input_file));

    b.push_back(nested_real_key("learning_rate", &RunSettings::train, &TrainConfig::learning_rate));
    b.push_back(nested_int_key("batch_size", &RunSettings::train, &TrainConfig::batch_size));
    b.push_back(nested_int_key("cd_steps", &RunSettings::train, &TrainConfig::cd_steps));
    b.push_back(nested_int_key("epochs", &RunSettings::train, &TrainConfig::epochs));
    b.push_back(nested_real_key("init_scale", &RunSettings::train, &TrainConfig::init_scale));
    b.push_back(nested_real_key("momentum", &RunSettings::train, &TrainConfig::momentum));

    b.push_back(nested_int_key("n_samples", &RunSettings::estimator, &EstimatorConfig::n_samples));
    b.push_back(nested_int_key("n_chains", &RunSettings::estimator, &EstimatorConfig::n_chains));
    b.push_back(nested_int_key("burn_in", &RunSettings::estimator, &EstimatorConfig::burn_in));
    b.push_back(nested_int_key("keep_every", &RunSettings::estimator, &EstimatorConfig::keep_every));
    b.push_back(nested_real_key("confidence", &RunSettings::estimator, &EstimatorConfig::confidence));

    b.push_back(nested_real_key("threshold", &RunSettings::criterion, &CriterionSchedule::threshold));
    b.push_back(nested_int_key("check_every", &RunSettings::criterion, &CriterionSchedule::check_every));
    b.push_back(nested_int_key("epoch_budget", &RunSettings::criterion, &CriterionSchedule::epoch_budget));

    b.push_back(nested_real_key("first_fraction", &RunSettings::prune, &PruneSchedule::first_fraction));
    b.push_back(nested_real_key("later_fraction", &RunSettings::prune, &PruneSchedule::later_fraction));
    b.push_back(nested_int_key("finetune_epoch_budget", &RunSettings::prune, &PruneSchedule::finetune_epoch_budget));
    b.push_back(nested_int_key("prune_check_every", &RunSettings::prune, &PruneSchedule::check_every));
    b.push_back({"retry_on_failure",
                 [](RunSettings& s, const std::string& k, const std::string& v) { s.prune.retry_on_failure = parse_bool(k, v); },
                 [](const RunSettings& s) { return std::string(s.prune.retry_on_failure ? "true" : "false"); }});

    b.push_back({"qubit_sizes",
                 [](RunSettings& s, const std::string& k, const std::string& v) {
                   s.sweep.qubit_sizes.clear();
                   for (const auto& item : list_items(v)) s.sweep.qubit_sizes.push_back(parse_integer<int>(k, item));
                 },
                 [](const RunSettings& s) { return join_ints(s.sweep.qubit_sizes); }});
    b.push_back({"field_ratios",
                 [](RunSettings& s, const std::string& k, const std::string& v) {
                   s.sweep.field_ratios.clear();
                   for (const auto& item : list_items(v)) s.sweep.field_ratios.push_back(parse_double(k, item));
                 },
                 [](const RunSettings& s) { return join_reals(s.sweep.field_ratios); }});
    b.push_back({"hidden_start",
                 [](RunSettings& s, const std::string& k, const std::string& v) { s.sweep.hidden_grid.start = parse_integer<int>(k, v); },
                 [](const RunSettings& s) { return std::to_string(s.sweep.hidden_grid.start); }});
    b.push_back({"hidden_step",
                 [](RunSettings& s, const std::string& k, const std::string& v) { s.sweep.hidden_grid.step = parse_integer<int>(k, v); },
                 [](const RunSettings& s) { return std::to_string(s.sweep.hidden_grid.step); }});
    b.push_back({"hidden_max",
                 [](RunSettings& s, const std::string& k, const std::string& v) { s.sweep.hidden_grid.max = parse_integer<int>(k, v); },
                 [](const RunSettings& s) { return std::to_string(s.sweep.hidden_grid.max); }});
    b.push_back(nested_int_key("pool_size", &RunSettings::sweep, &SweepConfig::pool_size));
    b.push_back(nested_int_key("sample_step", &RunSettings::sweep, &SweepConfig::sample_step));
    b.push_back(nested_int_key("sample_max", &RunSettings::sweep, &SweepConfig::sample_max));
    b.push_back(nested_real_key("alpha_ratio", &RunSettings::sweep, &SweepConfig::alpha_ratio));
    b.push_back(nested_int_key("repeats", &RunSettings::sweep, &SweepConfig::repeats));
    b.push_back(nested_int_key("update_budget", &RunSettings::sweep, &SweepConfig::update_budget));
    b.push_back(nested_int_key("check_every_updates", &RunSettings::sweep, &SweepConfig::check_every_updates));
    b.push_back({"symmetry_break",
                 [](RunSettings& s, const std::string& k, const std::string& v) { s.sweep.symmetry_break = parse_bool(k, v); },
                 [](const RunSettings& s) { return std::string(s.sweep.symmetry_break ? "true" : "false"); }});
    return b;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

RunSettings settings_from_config(const KeyValueConfig& config) {
  RunSettings s;
  for (const auto& [key, value] : config.entries()) {
    if (key.rfind("manifest.", 0) == 0) continue;
    const auto& table = bindings();
    const auto it = std::find_if(table.begin(), table.end(), [&key](const KeyBinding& b) { return b.key == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(s, key, value);
  }
  // Shared settings flow into the sweep configuration.
  s.sweep.seed = s.seed;
  s.sweep.workers = s.workers;
  s.sweep.coupling = s.coupling;
  s.sweep.train = s.train;
  s.sweep.estimator = s.estimator;
  s.sweep.criterion = s.criterion;
  s.prune.criterion_threshold = s.criterion.threshold;

  if (s.workers < 1) throw ConfigError("workers must be >= 1");
  if (s.n_hidden < 1) throw ConfigError("n_hidden must be >= 1");
  try {
    s.spec().validate();
    s.train.validate();
    s.estimator.validate();
    s.criterion.validate();
    s.prune.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  s.sweep.validate();
  return s;
}

KeyValueConfig config_from_settings(const RunSettings& settings) {
  KeyValueConfig cfg;
  for (const auto& b : bindings()) cfg.set(b.key, b.get(settings));
  return cfg;
}

}  // namespace rbmscale
