#include "commands.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"
#include "rbmscale/harness.hpp"
#include "rbmscale/pruner.hpp"
#include "rbmscale/rng.hpp"
#include "rbmscale/symmetry.hpp"
#include "rbmscale/tfim.hpp"
#include "rbmscale/version.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace rbmscale::cli {

namespace fs = std::filesystem;

namespace {

// Seed streams of the single-run commands.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kEstimatorStream = 4;

class Run {
 public:
  explicit Run(const Invocation& inv) : inv_(inv), settings_(inv.settings) {
    manifest_.command = inv.command;
    manifest_.version = kVersion;
    manifest_.started = utc_timestamp();
    std::error_code ec;
    fs::create_directories(inv.out_dir, ec);
    if (ec) throw IoError("cannot create " + inv.out_dir.string() + ": " + ec.message());
  }

  RunSettings& settings() { return settings_; }

  void note_seed(std::uint64_t seed) {
    if (std::find(manifest_.seeds.begin(), manifest_.seeds.end(), seed) == manifest_.seeds.end()) {
      manifest_.seeds.push_back(seed);
    }
  }

  std::uint64_t seed(std::uint64_t stream) {
    const std::uint64_t s = derive_seed(settings_.seed, stream);
    note_seed(s);
    return s;
  }

  std::ofstream open(const std::string& name) {
    const fs::path path = inv_.out_dir / name;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    outputs_.push_back(name);
    return os;
  }

  void write_csv(const std::string& name, const char* header, const std::vector<std::string>& rows) {
    std::ofstream os = open(name);
    os << header << '\n';
    for (const auto& r : rows) os << r << '\n';
    if (!os) throw IoError("failed writing " + name);
  }

  void finish() {
    manifest_.finished = utc_timestamp();
    manifest_.config = config_from_settings(settings_);
    for (const auto& name : outputs_) manifest_.digests.emplace_back(name, sha256_file(inv_.out_dir / name));
    const fs::path path = inv_.out_dir / "manifest.txt";
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    manifest_.write(os);
  }

 private:
  const Invocation& inv_;
  RunSettings settings_;
  RunManifest manifest_;
  std::vector<std::string> outputs_;
};

SamplingSector sector(const RunSettings& s) {
  return s.sweep.symmetry_break ? SamplingSector::kPositiveMagnetization : SamplingSector::kFull;
}

std::ifstream open_input(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " given");
  std::ifstream is(path);
  if (!is) throw IoError(std::string("cannot open ") + what + " " + path);
  return is;
}

Checkpoint load_model(Run& run) {
  std::ifstream is = open_input(run.settings().model_file, "model file");
  Checkpoint cp = read_checkpoint(is);
  run.settings().n_qubits = static_cast<int>(cp.params.n_visible());
  run.settings().n_hidden = static_cast<int>(cp.params.n_hidden());
  return cp;
}

// Dataset from data_file, or a fresh pool of pool_size shots.
MeasurementDataset load_or_sample(Run& run, const GroundState& gs) {
  const RunSettings& s = run.settings();
  if (!s.data_file.empty()) {
    std::ifstream is = open_input(s.data_file, "data file");
    MeasurementDataset ds = read_dataset(is);
    if (ds.n_qubits != s.n_qubits) {
      throw ConfigError("data file has N = " + std::to_string(ds.n_qubits) + " but n_qubits = " +
                        std::to_string(s.n_qubits));
    }
    return ds;
  }
  return sample_measurements(gs, s.sweep.pool_size, run.seed(kDataStream), sector(s));
}

// N is taken from the data file when one is given.
void adopt_data_size(Run& run) {
  RunSettings& s = run.settings();
  if (s.data_file.empty()) return;
  std::ifstream is = open_input(s.data_file, "data file");
  int n = 0;
  if (!(is >> n)) throw IoError("malformed data file header in " + s.data_file);
  s.n_qubits = n;
}

int gen_data(Run& run) {
  const RunSettings& s = run.settings();
  const TfimSpec spec = s.spec();
  const GroundState gs = solve_ground_state(spec);
  const MeasurementDataset ds = sample_measurements(gs, s.sweep.pool_size, run.seed(kDataStream), sector(s));
  {
    std::ofstream os = run.open("data.txt");
    write_dataset(os, ds);
  }
  run.write_csv("energy.csv", kEnergyCsvHeader, {energy_csv_row(spec, gs.energy)});
  const DatasetStatistics st = dataset_statistics(ds);
  std::cout << "N=" << spec.n_qubits << " h/J=" << format_real(spec.field_ratio()) << " E0=" << format_real(gs.energy)
            << " shots=" << ds.size() << " magnetization=" << format_real(st.magnetization) << '\n';
  run.finish();
  return kOk;
}

int train_cmd(Run& run) {
  adopt_data_size(run);
  const RunSettings& s = run.settings();
  const TfimSpec spec = s.spec();
  const GroundState gs = solve_ground_state(spec);
  const MeasurementDataset ds = load_or_sample(run, gs);
  const RbmParams init = RbmParams::random(s.n_qubits, s.n_hidden, s.train.init_scale, run.seed(kInitStream));
  TrainConfig tc = s.train;
  tc.seed = run.seed(kTrainStream);
  EstimatorConfig ec = s.estimator;
  ec.seed = run.seed(kEstimatorStream);

  const CriterionRun result = train_to_criterion(init, ds.to_matrix(), spec, gs.energy, tc, ec, s.criterion);
  {
    std::ofstream os = run.open("model.txt");
    write_checkpoint(os, result.params);
  }
  std::vector<std::string> rows;
  for (const auto& c : result.checks) {
    rows.push_back(roe_csv_row(spec, s.n_hidden, ds.size(), c.epoch, c.result, c.estimator_seed));
  }
  run.write_csv("roe.csv", kRoeCsvHeader, rows);
  std::cout << "epochs=" << result.epochs_used << " epsilon=" << format_real(result.last().epsilon)
            << (result.converged ? " criterion met" : " criterion not met") << '\n';
  run.finish();
  return result.converged ? kOk : kCriterionNotMet;
}

int estimate_cmd(Run& run) {
  const Checkpoint cp = load_model(run);
  const RunSettings& s = run.settings();
  const TfimSpec spec = s.spec();
  const GroundState gs = solve_ground_state(spec);
  EstimatorConfig ec = s.estimator;
  ec.seed = run.seed(kEstimatorStream);
  const RoeResult r = roe(estimate_energy(cp.params, spec, ec), gs.energy, s.criterion.threshold, ec.confidence);
  run.write_csv("roe.csv", kRoeCsvHeader, {roe_csv_row(spec, s.n_hidden, 0, 0, r, ec.seed)});
  std::cout << "U=" << format_real(r.exact_energy) << " mean=" << format_real(r.estimate.mean)
            << " epsilon=" << format_real(r.epsilon) << (r.converged ? " criterion met" : " criterion not met") << '\n';
  run.finish();
  return kOk;
}

std::vector<std::string> record_rows(const std::vector<SweepRecord>& records) {
  std::vector<std::string> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(sweep_record_csv_row(r));
  return rows;
}

void note_sweep_seeds(Run& run, const SweepConfig& c) {
  for (double h : c.field_ratios) {
    for (int n : c.qubit_sizes) {
      run.note_seed(pool_seed(c.seed, n, h));
      for (int r = 0; r < c.repeats; ++r) run.note_seed(repeat_seed(c.seed, n, h, r));
    }
  }
}

int sweep_nh(Run& run) {
  const SweepConfig& c = run.settings().sweep;
  note_sweep_seeds(run, c);
  const HiddenUnitSweep sweep = sweep_hidden_units(c);
  run.write_csv("records.csv", kSweepRecordCsvHeader, record_rows(sweep.records));
  std::vector<std::string> rows;
  for (const auto& m : sweep.minima) {
    rows.push_back(minimal_hidden_csv_row(m));
    std::cout << "N=" << m.n_qubits << " h/J=" << format_real(m.h_over_j) << " min N_h="
              << (m.found ? std::to_string(m.n_hidden) : std::string("not found")) << '\n';
  }
  run.write_csv("minimal_nh.csv", kMinimalHiddenCsvHeader, rows);
  run.finish();
  return kOk;
}

int sweep_m(Run& run) {
  const SweepConfig& c = run.settings().sweep;
  note_sweep_seeds(run, c);
  const SampleComplexitySweep sweep = sweep_sample_complexity(c);
  run.write_csv("records.csv", kSweepRecordCsvHeader, record_rows(sweep.records));
  std::vector<std::string> minima;
  std::vector<std::string> per_seed;
  for (const auto& m : sweep.minima) {
    minima.push_back(minimal_samples_csv_row(m));
    for (std::size_t k = 0; k < m.seeds.size(); ++k) {
      per_seed.push_back(std::to_string(m.n_qubits) + "," + format_real(m.h_over_j) + "," +
                         std::to_string(m.n_hidden) + "," + std::to_string(m.seeds[k]) + "," +
                         std::to_string(m.per_seed[k]));
    }
    std::cout << "N=" << m.n_qubits << " h/J=" << format_real(m.h_over_j) << " N_h=" << m.n_hidden
              << " mean min M=" << format_real(m.mean) << (m.found ? "" : " (cap reached on some seeds)") << '\n';
  }
  run.write_csv("minimal_m.csv", kMinimalSamplesCsvHeader, minima);
  run.write_csv("seed_minima.csv", kSeedMinimaCsvHeader, per_seed);
  run.finish();
  return kOk;
}

int prune_cmd(Run& run) {
  const Checkpoint cp = load_model(run);
  const RunSettings& s = run.settings();
  if (!s.data_file.empty()) {
    std::ifstream is = open_input(s.data_file, "data file");
    int n = 0;
    is >> n;
    if (n != s.n_qubits) throw ConfigError("data file and model disagree on N");
  }
  const TfimSpec spec = s.spec();
  const GroundState gs = solve_ground_state(spec);
  const MeasurementDataset ds = load_or_sample(run, gs);
  TrainConfig tc = s.train;
  tc.seed = run.seed(kTrainStream);
  EstimatorConfig ec = s.estimator;
  ec.seed = run.seed(kEstimatorStream);

  PruneReport report;
  try {
    report = prune_loop(cp.params, ds.to_matrix(), spec, gs.energy, s.prune, tc, ec, cp.mask ? &*cp.mask : nullptr);
  } catch (const PreconditionError& e) {
    std::cerr << "prune: " << e.what() << '\n';
    run.finish();
    return kCriterionNotMet;
  }
  std::vector<std::string> rows;
  for (const auto& it : report.iterations) rows.push_back(prune_csv_row(it));
  run.write_csv("prune.csv", kPruneCsvHeader, rows);
  {
    std::ofstream os = run.open("pruned_model.txt");
    write_checkpoint(os, report.final_model, &report.final_mask);
  }
  std::cout << "initial epsilon=" << format_real(report.initial_epsilon) << " weights "
            << cp.params.weights.size() << " -> " << report.final_nonzero_weights << " ("
            << (report.stop == PruneStop::kNothingToPrune ? "nothing left to prune" : "fine-tuning failed") << ")\n";
  run.finish();
  return kOk;
}

int spectrum_cmd(Run& run) {
  const Checkpoint cp = load_model(run);
  const std::vector<double> spectrum = weight_spectrum(cp.params);
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < spectrum.size(); ++k) rows.push_back(std::to_string(k + 1) + "," + format_real(spectrum[k]));
  run.write_csv("spectrum.csv", kSpectrumCsvHeader, rows);
  std::cout << "top 20% of weights carry " << format_real(spectrum_mass_fraction(spectrum, 0.2))
            << " of sum |W|\n";
  run.finish();
  return kOk;
}

int symmetry_cmd(Run& run) {
  const Checkpoint cp = load_model(run);
  const SymmetryReport report = symmetry_report(cp.params);
  run.write_csv("symmetry.csv", kSymmetryCsvHeader, symmetry_csv_rows(report));
  std::cout << "median alpha=" << format_real(median_defined(report.alpha))
            << " median beta=" << format_real(median_defined(report.beta))
            << " z2 deviation=" << format_real(report.z2_deviation) << '\n';
  run.finish();
  return kOk;
}

// Reads a minimal_nh.csv table and fits min N_h against N for each h/J.
int fit_cmd(Run& run) {
  std::ifstream is = open_input(run.settings().input_file, "input table");
  std::string line;
  if (!std::getline(is, line) || trim(line) != kMinimalHiddenCsvHeader) {
    throw IoError("input table must start with '" + std::string(kMinimalHiddenCsvHeader) + "'");
  }
  std::map<double, std::vector<std::pair<double, double>>> groups;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 4) throw IoError("malformed row in input table: " + line);
    if (trim(f[3]) != "1") continue;
    groups[parse_real(f[1])].emplace_back(parse_real(f[0]), parse_real(f[2]));
  }
  std::vector<std::string> rows;
  for (const auto& [h, points] : groups) {
    std::set<double> xs;
    for (const auto& p : points) xs.insert(p.first);
    if (xs.size() < 2) {
      std::cerr << "fit: skipping h/J=" << format_real(h) << ", fewer than two distinct N\n";
      continue;
    }
    const LinearFit fit = linear_fit(points);
    rows.push_back(format_real(h) + "," + format_real(fit.slope) + "," + format_real(fit.intercept) + "," +
                   format_real(fit.residual_norm) + "," + std::to_string(points.size()));
    std::cout << "h/J=" << format_real(h) << " slope=" << format_real(fit.slope)
              << " intercept=" << format_real(fit.intercept) << '\n';
  }
  run.write_csv("fit.csv", kFitCsvHeader, rows);
  run.finish();
  return kOk;
}

}  // namespace

int run_command(const Invocation& inv) {
  static const std::map<std::string, int (*)(Run&)> table = {
      {"gen-data", gen_data}, {"train", train_cmd},   {"estimate", estimate_cmd}, {"sweep-nh", sweep_nh},
      {"sweep-m", sweep_m},   {"prune", prune_cmd},   {"spectrum", spectrum_cmd}, {"symmetry", symmetry_cmd},
      {"fit", fit_cmd},
  };
  const auto it = table.find(inv.command);
  if (it == table.end()) throw ConfigError("unknown command " + inv.command);
  Run run(inv);
  return it->second(run);
}

}  // namespace rbmscale::cli
