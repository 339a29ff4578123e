#pragma once

#include "rbmscale/config.hpp"
#include "rbmscale/estimator.hpp"
#include "rbmscale/rbm.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rbmscale {

struct SweepRecord {
  int n_qubits = 0;
  double h_over_j = 0.0;
  int n_hidden = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  int epochs_used = 0;
  double epsilon = 0.0;      // at the last check
  double min_epsilon = 0.0;  // best over all checks of the run
  bool converged = false;
};

struct MinimalHidden {
  int n_qubits = 0;
  double h_over_j = 0.0;
  int n_hidden = 0;  // smallest grid value passing on a majority of seeds
  bool found = false;
};

struct HiddenUnitSweep {
  std::vector<SweepRecord> records;
  std::vector<MinimalHidden> minima;
};

struct MinimalSamples {
  int n_qubits = 0;
  double h_over_j = 0.0;
  int n_hidden = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> per_seed;  // 0 = cap reached without passing
  double mean = 0.0;                  // over seeds that passed
  bool found = false;                 // every seed passed
};

struct SampleComplexitySweep {
  std::vector<SweepRecord> records;
  std::vector<MinimalSamples> minima;
};

/// Seed of repeat r at a grid point; init, train and estimator streams derive from it.
std::uint64_t repeat_seed(std::uint64_t base, int n_qubits, double h_over_j, int repeat);
std::uint64_t pool_seed(std::uint64_t base, int n_qubits, double h_over_j);

/// Grows N_h from the grid start until a majority of `repeats` seeds pass the criterion.
HiddenUnitSweep sweep_hidden_units(const SweepConfig& config);

/// Minimal N_h per point recomputed from cached records at another threshold
/// (a run counts as passing if its best check reached the threshold).
std::vector<MinimalHidden> minimal_hidden_from_records(const std::vector<SweepRecord>& records, double threshold,
                                                       int repeats);

/// For each N, trains on nested prefixes M = step, 2 step, ... of one pool at
/// N_h = round(alpha N) and reports the smallest passing M per seed.
SampleComplexitySweep sweep_sample_complexity(const SweepConfig& config);

/// |W_ij| sorted descending.
std::vector<double> weight_spectrum(const RbmParams& p);

/// Share of sum |W| carried by the largest ceil(fraction * count) magnitudes.
double spectrum_mass_fraction(const std::vector<double>& spectrum, double fraction);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
};

/// Ordinary least squares; needs two distinct abscissae.
LinearFit linear_fit(const std::vector<std::pair<double, double>>& points);

/// Runs fn(i) for i in [0, count) on up to `workers` threads; rethrows the first error.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

inline constexpr const char* kSweepRecordCsvHeader =
    "N,h_over_J,N_hidden,M,seed,epochs_used,epsilon,min_epsilon,converged";
inline constexpr const char* kMinimalHiddenCsvHeader = "N,h_over_J,min_N_hidden,found";
inline constexpr const char* kMinimalSamplesCsvHeader = "N,h_over_J,N_hidden,mean_min_M,found";
inline constexpr const char* kSeedMinimaCsvHeader = "N,h_over_J,N_hidden,seed,min_M";
inline constexpr const char* kSpectrumCsvHeader = "rank,magnitude";
inline constexpr const char* kFitCsvHeader = "h_over_J,slope,intercept,residual_norm,points";

std::string sweep_record_csv_row(const SweepRecord& r);
std::string minimal_hidden_csv_row(const MinimalHidden& m);
std::string minimal_samples_csv_row(const MinimalSamples& m);

/// Provenance of one CLI run. Written as "manifest.*" keys followed by the
/// resolved configuration, so the file is itself a valid config.
struct RunManifest {
  std::string command;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> digests;  // file name, sha256 hex
  KeyValueConfig config;

  void write(std::ostream& os) const;
};

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

}  // namespace rbmscale
