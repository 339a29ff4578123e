#include "rbmscale/harness.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace rbmscale {

namespace {

std::uint64_t point_stream(int n_qubits, double h_over_j) {
  return static_cast<std::uint64_t>(n_qubits) * 1000003ULL + static_cast<std::uint64_t>(std::llround(h_over_j * 1e6));
}

constexpr std::uint64_t kPoolStream = 1;
constexpr std::uint64_t kRepeatStream = 2;

struct RepeatSeeds {
  std::uint64_t init;
  std::uint64_t train;
  std::uint64_t estimator;
};

RepeatSeeds split(std::uint64_t seed) { return {derive_seed(seed, 0), derive_seed(seed, 1), derive_seed(seed, 2)}; }

SweepRecord make_record(const TfimSpec& spec, int n_hidden, std::size_t m, std::uint64_t seed, const CriterionRun& run) {
  SweepRecord r;
  r.n_qubits = spec.n_qubits;
  r.h_over_j = spec.field_ratio();
  r.n_hidden = n_hidden;
  r.m = m;
  r.seed = seed;
  r.epochs_used = run.epochs_used;
  r.epsilon = run.last().epsilon;
  r.min_epsilon = run.last().epsilon;
  for (const auto& c : run.checks) r.min_epsilon = std::min(r.min_epsilon, c.result.epsilon);
  r.converged = run.converged;
  return r;
}

struct GridPoint {
  int n_qubits;
  double h_over_j;
};

std::vector<GridPoint> grid_points(const SweepConfig& config) {
  std::vector<GridPoint> out;
  for (double h : config.field_ratios) {
    for (int n : config.qubit_sizes) out.push_back({n, h});
  }
  return out;
}

int majority(int repeats) { return repeats / 2 + 1; }

}  // namespace

std::uint64_t repeat_seed(std::uint64_t base, int n_qubits, double h_over_j, int repeat) {
  return derive_seed(derive_seed(base, kRepeatStream), point_stream(n_qubits, h_over_j) * 64 + static_cast<std::uint64_t>(repeat));
}

std::uint64_t pool_seed(std::uint64_t base, int n_qubits, double h_over_j) {
  return derive_seed(derive_seed(base, kPoolStream), point_stream(n_qubits, h_over_j));
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

HiddenUnitSweep sweep_hidden_units(const SweepConfig& config) {
  config.validate();
  const auto points = grid_points(config);
  std::vector<std::vector<SweepRecord>> records(points.size());
  std::vector<MinimalHidden> minima(points.size());

  parallel_for(points.size(), config.workers, [&](std::size_t idx) {
    const GridPoint pt = points[idx];
    const TfimSpec spec = TfimSpec::from_ratio(pt.n_qubits, pt.h_over_j, config.coupling);
    const GroundState gs = solve_ground_state(spec);
    const MeasurementDataset pool =
        sample_measurements(gs, config.pool_size, pool_seed(config.seed, pt.n_qubits, pt.h_over_j),
                            config.symmetry_break ? SamplingSector::kPositiveMagnetization : SamplingSector::kFull);
    const Eigen::MatrixXd data = pool.to_matrix();
    MinimalHidden result{pt.n_qubits, pt.h_over_j, 0, false};

    for (int nh = config.hidden_grid.start; nh <= config.hidden_grid.max; nh += config.hidden_grid.step) {
      int passes = 0;
      int failures = 0;
      for (int r = 0; r < config.repeats; ++r) {
        if (passes >= majority(config.repeats) || failures > config.repeats - majority(config.repeats)) break;
        const std::uint64_t seed = repeat_seed(config.seed, pt.n_qubits, pt.h_over_j, r);
        const RepeatSeeds s = split(seed);
        TrainConfig tc = config.train;
        tc.seed = s.train;
        EstimatorConfig ec = config.estimator;
        ec.seed = s.estimator;
        const CriterionRun run = train_to_criterion(RbmParams::random(pt.n_qubits, nh, tc.init_scale, s.init), data,
                                                    spec, gs.energy, tc, ec, config.criterion);
        records[idx].push_back(make_record(spec, nh, config.pool_size, seed, run));
        (run.converged ? passes : failures) += 1;
      }
      if (passes >= majority(config.repeats)) {
        result.n_hidden = nh;
        result.found = true;
        break;
      }
    }
    minima[idx] = result;
  });

  HiddenUnitSweep out;
  for (auto& r : records) out.records.insert(out.records.end(), r.begin(), r.end());
  out.minima = std::move(minima);
  return out;
}

std::vector<MinimalHidden> minimal_hidden_from_records(const std::vector<SweepRecord>& records, double threshold,
                                                       int repeats) {
  // Point -> N_h -> passing count, in first-seen point order.
  std::vector<std::pair<int, double>> order;
  std::map<std::pair<int, double>, std::map<int, int>> passes;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.n_qubits, r.h_over_j);
    if (passes.find(key) == passes.end()) order.push_back(key);
    passes[key][r.n_hidden] += r.min_epsilon <= threshold ? 1 : 0;
  }
  std::vector<MinimalHidden> out;
  for (const auto& key : order) {
    MinimalHidden m{key.first, key.second, 0, false};
    for (const auto& [nh, count] : passes[key]) {
      if (count >= majority(repeats)) {
        m.n_hidden = nh;
        m.found = true;
        break;
      }
    }
    out.push_back(m);
  }
  return out;
}

SampleComplexitySweep sweep_sample_complexity(const SweepConfig& config) {
  config.validate();
  const auto points = grid_points(config);
  std::vector<std::vector<SweepRecord>> records(points.size());
  std::vector<MinimalSamples> minima(points.size());

  parallel_for(points.size(), config.workers, [&](std::size_t idx) {
    const GridPoint pt = points[idx];
    const TfimSpec spec = TfimSpec::from_ratio(pt.n_qubits, pt.h_over_j, config.coupling);
    const GroundState gs = solve_ground_state(spec);
    const MeasurementDataset pool =
        sample_measurements(gs, config.sample_max, pool_seed(config.seed, pt.n_qubits, pt.h_over_j),
                            config.symmetry_break ? SamplingSector::kPositiveMagnetization : SamplingSector::kFull);
    const Eigen::MatrixXd all = pool.to_matrix();
    const int nh = std::max(1, static_cast<int>(std::lround(config.alpha_ratio * pt.n_qubits)));

    MinimalSamples result;
    result.n_qubits = pt.n_qubits;
    result.h_over_j = pt.h_over_j;
    result.n_hidden = nh;
    for (int r = 0; r < config.repeats; ++r) {
      const std::uint64_t seed = repeat_seed(config.seed, pt.n_qubits, pt.h_over_j, r);
      const RepeatSeeds s = split(seed);
      std::size_t found_m = 0;
      for (std::size_t m = config.sample_step; m <= config.sample_max; m += config.sample_step) {
        TrainConfig tc = config.train;
        tc.seed = s.train;
        EstimatorConfig ec = config.estimator;
        ec.seed = s.estimator;
        CriterionSchedule cs = config.criterion;
        if (config.update_budget > 0) {
          const auto batches = static_cast<std::size_t>((m + static_cast<std::size_t>(tc.batch_size) - 1) /
                                                        static_cast<std::size_t>(tc.batch_size));
          cs.epoch_budget = static_cast<int>((config.update_budget + batches - 1) / batches);
          cs.check_every = static_cast<int>(std::max<std::size_t>(1, config.check_every_updates / batches));
        }
        const CriterionRun run = train_to_criterion(RbmParams::random(pt.n_qubits, nh, tc.init_scale, s.init),
                                                    all.topRows(static_cast<Eigen::Index>(m)), spec, gs.energy, tc,
                                                    ec, cs);
        records[idx].push_back(make_record(spec, nh, m, seed, run));
        if (run.converged) {
          found_m = m;
          break;
        }
      }
      result.seeds.push_back(seed);
      result.per_seed.push_back(found_m);
    }
    std::size_t total = 0;
    int count = 0;
    for (std::size_t m : result.per_seed) {
      if (m > 0) {
        total += m;
        ++count;
      }
    }
    result.found = count == config.repeats;
    result.mean = count > 0 ? static_cast<double>(total) / count : 0.0;
    minima[idx] = std::move(result);
  });

  SampleComplexitySweep out;
  for (auto& r : records) out.records.insert(out.records.end(), r.begin(), r.end());
  out.minima = std::move(minima);
  return out;
}

std::vector<double> weight_spectrum(const RbmParams& p) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(p.weights.size()));
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.weights.cols(); ++j) out.push_back(std::abs(p.weights(i, j)));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double spectrum_mass_fraction(const std::vector<double>& spectrum, double fraction) {
  const double total = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  if (spectrum.empty() || total == 0.0) return 0.0;
  const auto top = std::min(spectrum.size(),
                            static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(spectrum.size()))));
  return std::accumulate(spectrum.begin(), spectrum.begin() + static_cast<std::ptrdiff_t>(top), 0.0) / total;
}

LinearFit linear_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("linear fit needs at least two points");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) throw DomainError("linear fit needs two distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.slope * x + fit.intercept);
    rss += e * e;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

std::string sweep_record_csv_row(const SweepRecord& r) {
  return std::to_string(r.n_qubits) + "," + format_real(r.h_over_j) + "," + std::to_string(r.n_hidden) + "," +
         std::to_string(r.m) + "," + std::to_string(r.seed) + "," + std::to_string(r.epochs_used) + "," +
         format_real(r.epsilon) + "," + format_real(r.min_epsilon) + "," + (r.converged ? "1" : "0");
}

std::string minimal_hidden_csv_row(const MinimalHidden& m) {
  return std::to_string(m.n_qubits) + "," + format_real(m.h_over_j) + "," + std::to_string(m.n_hidden) + "," +
         (m.found ? "1" : "0");
}

std::string minimal_samples_csv_row(const MinimalSamples& m) {
  return std::to_string(m.n_qubits) + "," + format_real(m.h_over_j) + "," + std::to_string(m.n_hidden) + "," +
         format_real(m.mean) + "," + (m.found ? "1" : "0");
}

void RunManifest::write(std::ostream& os) const {
  os << "# rbmscale run manifest; feed back with --config to reproduce\n";
  os << "manifest.command = " << command << '\n';
  os << "manifest.version = " << version << '\n';
  os << "manifest.started = " << started << '\n';
  os << "manifest.finished = " << finished << '\n';
  os << "manifest.seeds =";
  for (std::uint64_t s : seeds) os << ' ' << s;
  os << '\n';
  for (const auto& [file, digest] : digests) os << "manifest.sha256." << file << " = " << digest << '\n';
  config.write(os);
  if (!os) throw IoError("failed writing manifest");
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 initialisation failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace rbmscale
