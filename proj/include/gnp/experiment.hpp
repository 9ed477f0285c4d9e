#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gnp/baselines.hpp"
#include "gnp/io.hpp"
#include "gnp/scheduler.hpp"

namespace gnp {

namespace fs = std::filesystem;

enum class ExperimentKind { kStatic, kOnlineSynthetic, kOnlineReal, kAblation };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// One lat/lon box; longitudes may not wrap.
struct RegionBox {
  std::string name;
  double lat_min, lat_max, lon_min, lon_max;
  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

/// Mediterranean, North Sea, Black Sea, Northwest Atlantic coast.
std::vector<RegionBox> default_regions();

struct ExperimentConfig {
  inline static constexpr int kSchemaVersion = 1;

  ExperimentKind kind = ExperimentKind::kStatic;

  // Synthetic graph.
  int n_nodes = 256;
  int k_min = 2;
  int k_max = 8;

  // Synthetic signals.
  double hd_alpha = 10.0;
  int pws_smooth = 32;
  int n_clusters = 3;
  int length = 64;
  double drift_probability = 0.5;

  std::vector<std::string> partitioners{"proposed", "srel", "sfrob"};
  std::vector<int> bandwidths{10, 32, 100, 256};
  int sfrob_bandwidth = 32;

  double noise_variance = 1e-3;
  int n_subsets = 4;
  int runs = 30;
  std::uint64_t seed = 0;
  int threads = 1;

  PdcaConfig pdca;
  DictLearnConfig learner;
  int buffer_width = 20;
  double w_high = 1.0;
  double w_low = 0.0;
  bool track_condition = true;

  // Real data; empty paths select the synthetic fallback.
  std::string stations_csv;
  std::string measurements_csv;
  int knn = 8;
  int first_year = 2016;
  int last_year = 2021;
  int fallback_stations = 600;

  std::string output_dir = "out";

  /// Full-size defaults for each experiment kind.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Keys absent from the JSON keep the kind's defaults; unknown keys and a
  /// schema_version other than kSchemaVersion raise ConfigError.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const fs::path& path);
  std::string to_json_text() const;

  /// Throws ConfigError on any out-of-range parameter.
  void validate() const;
};

/// Runs fn(0..n-1) on up to `threads` workers; results land in index order so
/// the output does not depend on scheduling.
template <typename T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// ---------------------------------------------------------------- static

struct StaticRow {
  std::string signal;     // hd | pws
  std::string condition;  // clean | noisy
  std::vector<double> mse_db;
};

/// One row per (signal, condition), columns such as
/// prop_ss, srel_ss, srel_bl10, ..., sfrob_bl256.
struct StaticResults {
  std::vector<std::string> columns;
  std::vector<StaticRow> rows;
  /// Long form: run, signal, condition, column, subset_id, mse_db.
  io::CsvTable per_subset;

  double value(const std::string& signal, const std::string& condition, const std::string& column) const;
};

StaticResults run_static_experiment(const ExperimentConfig& cfg);
/// table.csv (signal,condition,<columns>) and per_subset.csv.
void write_static_results(const fs::path& dir, const StaticResults& results);
/// Node-map inputs from run 0 of the PWS noisy case: coords.csv,
/// partition_<method>.csv and node_error_<method>.csv (node,subset_id,error).
void write_static_artifacts(const fs::path& dir, const ExperimentConfig& cfg);

// ---------------------------------------------------------------- online

struct MethodTrace {
  std::string method;
  int run = 0;
  std::vector<MetricsRecord> records;
};

struct OnlineResults {
  std::vector<MethodTrace> traces;
  /// Method -> average MSE in dB over runs and time, in first-seen order.
  std::vector<std::pair<std::string, double>> summary;

  double mean(const std::string& method) const;
};

/// Proposed (oracle A_t, adaptive partitioning), Method 1 (epoch-0 partition
/// and A_0 throughout), Method 2 (epoch-0 partition, oracle A_t).
OnlineResults run_online_experiment(const ExperimentConfig& cfg);

/// metrics.csv (run,method,t,subset_id,mse_db,epoch,cond), timeseries.csv
/// (t,method,mse_db averaged over runs) and summary.csv (method,mean_mse_db).
void write_online_results(const fs::path& dir, const OnlineResults& results);

// ---------------------------------------------------------------- real data

struct Station {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
};

struct RealDataset {
  std::vector<Station> stations;
  Graph graph;
  SignalTrace trace;
  /// N x T, true where the value was observed rather than interpolated.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed;
};

struct IngestOptions {
  std::vector<RegionBox> regions = default_regions();
  int n_sensors = 256;
  int k = 8;
  int first_year = 2016;
  int last_year = 2021;
  std::uint64_t seed = 0;
};

/// Station CSV `id,lat,lon`, measurement CSV `station_id,year,month,value`.
/// Keeps stations inside the regions with at least two observations in the
/// window, draws n_sensors of them, builds a haversine k-NN graph with weights
/// exp(-(d / s)^2) where s is the median k-NN distance, and fills gaps by
/// per-station linear interpolation (constant beyond the first/last value).
RealDataset ingest_real(const fs::path& stations_csv, const fs::path& measurements_csv, const IngestOptions& opt);

/// Writes a synthetic monthly sea-temperature dataset in the ingest schema:
/// latitude-driven climatology, seasonal cycle, spatially smooth anomalies
/// and about 3% missing entries.
void write_synthetic_sea_dataset(const fs::path& stations_csv, const fs::path& measurements_csv, int n_stations,
                                 int first_year, int last_year, std::uint64_t seed);

/// Loads the configured dataset, or generates the synthetic fallback under
/// output_dir when no paths are given.
RealDataset load_real_dataset(const ExperimentConfig& cfg);

/// Proposed (learned dictionary, adaptive partitioning) against SRel and
/// SFrob partitions held fixed, all reconstructing with the learned dictionary.
OnlineResults run_real_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- ablation

/// Config 1: W = diag(sampling indicator) on minimax reconstructions.
/// Config 2: W = I on minimax reconstructions.
/// Config 3: W = diag(sampling indicator) on zero-padded measurements.
/// Methods are named config1..config3.
OnlineResults run_ablation(const ExperimentConfig& cfg);
/// The online result files plus ablation.csv (config,mean_mse_db).
void write_ablation_results(const fs::path& dir, const OnlineResults& results);

/// Scheduler settings derived from an experiment configuration.
SchedulerConfig scheduler_config(const ExperimentConfig& cfg);

}  // namespace gnp
