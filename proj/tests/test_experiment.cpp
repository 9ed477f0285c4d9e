#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gnp/experiment.hpp"

using namespace gnp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gnpart_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_static() {
  auto c = ExperimentConfig::defaults(ExperimentKind::kStatic);
  c.n_nodes = 64;
  c.pws_smooth = 8;
  c.bandwidths = {8, 64};
  c.sfrob_bandwidth = 8;
  c.runs = 2;
  c.seed = 4;
  return c;
}

ExperimentConfig tiny_online() {
  auto c = ExperimentConfig::defaults(ExperimentKind::kOnlineSynthetic);
  c.n_nodes = 48;
  c.n_subsets = 4;
  c.length = 10;
  c.runs = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("small static experiment") {
  const auto cfg = tiny_static();
  const auto r = run_static_experiment(cfg);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) CHECK(row.mse_db.size() == r.columns.size());
  CHECK(r.value("pws", "clean", "prop_ss") <= -100.0);
  CHECK(r.value("hd", "noisy", "prop_ss") < 0.0);
  const fs::path dir = scratch_dir("static");
  write_static_results(dir, r);
  write_static_artifacts(dir / "artifacts", cfg);
  CHECK(fs::exists(dir / "table.csv"));
  CHECK(fs::exists(dir / "per_subset.csv"));
  CHECK(fs::exists(dir / "artifacts" / "coords.csv"));
  CHECK(fs::exists(dir / "artifacts" / "partition_proposed.csv"));
  CHECK(fs::exists(dir / "artifacts" / "node_error_proposed.csv"));
  // Same config, same bytes.
  const fs::path again = scratch_dir("static2");
  write_static_results(again, run_static_experiment(cfg));
  CHECK(slurp(dir / "table.csv") == slurp(again / "table.csv"));
  CHECK(slurp(dir / "per_subset.csv") == slurp(again / "per_subset.csv"));
}

TEST_CASE("zero noise makes the noisy rows equal the clean rows") {
  auto cfg = tiny_static();
  cfg.noise_variance = 0.0;
  cfg.runs = 1;
  const auto r = run_static_experiment(cfg);
  for (const auto& col : r.columns)
    for (const char* sig : {"hd", "pws"}) CHECK(r.value(sig, "clean", col) == r.value(sig, "noisy", col));
}

TEST_CASE("small online experiment") {
  auto cfg = tiny_online();
  const auto r = run_online_experiment(cfg);
  CHECK(r.traces.size() == 6);
  for (const auto& tr : r.traces) CHECK(tr.records.size() == 10);
  // Method 2 shares the proposed method's first partition and noise, so the
  // first epoch is identical.
  for (int run = 0; run < 2; ++run) {
    const MethodTrace *prop = nullptr, *m2 = nullptr;
    for (const auto& tr : r.traces) {
      if (tr.run != run) continue;
      if (tr.method == "proposed") prop = &tr;
      if (tr.method == "method2") m2 = &tr;
    }
    REQUIRE(prop != nullptr);
    REQUIRE(m2 != nullptr);
    for (int t = 0; t < cfg.n_subsets; ++t) CHECK(prop->records[t].mse_db == m2->records[t].mse_db);
  }
  const fs::path a = scratch_dir("online_a"), b = scratch_dir("online_b");
  write_online_results(a, r);
  cfg.threads = 2;
  write_online_results(b, run_online_experiment(cfg));
  for (const char* f : {"metrics.csv", "timeseries.csv", "summary.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(slurp(a / "timeseries.csv").rfind("t,method,mse_db\n", 0) == 0);
}

TEST_CASE("ingest of a generated dataset") {
  const fs::path dir = scratch_dir("ingest");
  write_synthetic_sea_dataset(dir / "stations.csv", dir / "measurements.csv", 120, 2016, 2017, 3);
  IngestOptions opt;
  opt.n_sensors = 40;
  opt.k = 4;
  opt.first_year = 2016;
  opt.last_year = 2017;
  opt.seed = 1;
  const auto ds = ingest_real(dir / "stations.csv", dir / "measurements.csv", opt);
  CHECK(ds.stations.size() == 40);
  CHECK(ds.graph.size() == 40);
  CHECK(ds.trace.length() == 24);
  CHECK(ds.trace.signals.allFinite());
  // Observed entries keep their raw values: interpolation only fills gaps.
  const auto again = ingest_real(dir / "stations.csv", dir / "measurements.csv", opt);
  CHECK((again.trace.signals - ds.trace.signals).norm() == 0.0);
  opt.n_sensors = 10000;
  CHECK_THROWS(ingest_real(dir / "stations.csv", dir / "measurements.csv", opt));
}

TEST_CASE("ingest keeps complete series untouched") {
  const fs::path dir = scratch_dir("ingest_small");
  {
    std::ofstream s(dir / "stations.csv");
    s << "id,lat,lon\n";
    std::ofstream m(dir / "measurements.csv");
    m << "station_id,year,month,value\n";
    for (int i = 0; i < 4; ++i) {
      s << "s" << i << "," << 40.0 + 0.1 * i << "," << 5.0 + 0.2 * i << "\n";
      for (int mo = 1; mo <= 12; ++mo) {
        if (i == 3 && (mo == 4 || mo == 5)) continue;
        m << "s" << i << ",2016," << mo << "," << 10.0 * i + mo << "\n";
      }
    }
  }
  IngestOptions opt;
  opt.n_sensors = 4;
  opt.k = 2;
  opt.first_year = 2016;
  opt.last_year = 2016;
  const auto ds = ingest_real(dir / "stations.csv", dir / "measurements.csv", opt);
  for (int node = 0; node < 4; ++node) {
    const int id = std::stoi(ds.stations[node].id.substr(1));
    for (int t = 0; t < 12; ++t) CHECK(ds.trace.signals(node, t) == doctest::Approx(10.0 * id + t + 1));
    if (id == 3) {
      CHECK_FALSE(ds.observed(node, 3));
    } else {
      CHECK(ds.observed.row(node).all());
    }
  }
}
