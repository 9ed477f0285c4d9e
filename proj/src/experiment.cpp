#include "gnp/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "gnp/error.hpp"
#include "gnp/log.hpp"
#include "gnp/rng.hpp"
#include "json.hpp"

namespace gnp {

using nlohmann::json;

// ---------------------------------------------------------------- config

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kStatic: return "static";
    case ExperimentKind::kOnlineSynthetic: return "online-synthetic";
    case ExperimentKind::kOnlineReal: return "online-real";
    case ExperimentKind::kAblation: return "ablation";
  }
  return "static";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kStatic, ExperimentKind::kOnlineSynthetic, ExperimentKind::kOnlineReal,
                 ExperimentKind::kAblation})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::vector<RegionBox> default_regions() {
  return {
      {"mediterranean", 30.0, 46.0, -6.0, 36.5},
      {"north-sea", 51.0, 61.5, -4.5, 10.0},
      {"black-sea", 40.5, 47.5, 27.0, 42.0},
      {"northwest-atlantic", 35.0, 48.0, -77.0, -60.0},
  };
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kStatic:
      c.n_subsets = 4;
      c.runs = 30;
      c.noise_variance = 1e-3;
      break;
    case ExperimentKind::kOnlineSynthetic:
      c.n_subsets = 16;
      c.runs = 10;
      c.length = 64;
      c.noise_variance = 1e-3;
      c.partitioners = {"proposed"};
      break;
    case ExperimentKind::kOnlineReal:
    case ExperimentKind::kAblation:
      c.n_subsets = 8;
      c.runs = 1;
      c.noise_variance = 0.5;
      c.buffer_width = 20;
      c.learner.budget = 300.0;
      c.length = 12 * (c.last_year - c.first_year + 1);
      if (kind == ExperimentKind::kAblation) c.partitioners = {"proposed"};
      break;
  }
  return c;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_key(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

BinarizeRule parse_binarize(const std::string& s) {
  if (s == "top-half") return BinarizeRule::kTopHalf;
  if (s == "threshold-half") return BinarizeRule::kThresholdHalf;
  throw ConfigError("unknown binarize rule '" + s + "'");
}

std::string binarize_name(BinarizeRule r) { return r == BinarizeRule::kTopHalf ? "top-half" : "threshold-half"; }

ProxMethod parse_prox(const std::string& s) {
  if (s == "bisection") return ProxMethod::kBisection;
  if (s == "admm") return ProxMethod::kAdmm;
  throw ConfigError("unknown prox method '" + s + "'");
}

std::string prox_name(ProxMethod p) { return p == ProxMethod::kBisection ? "bisection" : "admm"; }

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j,
             {"schema_version", "kind", "graph", "signal", "partitioners", "bandwidths", "sfrob_bandwidth",
              "noise_variance", "n_subsets", "runs", "seed", "threads", "pdca", "learner", "scheduler", "real_data",
              "output_dir"},
             "config");
  if (!j.contains("schema_version")) throw ConfigError("config needs schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("config needs a string kind");

  ExperimentConfig c = defaults(parse_experiment_kind(j.at("kind").get<std::string>()));
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, {"n_nodes", "k_min", "k_max"}, "graph");
    read_key(g, "n_nodes", c.n_nodes, "graph");
    read_key(g, "k_min", c.k_min, "graph");
    read_key(g, "k_max", c.k_max, "graph");
  }
  if (j.contains("signal")) {
    const json& s = j.at("signal");
    check_keys(s, {"hd_alpha", "pws_smooth", "n_clusters", "length", "drift_probability"}, "signal");
    read_key(s, "hd_alpha", c.hd_alpha, "signal");
    read_key(s, "pws_smooth", c.pws_smooth, "signal");
    read_key(s, "n_clusters", c.n_clusters, "signal");
    read_key(s, "length", c.length, "signal");
    read_key(s, "drift_probability", c.drift_probability, "signal");
  }
  read_key(j, "partitioners", c.partitioners, "config");
  read_key(j, "bandwidths", c.bandwidths, "config");
  read_key(j, "sfrob_bandwidth", c.sfrob_bandwidth, "config");
  read_key(j, "noise_variance", c.noise_variance, "config");
  read_key(j, "n_subsets", c.n_subsets, "config");
  read_key(j, "runs", c.runs, "config");
  read_key(j, "seed", c.seed, "config");
  read_key(j, "threads", c.threads, "config");
  read_key(j, "output_dir", c.output_dir, "config");
  if (j.contains("pdca")) {
    const json& p = j.at("pdca");
    check_keys(p, {"lipschitz", "beta", "max_iters", "tol", "binarize", "prox", "normalize_dictionary", "restarts"},
               "pdca");
    read_key(p, "lipschitz", c.pdca.lipschitz, "pdca");
    read_key(p, "beta", c.pdca.beta, "pdca");
    read_key(p, "max_iters", c.pdca.max_iters, "pdca");
    read_key(p, "tol", c.pdca.tol, "pdca");
    read_key(p, "normalize_dictionary", c.pdca.normalize_dictionary, "pdca");
    read_key(p, "restarts", c.pdca.restarts, "pdca");
    std::string name;
    read_key(p, "binarize", name, "pdca");
    if (!name.empty()) c.pdca.binarize = parse_binarize(name);
    name.clear();
    read_key(p, "prox", name, "pdca");
    if (!name.empty()) c.pdca.prox = parse_prox(name);
  }
  if (j.contains("learner")) {
    const json& l = j.at("learner");
    check_keys(l, {"budget", "step_d", "step_a", "max_outer", "max_inner", "outer_tol", "inner_tol"}, "learner");
    read_key(l, "budget", c.learner.budget, "learner");
    read_key(l, "step_d", c.learner.step_d, "learner");
    read_key(l, "step_a", c.learner.step_a, "learner");
    read_key(l, "max_outer", c.learner.max_outer, "learner");
    read_key(l, "max_inner", c.learner.max_inner, "learner");
    read_key(l, "outer_tol", c.learner.outer_tol, "learner");
    read_key(l, "inner_tol", c.learner.inner_tol, "learner");
  }
  if (j.contains("scheduler")) {
    const json& s = j.at("scheduler");
    check_keys(s, {"buffer_width", "w_high", "w_low", "track_condition"}, "scheduler");
    read_key(s, "buffer_width", c.buffer_width, "scheduler");
    read_key(s, "w_high", c.w_high, "scheduler");
    read_key(s, "w_low", c.w_low, "scheduler");
    read_key(s, "track_condition", c.track_condition, "scheduler");
  }
  if (j.contains("real_data")) {
    const json& r = j.at("real_data");
    check_keys(r, {"stations_csv", "measurements_csv", "knn", "first_year", "last_year", "fallback_stations"},
               "real_data");
    read_key(r, "stations_csv", c.stations_csv, "real_data");
    read_key(r, "measurements_csv", c.measurements_csv, "real_data");
    read_key(r, "knn", c.knn, "real_data");
    read_key(r, "first_year", c.first_year, "real_data");
    read_key(r, "last_year", c.last_year, "real_data");
    read_key(r, "fallback_stations", c.fallback_stations, "real_data");
    const bool length_given = j.contains("signal") && j.at("signal").contains("length");
    if (!length_given && (c.kind == ExperimentKind::kOnlineReal || c.kind == ExperimentKind::kAblation))
      c.length = 12 * (c.last_year - c.first_year + 1);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = to_string(kind);
  j["graph"] = {{"n_nodes", n_nodes}, {"k_min", k_min}, {"k_max", k_max}};
  j["signal"] = {{"hd_alpha", hd_alpha},
                 {"pws_smooth", pws_smooth},
                 {"n_clusters", n_clusters},
                 {"length", length},
                 {"drift_probability", drift_probability}};
  j["partitioners"] = partitioners;
  j["bandwidths"] = bandwidths;
  j["sfrob_bandwidth"] = sfrob_bandwidth;
  j["noise_variance"] = noise_variance;
  j["n_subsets"] = n_subsets;
  j["runs"] = runs;
  j["seed"] = seed;
  j["threads"] = threads;
  j["pdca"] = {{"lipschitz", pdca.lipschitz},
               {"beta", pdca.beta},
               {"max_iters", pdca.max_iters},
               {"tol", pdca.tol},
               {"binarize", binarize_name(pdca.binarize)},
               {"prox", prox_name(pdca.prox)},
               {"normalize_dictionary", pdca.normalize_dictionary},
               {"restarts", pdca.restarts}};
  j["learner"] = {{"budget", learner.budget},       {"step_d", learner.step_d},
                  {"step_a", learner.step_a},       {"max_outer", learner.max_outer},
                  {"max_inner", learner.max_inner}, {"outer_tol", learner.outer_tol},
                  {"inner_tol", learner.inner_tol}};
  j["scheduler"] = {
      {"buffer_width", buffer_width}, {"w_high", w_high}, {"w_low", w_low}, {"track_condition", track_condition}};
  j["real_data"] = {{"stations_csv", stations_csv}, {"measurements_csv", measurements_csv},
                    {"knn", knn},                   {"first_year", first_year},
                    {"last_year", last_year},       {"fallback_stations", fallback_stations}};
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (n_nodes < 4) fail("graph.n_nodes must be at least 4");
  if (k_min < 1 || k_max < k_min || k_max >= n_nodes) fail("graph.k_min/k_max must satisfy 1 <= k_min <= k_max < n_nodes");
  if (!(hd_alpha >= 0.0) || !std::isfinite(hd_alpha)) fail("signal.hd_alpha must be finite and nonnegative");
  if (pws_smooth < 1 || pws_smooth >= n_nodes) fail("signal.pws_smooth must lie in [1, n_nodes)");
  if (n_clusters < 2 || n_clusters > n_nodes) fail("signal.n_clusters must lie in [2, n_nodes]");
  if (length < 1) fail("signal.length must be positive");
  if (!(drift_probability >= 0.0 && drift_probability <= 1.0)) fail("signal.drift_probability must lie in [0, 1]");
  const std::set<std::string> known{"proposed", "srel", "sfrob"};
  std::set<std::string> seen;
  for (const auto& p : partitioners) {
    if (!known.count(p)) fail("unknown partitioner '" + p + "'");
    if (!seen.insert(p).second) fail("duplicate partitioner '" + p + "'");
  }
  if (partitioners.empty()) fail("partitioners must not be empty");
  if (sfrob_bandwidth < 1) fail("sfrob_bandwidth must be positive");
  if (kind == ExperimentKind::kStatic) {
    for (int b : bandwidths)
      if (b < 1 || b > n_nodes) fail("bandwidths must lie in [1, n_nodes]");
    if (sfrob_bandwidth > n_nodes) fail("sfrob_bandwidth must not exceed n_nodes");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) fail("noise_variance must be finite and nonnegative");
  if (n_subsets < 2 || (n_subsets & (n_subsets - 1)) != 0) fail("n_subsets must be a power of two >= 2");
  if (n_subsets > n_nodes) fail("n_subsets must not exceed the node count");
  if (runs < 1) fail("runs must be positive");
  if (threads < 1) fail("threads must be positive");
  if (buffer_width < 1) fail("scheduler.buffer_width must be positive");
  if (!(w_high >= 0.0 && w_high <= 1.0 && w_low >= 0.0 && w_low <= 1.0)) fail("scheduler weights must lie in [0, 1]");
  if (knn < 1) fail("real_data.knn must be positive");
  if (last_year < first_year) fail("real_data.last_year must not precede first_year");
  if (fallback_stations < 1) fail("real_data.fallback_stations must be positive");
  if (output_dir.empty()) fail("output_dir must not be empty");
  try {
    pdca.validate();
    learner.validate();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
}

SchedulerConfig scheduler_config(const ExperimentConfig& cfg) {
  SchedulerConfig s;
  s.n_subsets = cfg.n_subsets;
  s.sigma = std::sqrt(cfg.noise_variance);
  s.pdca = cfg.pdca;
  s.learner = cfg.learner;
  s.buffer_width = cfg.buffer_width;
  s.w_high = cfg.w_high;
  s.w_low = cfg.w_low;
  s.track_condition = cfg.track_condition;
  s.seed = cfg.seed;
  return s;
}

// ---------------------------------------------------------------- static

namespace {

int levels_for(int n_subsets) {
  int k = 0;
  while ((1 << k) < n_subsets) ++k;
  return k;
}

VectorXd reconstruct_or_pad(const SubspaceDictionary& a, const Measurement& meas) {
  try {
    return minimax_reconstruct(a, meas);
  } catch (const DegenerateSubspace&) {
    log_warning("degenerate sampled subspace; falling back to zero padding");
    return ls_reconstruct(meas);
  }
}

struct ColumnSpec {
  std::string name;
  const Partition* partition;
  const SubspaceDictionary* dictionary;  // nullptr: the signal's own subspace
};

struct StaticRun {
  // [signal][condition][column] -> per-subset MSEs
  std::vector<std::vector<std::vector<std::vector<double>>>> mse;
  // Node-map artifacts, filled for run 0 only.
  std::optional<Coords> coords;
  std::vector<std::pair<std::string, Partition>> partitions;
  std::vector<std::pair<std::string, MatrixXd>> node_errors;  // N x M, PWS noisy
};

std::vector<std::string> static_columns(const ExperimentConfig& cfg) {
  std::vector<std::string> cols;
  auto has = [&](const char* p) {
    return std::find(cfg.partitioners.begin(), cfg.partitioners.end(), p) != cfg.partitioners.end();
  };
  if (has("proposed")) cols.push_back("prop_ss");
  for (const char* base : {"srel", "sfrob"}) {
    if (!has(base)) continue;
    cols.push_back(std::string(base) + "_ss");
    for (int b : cfg.bandwidths) cols.push_back(std::string(base) + "_bl" + std::to_string(b));
  }
  return cols;
}

StaticRun static_run(const ExperimentConfig& cfg, int run) {
  const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
  const Graph g = random_sensor_graph(cfg.n_nodes, cfg.k_min, cfg.k_max, derive_seed(rs, 0));
  const GftBasis basis = gft_basis(g);
  const auto clusters = spectral_clustering(g, basis, cfg.n_clusters, derive_seed(rs, 2));
  const GeneratedSignal signals[2] = {gen_hd(basis, cfg.hd_alpha, derive_seed(rs, 1)),
                                      gen_pws(basis, clusters, derive_seed(rs, 3), cfg.pws_smooth)};
  const double sigma = std::sqrt(cfg.noise_variance);
  const int levels = levels_for(cfg.n_subsets);
  const std::vector<std::string> columns = static_columns(cfg);
  auto has = [&](const char* p) {
    return std::find(cfg.partitioners.begin(), cfg.partitioners.end(), p) != cfg.partitioners.end();
  };

  std::map<int, SubspaceDictionary> bl;
  for (int b : cfg.bandwidths) bl.emplace(b, bandlimited_basis(basis, b));
  if (!bl.count(cfg.sfrob_bandwidth)) bl.emplace(cfg.sfrob_bandwidth, bandlimited_basis(basis, cfg.sfrob_bandwidth));

  std::optional<Partition> srel;
  if (has("srel")) srel = srel_partition(g, cfg.n_subsets, derive_seed(rs, 4));
  std::map<int, Partition> sfrob;
  if (has("sfrob"))
    for (const auto& [b, dict] : bl) sfrob.emplace(b, sfrob_partition(dict, cfg.n_subsets));

  StaticRun out;
  out.mse.assign(2, std::vector<std::vector<std::vector<double>>>(2, std::vector<std::vector<double>>(columns.size())));
  if (run == 0) out.coords = g.coords();

  for (int s = 0; s < 2; ++s) {
    const SubspaceDictionary& truth = signals[s].dictionary;
    const VectorXd& x = signals[s].signal;
    std::optional<Partition> prop;
    if (has("proposed")) {
      PdcaConfig pcfg = cfg.pdca;
      pcfg.seed = derive_seed(rs, 10 + static_cast<std::uint64_t>(s));
      prop = hierarchical_partition(truth, levels, pcfg);
    }
    std::vector<ColumnSpec> specs;
    if (prop) specs.push_back({"prop_ss", &*prop, nullptr});
    if (srel) {
      specs.push_back({"srel_ss", &*srel, nullptr});
      for (int b : cfg.bandwidths) specs.push_back({"srel_bl" + std::to_string(b), &*srel, &bl.at(b)});
    }
    if (!sfrob.empty()) {
      specs.push_back({"sfrob_ss", &sfrob.at(cfg.sfrob_bandwidth), nullptr});
      for (int b : cfg.bandwidths) specs.push_back({"sfrob_bl" + std::to_string(b), &sfrob.at(b), &bl.at(b)});
    }

    Rng noise_rng(derive_seed(rs, 20 + static_cast<std::uint64_t>(s)));
    const VectorXd noise = gaussian_vector(cfg.n_nodes, 0.0, sigma, noise_rng);
    for (int c = 0; c < 2; ++c) {
      const VectorXd y_full = c == 0 ? x : VectorXd(x + noise);
      for (std::size_t col = 0; col < specs.size(); ++col) {
        const ColumnSpec& spec = specs[col];
        const SubspaceDictionary& a = spec.dictionary ? *spec.dictionary : truth;
        const bool keep_errors = run == 0 && s == 1 && c == 1 && spec.dictionary == nullptr;
        MatrixXd errors;
        if (keep_errors) errors.resize(cfg.n_nodes, spec.partition->n_subsets());
        for (int i = 0; i < spec.partition->n_subsets(); ++i) {
          const SamplingSet& set = (*spec.partition)[static_cast<std::size_t>(i)];
          const Measurement meas{restrict(y_full, set), set, c == 0 ? 0.0 : sigma};
          const VectorXd rec = reconstruct_or_pad(a, meas);
          out.mse[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)][col].push_back(mse_db(x, rec));
          if (keep_errors) errors.col(i) = (rec - x).cwiseAbs();
        }
        if (keep_errors) {
          std::string method = spec.name.substr(0, spec.name.find('_'));
          if (method == "prop") method = "proposed";
          out.node_errors.emplace_back(method, std::move(errors));
          out.partitions.emplace_back(method, *spec.partition);
        }
      }
    }
  }
  return out;
}

}  // namespace

double StaticResults::value(const std::string& signal, const std::string& condition, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw InvalidInput("no result column " + column);
  for (const auto& r : rows)
    if (r.signal == signal && r.condition == condition)
      return r.mse_db[static_cast<std::size_t>(it - columns.begin())];
  throw InvalidInput("no result row " + signal + "/" + condition);
}

StaticResults run_static_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::kStatic) throw ConfigError("run_static_experiment needs kind static");
  const auto runs = parallel_map<StaticRun>(cfg.runs, cfg.threads, [&](int r) { return static_run(cfg, r); });

  StaticResults res;
  res.columns = static_columns(cfg);
  res.per_subset.header = {"run", "signal", "condition", "column", "subset_id", "mse_db"};
  const char* signal_names[2] = {"hd", "pws"};
  const char* condition_names[2] = {"clean", "noisy"};
  for (int s = 0; s < 2; ++s) {
    for (int c = 0; c < 2; ++c) {
      StaticRow row{signal_names[s], condition_names[c], std::vector<double>(res.columns.size(), 0.0)};
      for (std::size_t col = 0; col < res.columns.size(); ++col) {
        double sum = 0.0;
        int count = 0;
        for (int r = 0; r < cfg.runs; ++r) {
          const auto& v = runs[static_cast<std::size_t>(r)].mse[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)][col];
          for (std::size_t i = 0; i < v.size(); ++i) {
            sum += v[i];
            ++count;
            res.per_subset.rows.push_back({std::to_string(r), signal_names[s], condition_names[c], res.columns[col],
                                           std::to_string(i), io::format_double(v[i])});
          }
        }
        row.mse_db[col] = sum / count;
      }
      res.rows.push_back(std::move(row));
    }
  }
  return res;
}

void write_static_artifacts(const fs::path& dir, const ExperimentConfig& cfg) {
  ExperimentConfig one = cfg;
  one.runs = 1;
  const StaticRun run0 = static_run(one, 0);
  if (run0.coords) io::write_coords(dir / "coords.csv", *run0.coords);
  for (const auto& [method, part] : run0.partitions) io::write_partition(dir / ("partition_" + method + ".csv"), part);
  for (const auto& [method, err] : run0.node_errors) {
    io::CsvTable t;
    t.header = {"node", "subset_id", "error"};
    for (int i = 0; i < err.cols(); ++i)
      for (int n = 0; n < err.rows(); ++n)
        t.rows.push_back({std::to_string(n), std::to_string(i), io::format_double(err(n, i))});
    io::write_csv(dir / ("node_error_" + method + ".csv"), t, {"node", "subset_id", "error"});
  }
}

void write_static_results(const fs::path& dir, const StaticResults& results) {
  io::CsvTable t;
  t.header = {"signal", "condition"};
  t.header.insert(t.header.end(), results.columns.begin(), results.columns.end());
  for (const auto& r : results.rows) {
    std::vector<std::string> cells{r.signal, r.condition};
    for (double v : r.mse_db) cells.push_back(io::format_double(v));
    t.rows.push_back(std::move(cells));
  }
  io::write_csv(dir / "table.csv", t, results.columns);
  io::write_csv(dir / "per_subset.csv", results.per_subset, {"run", "subset_id", "mse_db"});
}

// ---------------------------------------------------------------- online

double OnlineResults::mean(const std::string& method) const {
  for (const auto& [m, v] : summary)
    if (m == method) return v;
  throw InvalidInput("no results for method " + method);
}

namespace {

OnlineResults collect(std::vector<std::vector<MethodTrace>> per_run) {
  OnlineResults res;
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> acc;
  for (auto& run : per_run) {
    for (auto& tr : run) {
      if (!acc.count(tr.method)) order.push_back(tr.method);
      auto& a = acc[tr.method];
      for (const auto& rec : tr.records) {
        a.first += rec.mse_db;
        ++a.second;
      }
      res.traces.push_back(std::move(tr));
    }
  }
  for (const auto& m : order) res.summary.emplace_back(m, acc[m].first / acc[m].second);
  return res;
}

SchedulerConfig run_scheduler_config(const ExperimentConfig& cfg, std::uint64_t rs) {
  SchedulerConfig s = scheduler_config(cfg);
  s.seed = derive_seed(rs, 5);
  s.pdca.seed = derive_seed(rs, 6);
  return s;
}

std::vector<MethodTrace> online_run(const ExperimentConfig& cfg, int run) {
  const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
  const Graph g = random_sensor_graph(cfg.n_nodes, cfg.k_min, cfg.k_max, derive_seed(rs, 0));
  const GftBasis basis = gft_basis(g);
  const auto clusters = spectral_clustering(g, basis, cfg.n_clusters, derive_seed(rs, 2));
  const SignalTrace trace = generate_tv_pws_trace(g, basis, clusters, cfg.length, cfg.drift_probability,
                                                  derive_seed(rs, 3));

  SchedulerConfig scfg = run_scheduler_config(cfg, rs);
  scfg.dictionary = DictionaryMode::kOracle;
  Scheduler proposed(scfg, trace.subspaces.front());
  MethodTrace p{"proposed", run, {}};
  for (int t = 0; t < trace.length(); ++t)
    p.records.push_back(proposed.step(trace.signals.col(t), &trace.subspaces[static_cast<std::size_t>(t)]).metrics);
  const Partition& p0 = proposed.partition_history().front();
  MethodTrace m1{"method1", run, run_fixed(trace, p0, scfg, trace.subspaces.front(), false)};
  MethodTrace m2{"method2", run, run_fixed(trace, p0, scfg, trace.subspaces.front(), true)};
  return {std::move(p), std::move(m1), std::move(m2)};
}

}  // namespace

OnlineResults run_online_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::kOnlineSynthetic) throw ConfigError("run_online_experiment needs kind online-synthetic");
  return collect(parallel_map<std::vector<MethodTrace>>(cfg.runs, cfg.threads,
                                                        [&](int r) { return online_run(cfg, r); }));
}

void write_online_results(const fs::path& dir, const OnlineResults& results) {
  io::CsvTable metrics;
  metrics.header = {"run", "method", "t", "subset_id", "mse_db", "epoch", "cond"};
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::pair<double, int>>> per_t;
  for (const auto& tr : results.traces) {
    if (!per_t.count(tr.method)) order.push_back(tr.method);
    auto& m = per_t[tr.method];
    for (const auto& r : tr.records) {
      metrics.rows.push_back({std::to_string(tr.run), tr.method, std::to_string(r.t), std::to_string(r.subset_id),
                              io::format_double(r.mse_db), std::to_string(r.epoch), io::format_double(r.cond)});
      m[r.t].first += r.mse_db;
      ++m[r.t].second;
    }
  }
  io::write_csv(dir / "metrics.csv", metrics, {"run", "t", "subset_id", "mse_db", "epoch", "cond"});

  io::CsvTable ts;
  ts.header = {"t", "method", "mse_db"};
  for (const auto& method : order)
    for (const auto& [t, acc] : per_t[method])
      ts.rows.push_back({std::to_string(t), method, io::format_double(acc.first / acc.second)});
  io::write_csv(dir / "timeseries.csv", ts, {"t", "mse_db"});

  io::CsvTable summary;
  summary.header = {"method", "mean_mse_db"};
  for (const auto& [m, v] : results.summary) summary.rows.push_back({m, io::format_double(v)});
  io::write_csv(dir / "summary.csv", summary, {"mean_mse_db"});
}

// ---------------------------------------------------------------- real data

namespace {

double to_double(const std::string& s, const fs::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidInput("cannot parse number '" + s + "' in " + path.string());
  return v;
}

int to_int(const std::string& s, const fs::path& path) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("cannot parse integer '" + s + "' in " + path.string());
  return v;
}

// NaN marks a missing value. Returns false when fewer than two values are present.
bool interpolate(std::vector<double>& v) {
  std::vector<int> known;
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (!std::isnan(v[static_cast<std::size_t>(i)])) known.push_back(i);
  if (known.size() < 2) return false;
  for (int i = 0; i < known.front(); ++i) v[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(known.front())];
  for (int i = known.back() + 1; i < static_cast<int>(v.size()); ++i)
    v[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(known.back())];
  for (std::size_t k = 0; k + 1 < known.size(); ++k) {
    const int a = known[k], b = known[k + 1];
    for (int i = a + 1; i < b; ++i) {
      const double w = static_cast<double>(i - a) / (b - a);
      v[static_cast<std::size_t>(i)] =
          (1.0 - w) * v[static_cast<std::size_t>(a)] + w * v[static_cast<std::size_t>(b)];
    }
  }
  return true;
}

}  // namespace

RealDataset ingest_real(const fs::path& stations_csv, const fs::path& measurements_csv, const IngestOptions& opt) {
  if (opt.n_sensors < 2) throw InvalidInput("n_sensors must be at least 2");
  if (opt.k < 1 || opt.k >= opt.n_sensors) throw InvalidInput("k must lie in [1, n_sensors)");
  if (opt.last_year < opt.first_year) throw InvalidInput("last_year precedes first_year");
  const int length = 12 * (opt.last_year - opt.first_year + 1);

  const io::CsvTable st = io::read_csv(stations_csv);
  io::require_header(st, {"id", "lat", "lon"}, stations_csv);
  std::vector<Station> all;
  std::map<std::string, std::size_t> index;
  for (const auto& row : st.rows) {
    Station s{row[0], to_double(row[1], stations_csv), to_double(row[2], stations_csv)};
    if (s.id.empty()) throw InvalidInput("empty station id in " + stations_csv.string());
    if (std::abs(s.lat) > 90.0 || std::abs(s.lon) > 180.0)
      throw InvalidInput("station " + s.id + " has out-of-range coordinates");
    if (!index.emplace(s.id, all.size()).second) throw InvalidInput("duplicate station id " + s.id);
    all.push_back(std::move(s));
  }

  const io::CsvTable ms = io::read_csv(measurements_csv);
  io::require_header(ms, {"station_id", "year", "month", "value"}, measurements_csv);
  std::vector<std::vector<double>> series(all.size(), std::vector<double>(static_cast<std::size_t>(length), NAN));
  for (const auto& row : ms.rows) {
    const auto it = index.find(row[0]);
    if (it == index.end()) throw InvalidInput("measurement for unknown station " + row[0]);
    const int year = to_int(row[1], measurements_csv);
    const int month = to_int(row[2], measurements_csv);
    if (month < 1 || month > 12) throw InvalidInput("month out of range in " + measurements_csv.string());
    if (year < opt.first_year || year > opt.last_year) continue;
    double& slot = series[it->second][static_cast<std::size_t>((year - opt.first_year) * 12 + month - 1)];
    if (!std::isnan(slot)) throw InvalidInput("duplicate measurement for station " + row[0]);
    slot = to_double(row[3], measurements_csv);
  }

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool inside = false;
    for (const auto& r : opt.regions) inside = inside || r.contains(all[i].lat, all[i].lon);
    int present = 0;
    for (double v : series[i]) present += std::isnan(v) ? 0 : 1;
    if (inside && present >= 2) eligible.push_back(i);
  }
  if (static_cast<int>(eligible.size()) < opt.n_sensors)
    throw InvalidInput("only " + std::to_string(eligible.size()) + " usable stations in the selected regions, need " +
                       std::to_string(opt.n_sensors));
  Rng rng(opt.seed);
  for (std::size_t i = eligible.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(static_cast<std::size_t>(opt.n_sensors));
  std::sort(eligible.begin(), eligible.end());

  const int n = opt.n_sensors;
  RealDataset ds{{}, Graph(MatrixXd::Zero(2, 2)), {}, {}};
  ds.trace.signals.resize(n, length);
  ds.observed.resize(n, length);
  Coords coords(n, 2);
  int filled = 0;
  for (int r = 0; r < n; ++r) {
    const std::size_t src = eligible[static_cast<std::size_t>(r)];
    ds.stations.push_back(all[src]);
    coords(r, 0) = all[src].lon;
    coords(r, 1) = all[src].lat;
    std::vector<double> v = series[src];
    for (int t = 0; t < length; ++t) {
      ds.observed(r, t) = !std::isnan(v[static_cast<std::size_t>(t)]);
      filled += ds.observed(r, t) ? 0 : 1;
    }
    interpolate(v);
    for (int t = 0; t < length; ++t) ds.trace.signals(r, t) = v[static_cast<std::size_t>(t)];
  }
  if (filled > 0) log_info("interpolated " + std::to_string(filled) + " missing monthly values");

  MatrixXd dist = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dist(i, j) = dist(j, i) =
          haversine_km(ds.stations[static_cast<std::size_t>(i)].lat, ds.stations[static_cast<std::size_t>(i)].lon,
                       ds.stations[static_cast<std::size_t>(j)].lat, ds.stations[static_cast<std::size_t>(j)].lon);
  std::vector<double> knn_d;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    for (int j = 0; j < n; ++j)
      if (j != i) row.push_back(dist(i, j));
    std::partial_sort(row.begin(), row.begin() + opt.k, row.end());
    knn_d.insert(knn_d.end(), row.begin(), row.begin() + opt.k);
  }
  std::nth_element(knn_d.begin(), knn_d.begin() + static_cast<std::ptrdiff_t>(knn_d.size() / 2), knn_d.end());
  double scale = knn_d[knn_d.size() / 2];
  if (!(scale > 0.0)) scale = 1.0;
  const std::vector<int> ks(static_cast<std::size_t>(n), opt.k);
  ds.graph = build_knn_graph(dist, ks, scale, coords);
  return ds;
}

void write_synthetic_sea_dataset(const fs::path& stations_csv, const fs::path& measurements_csv, int n_stations,
                                 int first_year, int last_year, std::uint64_t seed) {
  if (n_stations < 1) throw InvalidInput("n_stations must be positive");
  if (last_year < first_year) throw InvalidInput("last_year precedes first_year");
  const auto regions = default_regions();
  const double offsets[] = {1.0, -1.5, -1.0, -2.0};
  // A slice of stations lies outside every region to exercise the filter.
  const RegionBox outside{"pacific", -20.0, 0.0, -150.0, -120.0};
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  struct Site {
    double lat, lon, offset;
  };
  std::vector<Site> sites;
  for (int i = 0; i < n_stations; ++i) {
    const bool out = unit(rng) < 0.1;
    const std::size_t ri = static_cast<std::size_t>(unit(rng) * regions.size()) % regions.size();
    const RegionBox& box = out ? outside : regions[ri];
    sites.push_back({box.lat_min + unit(rng) * (box.lat_max - box.lat_min),
                     box.lon_min + unit(rng) * (box.lon_max - box.lon_min), out ? 0.0 : offsets[ri]});
  }

  constexpr int kBumps = 8;
  constexpr double kBumpKm = 600.0;
  std::vector<Site> centers;
  for (int b = 0; b < kBumps; ++b) {
    const RegionBox& box = regions[static_cast<std::size_t>(b) % regions.size()];
    centers.push_back({box.lat_min + unit(rng) * (box.lat_max - box.lat_min),
                       box.lon_min + unit(rng) * (box.lon_max - box.lon_min), 0.0});
  }
  MatrixXd influence(n_stations, kBumps);
  for (int i = 0; i < n_stations; ++i)
    for (int b = 0; b < kBumps; ++b) {
      const double d = haversine_km(sites[static_cast<std::size_t>(i)].lat, sites[static_cast<std::size_t>(i)].lon,
                                    centers[static_cast<std::size_t>(b)].lat, centers[static_cast<std::size_t>(b)].lon);
      influence(i, b) = std::exp(-(d / kBumpKm) * (d / kBumpKm));
    }

  io::CsvTable st;
  st.header = {"id", "lat", "lon"};
  char id[16];
  for (int i = 0; i < n_stations; ++i) {
    std::snprintf(id, sizeof id, "ST%05d", i);
    st.rows.push_back({id, io::format_double(sites[static_cast<std::size_t>(i)].lat),
                       io::format_double(sites[static_cast<std::size_t>(i)].lon)});
  }
  io::write_csv(stations_csv, st, {"lat", "lon"});

  io::CsvTable ms;
  ms.header = {"station_id", "year", "month", "value"};
  VectorXd amp = VectorXd::Zero(kBumps);
  for (int year = first_year; year <= last_year; ++year) {
    for (int month = 1; month <= 12; ++month) {
      for (int b = 0; b < kBumps; ++b) amp(b) = 0.8 * amp(b) + 0.6 * gauss(rng);
      const VectorXd anomaly = influence * amp;
      const double phase = 2.0 * std::numbers::pi * (month - 8) / 12.0;
      for (int i = 0; i < n_stations; ++i) {
        const Site& s = sites[static_cast<std::size_t>(i)];
        const double lat = std::abs(s.lat);
        const double value = 27.0 - 0.5 * (lat - 30.0) + s.offset + (3.0 + 0.1 * (lat - 30.0)) * std::cos(phase) +
                             0.03 * (year - first_year) + anomaly(i) + 0.15 * gauss(rng);
        if (unit(rng) < 0.03) continue;
        std::snprintf(id, sizeof id, "ST%05d", i);
        ms.rows.push_back({id, std::to_string(year), std::to_string(month), io::format_double(value)});
      }
    }
  }
  io::write_csv(measurements_csv, ms, {"year", "month", "value"});
}

RealDataset load_real_dataset(const ExperimentConfig& cfg) {
  IngestOptions opt;
  opt.n_sensors = cfg.n_nodes;
  opt.k = cfg.knn;
  opt.first_year = cfg.first_year;
  opt.last_year = cfg.last_year;
  opt.seed = derive_seed(cfg.seed, 7);
  if (!cfg.stations_csv.empty() || !cfg.measurements_csv.empty()) {
    if (cfg.stations_csv.empty() || cfg.measurements_csv.empty())
      throw ConfigError("real_data needs both stations_csv and measurements_csv");
    return ingest_real(cfg.stations_csv, cfg.measurements_csv, opt);
  }
  const fs::path dir = fs::path(cfg.output_dir) / "data";
  log_info("no real dataset configured; generating the synthetic fallback in " + dir.string());
  write_synthetic_sea_dataset(dir / "stations.csv", dir / "measurements.csv", cfg.fallback_stations, cfg.first_year,
                              cfg.last_year, derive_seed(cfg.seed, 8));
  return ingest_real(dir / "stations.csv", dir / "measurements.csv", opt);
}

namespace {

std::vector<MetricsRecord> run_learned(const SignalTrace& trace, const SchedulerConfig& scfg,
                                       std::optional<Partition> fixed) {
  Scheduler s(scfg, SubspaceDictionary::identity(trace.n_nodes()), std::move(fixed));
  std::vector<MetricsRecord> out;
  for (int t = 0; t < trace.length(); ++t) out.push_back(s.step(trace.signals.col(t)).metrics);
  return out;
}

void check_real_length(const ExperimentConfig& cfg, const RealDataset& ds) {
  if (ds.trace.length() < cfg.length)
    throw ConfigError("signal.length exceeds the dataset's " + std::to_string(ds.trace.length()) + " months");
}

SignalTrace head(const SignalTrace& trace, int length) {
  SignalTrace t;
  t.signals = trace.signals.leftCols(length);
  t.noise_sigma = trace.noise_sigma;
  return t;
}

}  // namespace

OnlineResults run_real_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::kOnlineReal) throw ConfigError("run_real_experiment needs kind online-real");
  const RealDataset ds = load_real_dataset(cfg);
  check_real_length(cfg, ds);
  const SignalTrace trace = head(ds.trace, cfg.length);
  const GftBasis basis = gft_basis(ds.graph);
  auto has = [&](const char* p) {
    return std::find(cfg.partitioners.begin(), cfg.partitioners.end(), p) != cfg.partitioners.end();
  };
  std::optional<Partition> sfrob;
  if (has("sfrob")) sfrob = sfrob_partition(bandlimited_basis(basis, std::min(cfg.sfrob_bandwidth, ds.graph.size())), cfg.n_subsets);

  return collect(parallel_map<std::vector<MethodTrace>>(cfg.runs, cfg.threads, [&](int run) {
    const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
    SchedulerConfig scfg = run_scheduler_config(cfg, rs);
    scfg.dictionary = DictionaryMode::kLearned;
    std::vector<MethodTrace> out;
    for (const auto& p : cfg.partitioners) {
      SchedulerConfig c = scfg;
      std::optional<Partition> fixed;
      if (p == "srel") fixed = srel_partition(ds.graph, cfg.n_subsets, derive_seed(rs, 4));
      if (p == "sfrob") fixed = sfrob;
      if (fixed) c.partition = PartitionMode::kFixed;
      out.push_back({p, run, run_learned(trace, c, std::move(fixed))});
    }
    return out;
  }));
}

// ---------------------------------------------------------------- ablation

OnlineResults run_ablation(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::kAblation) throw ConfigError("run_ablation needs kind ablation");
  const RealDataset ds = load_real_dataset(cfg);
  check_real_length(cfg, ds);
  const SignalTrace trace = head(ds.trace, cfg.length);

  return collect(parallel_map<std::vector<MethodTrace>>(cfg.runs, cfg.threads, [&](int run) {
    const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
    SchedulerConfig base = run_scheduler_config(cfg, rs);
    base.dictionary = DictionaryMode::kLearned;
    SchedulerConfig c1 = base;
    SchedulerConfig c2 = base;
    c2.w_low = c2.w_high;
    SchedulerConfig c3 = base;
    c3.learn_source = LearnSource::kZeroPadded;
    return std::vector<MethodTrace>{{"config1", run, run_learned(trace, c1, std::nullopt)},
                                    {"config2", run, run_learned(trace, c2, std::nullopt)},
                                    {"config3", run, run_learned(trace, c3, std::nullopt)}};
  }));
}

void write_ablation_results(const fs::path& dir, const OnlineResults& results) {
  write_online_results(dir, results);
  io::CsvTable t;
  t.header = {"config", "mean_mse_db"};
  for (const auto& [m, v] : results.summary) t.rows.push_back({m, io::format_double(v)});
  io::write_csv(dir / "ablation.csv", t, {"mean_mse_db"});
}

}  // namespace gnp
