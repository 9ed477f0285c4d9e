// gnpart: command-line front end for partitioning, scheduling and experiments.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gnp/error.hpp"
#include "gnp/experiment.hpp"
#include "gnp/io.hpp"
#include "gnp/log.hpp"

namespace {

using namespace gnp;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct PartitionArgs {
  std::string dictionary;
  std::string edges;
  int random_graph = 0;
  std::uint64_t graph_seed = 0;
  std::string model = "heat";
  double alpha = 10.0;
  int bandwidth = 32;
  std::string method = "proposed";
  int subsets = 4;
  std::uint64_t seed = 0;
  double lipschitz = 1e3;
  double beta = 1.0;
  int max_iters = 5000;
  bool no_normalize = false;
  int restarts = 1;
  std::string out = "partition.csv";
  std::string trace;
  std::string save_graph;
};

struct ScheduleArgs {
  std::string signals;
  std::string config;
  std::string mode = "learned";
  std::string dictionaries;
  std::string initial;
  std::string partition;
  int subsets = 0;
  std::optional<double> noise_variance;
  std::optional<std::uint64_t> seed;
  std::string out = "metrics.csv";
  std::string checkpoint_dir;
  std::string partitions_dir;
};

struct ExperimentArgs {
  std::string kind;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> threads;
  std::string out;
};

struct IngestArgs {
  std::string stations;
  std::string measurements;
  bool synthetic = false;
  int synthetic_stations = 600;
  std::string out = "ingested";
  int sensors = 256;
  int k = 8;
  int first_year = 2016;
  int last_year = 2021;
  std::uint64_t seed = 0;
};

int levels_of(int subsets) {
  if (subsets < 2 || (subsets & (subsets - 1)) != 0) throw ConfigError("--subsets must be a power of two >= 2");
  int k = 0;
  while ((1 << k) < subsets) ++k;
  return k;
}

Graph load_graph(const PartitionArgs& a) {
  if (!a.edges.empty() && a.random_graph > 0) throw ConfigError("use either --edges or --random-graph");
  if (!a.edges.empty()) return io::read_edge_list(a.edges);
  if (a.random_graph > 0) return random_sensor_graph(a.random_graph, 2, 8, a.graph_seed);
  throw ConfigError("this method needs a graph (--edges or --random-graph)");
}

SubspaceDictionary model_dictionary(const PartitionArgs& a, const Graph& g) {
  const GftBasis basis = gft_basis(g);
  if (a.model == "heat") return SubspaceDictionary(heat_kernel(basis, a.alpha));
  if (a.model == "bandlimited") return bandlimited_basis(basis, a.bandwidth);
  if (a.model == "pws") {
    const auto clusters = spectral_clustering(g, basis, 3, a.graph_seed);
    const int smooth = std::min(32, g.size() / 2);
    return gen_pws(basis, clusters, a.graph_seed, smooth).dictionary;
  }
  throw ConfigError("unknown --model '" + a.model + "'");
}

int cmd_partition(const PartitionArgs& a) {
  const int levels = levels_of(a.subsets);
  std::optional<Graph> graph;
  if (!a.edges.empty() || a.random_graph > 0) graph = load_graph(a);
  if (graph && !a.save_graph.empty()) {
    io::write_edge_list(fs::path(a.save_graph) / "edges.txt", *graph);
    if (graph->coords()) io::write_coords(fs::path(a.save_graph) / "coords.csv", *graph->coords());
  }

  std::optional<SubspaceDictionary> dict;
  if (!a.dictionary.empty()) {
    dict.emplace(io::read_matrix(a.dictionary));
  } else if (graph && a.method != "srel") {
    dict = model_dictionary(a, *graph);
  }

  PdcaConfig pcfg;
  pcfg.lipschitz = a.lipschitz;
  pcfg.beta = a.beta;
  pcfg.max_iters = a.max_iters;
  pcfg.normalize_dictionary = !a.no_normalize;
  pcfg.restarts = a.restarts;
  pcfg.seed = a.seed;
  try {
    pcfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }

  std::optional<Partition> part;
  if (a.method == "proposed") {
    if (!dict) throw ConfigError("proposed partitioning needs --dictionary or a graph with --model");
    if (!a.trace.empty()) {
      if (a.subsets != 2) throw ConfigError("--trace is only available with --subsets 2");
      const BipartitionResult r = pdca_bipartition(*dict, pcfg);
      io::write_pdca_trace(a.trace, r.trace);
      part = Partition({r.first, r.second});
      if (!r.converged) log_warning("PDCA stopped at the iteration limit");
    } else {
      part = hierarchical_partition(*dict, levels, pcfg);
    }
  } else if (a.method == "srel") {
    if (!graph) throw ConfigError("srel needs --edges or --random-graph");
    part = srel_partition(*graph, a.subsets, a.seed);
  } else if (a.method == "sfrob") {
    if (!dict) throw ConfigError("sfrob needs --dictionary or a graph with --model");
    part = sfrob_partition(*dict, a.subsets);
  } else {
    throw ConfigError("unknown --method '" + a.method + "'");
  }
  io::write_partition(a.out, *part);
  std::cout << "wrote " << part->n_subsets() << " subsets of " << part->n_nodes() << " nodes to " << a.out << "\n";
  return kExitOk;
}

int cmd_schedule(const ScheduleArgs& a) {
  ExperimentConfig ecfg = a.config.empty() ? ExperimentConfig::defaults(ExperimentKind::kOnlineSynthetic)
                                           : ExperimentConfig::load(a.config);
  SchedulerConfig cfg = scheduler_config(ecfg);
  if (a.subsets > 0) cfg.n_subsets = a.subsets;
  if (a.noise_variance) {
    if (!(*a.noise_variance >= 0.0)) throw ConfigError("--noise-variance must be nonnegative");
    cfg.sigma = std::sqrt(*a.noise_variance);
  }
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.pdca.seed = *a.seed;
  }
  if (a.mode == "learned") cfg.dictionary = DictionaryMode::kLearned;
  else if (a.mode == "oracle") cfg.dictionary = DictionaryMode::kOracle;
  else if (a.mode == "static") cfg.dictionary = DictionaryMode::kStatic;
  else throw ConfigError("unknown --mode '" + a.mode + "'");
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }

  SignalTrace trace;
  trace.signals = io::read_signal_trace(a.signals);
  const int n = trace.n_nodes();
  if (cfg.dictionary == DictionaryMode::kOracle) {
    if (a.dictionaries.empty()) throw ConfigError("oracle mode needs --dictionaries DIR with A_<t>.txt files");
    for (int t = 0; t < trace.length(); ++t)
      trace.subspaces.emplace_back(io::read_matrix(fs::path(a.dictionaries) / ("A_" + std::to_string(t) + ".txt")));
  }
  trace.validate();

  SubspaceDictionary initial = a.initial.empty() ? (trace.has_subspaces() ? trace.subspaces.front()
                                                                          : SubspaceDictionary::identity(n))
                                                 : SubspaceDictionary(io::read_matrix(a.initial));
  std::optional<Partition> fixed;
  if (!a.partition.empty()) {
    fixed = io::read_partition(a.partition);
    cfg.partition = PartitionMode::kFixed;
  }

  Scheduler s(cfg, initial, fixed);
  std::vector<MetricsRecord> records;
  std::size_t saved_partitions = 0;
  for (int t = 0; t < trace.length(); ++t) {
    const SubspaceDictionary* oracle = trace.has_subspaces() ? &trace.subspaces[static_cast<std::size_t>(t)] : nullptr;
    records.push_back(s.step(trace.signals.col(t), oracle).metrics);
    if (!a.checkpoint_dir.empty())
      io::write_matrix(fs::path(a.checkpoint_dir) / ("A_" + std::to_string(t) + ".txt"), s.dictionary().matrix());
    if (!a.partitions_dir.empty()) {
      for (; saved_partitions < s.partition_history().size(); ++saved_partitions)
        io::write_partition(fs::path(a.partitions_dir) / ("partition_epoch" + std::to_string(saved_partitions) + ".csv"),
                            s.partition_history()[saved_partitions]);
    }
  }
  io::write_metrics(a.out, records);
  std::cout << "steps " << records.size() << " mean_mse_db " << io::format_double(mean_mse_db(records)) << "\n";
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& a) {
  const std::map<std::string, ExperimentKind> kinds{{"static", ExperimentKind::kStatic},
                                                    {"online", ExperimentKind::kOnlineSynthetic},
                                                    {"real", ExperimentKind::kOnlineReal},
                                                    {"ablation", ExperimentKind::kAblation}};
  const ExperimentKind kind = kinds.at(a.kind);
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig::defaults(kind) : ExperimentConfig::load(a.config);
  if (cfg.kind != kind)
    throw ConfigError("config kind '" + to_string(cfg.kind) + "' does not match subcommand '" + a.kind + "'");
  if (a.seed) cfg.seed = *a.seed;
  if (a.runs) cfg.runs = *a.runs;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.out.empty()) cfg.output_dir = a.out;
  cfg.validate();

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "config.json", std::ios::binary);
    out << cfg.to_json_text();
  }

  switch (kind) {
    case ExperimentKind::kStatic: {
      const StaticResults res = run_static_experiment(cfg);
      write_static_results(dir, res);
      write_static_artifacts(dir / "artifacts", cfg);
      std::cout << "signal,condition";
      for (const auto& c : res.columns) std::cout << "," << c;
      std::cout << "\n";
      for (const auto& r : res.rows) {
        std::cout << r.signal << "," << r.condition;
        for (double v : r.mse_db) std::cout << "," << v;
        std::cout << "\n";
      }
      break;
    }
    case ExperimentKind::kOnlineSynthetic:
    case ExperimentKind::kOnlineReal: {
      const OnlineResults res = kind == ExperimentKind::kOnlineSynthetic ? run_online_experiment(cfg)
                                                                         : run_real_experiment(cfg);
      write_online_results(dir, res);
      for (const auto& [m, v] : res.summary) std::cout << m << " " << v << "\n";
      break;
    }
    case ExperimentKind::kAblation: {
      const OnlineResults res = run_ablation(cfg);
      write_ablation_results(dir, res);
      for (const auto& [m, v] : res.summary) std::cout << m << " " << v << "\n";
      break;
    }
  }
  return kExitOk;
}

int cmd_ingest(const IngestArgs& a) {
  const fs::path out = a.out;
  fs::path stations = a.stations;
  fs::path measurements = a.measurements;
  if (a.synthetic) {
    if (!a.stations.empty() || !a.measurements.empty())
      throw ConfigError("--synthetic generates its own input files; drop --stations/--measurements");
    stations = out / "raw" / "stations.csv";
    measurements = out / "raw" / "measurements.csv";
    write_synthetic_sea_dataset(stations, measurements, a.synthetic_stations, a.first_year, a.last_year, a.seed);
  } else if (a.stations.empty() || a.measurements.empty()) {
    throw ConfigError("ingest needs --stations and --measurements, or --synthetic");
  }
  IngestOptions opt;
  opt.n_sensors = a.sensors;
  opt.k = a.k;
  opt.first_year = a.first_year;
  opt.last_year = a.last_year;
  opt.seed = a.seed;
  const RealDataset ds = ingest_real(stations, measurements, opt);
  io::write_edge_list(out / "edges.txt", ds.graph);
  io::write_coords(out / "coords.csv", *ds.graph.coords());
  io::write_signal_trace(out / "signals.csv", ds.trace.signals);
  io::CsvTable sel;
  sel.header = {"node", "id", "lat", "lon"};
  for (std::size_t i = 0; i < ds.stations.size(); ++i)
    sel.rows.push_back({std::to_string(i), ds.stations[i].id, io::format_double(ds.stations[i].lat),
                        io::format_double(ds.stations[i].lon)});
  io::write_csv(out / "selected_stations.csv", sel, {"node", "lat", "lon"});
  io::CsvTable mask;
  mask.header = {"t", "node", "observed"};
  for (Eigen::Index t = 0; t < ds.observed.cols(); ++t)
    for (Eigen::Index n = 0; n < ds.observed.rows(); ++n)
      mask.rows.push_back({std::to_string(t), std::to_string(n), ds.observed(n, t) ? "1" : "0"});
  io::write_csv(out / "observed.csv", mask, {"t", "node", "observed"});
  std::cout << "ingested " << ds.stations.size() << " stations x " << ds.trace.length() << " months into " << out.string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph node partitioning and online sensor scheduling"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Partition graph nodes into equally informative subsets");
  auto* dict_opt = part->add_option("--dictionary", pa.dictionary, "Dense matrix file holding A");
  part->add_option("--edges", pa.edges, "Edge list of the sensor graph");
  part->add_option("--random-graph", pa.random_graph, "Generate a random sensor graph with this many nodes");
  part->add_option("--graph-seed", pa.graph_seed, "Seed for the random graph and PWS clusters");
  part->add_option("--model", pa.model, "Dictionary built from the graph: heat | pws | bandlimited")
      ->check(CLI::IsMember({"heat", "pws", "bandlimited"}))
      ->excludes(dict_opt);
  part->add_option("--alpha", pa.alpha, "Heat-kernel exponent");
  part->add_option("--bandwidth", pa.bandwidth, "Bandwidth for the bandlimited model");
  part->add_option("--method", pa.method, "proposed | srel | sfrob")
      ->check(CLI::IsMember({"proposed", "srel", "sfrob"}));
  part->add_option("--subsets", pa.subsets, "Number of subsets (power of two)");
  part->add_option("--seed", pa.seed, "Seed for the initial point and tie-breaks");
  part->add_option("--lipschitz", pa.lipschitz, "PDCA constant L");
  part->add_option("--beta", pa.beta, "DC penalty weight");
  part->add_option("--max-iters", pa.max_iters, "PDCA iteration cap");
  part->add_flag("--no-normalize", pa.no_normalize, "Run PDCA on the raw dictionary scale");
  part->add_option("--restarts", pa.restarts, "Independent PDCA starts; the best split wins");
  part->add_option("--out", pa.out, "Partition CSV (subset_id,node_id)");
  part->add_option("--trace", pa.trace, "PDCA objective trace CSV (only with --subsets 2)");
  part->add_option("--save-graph", pa.save_graph, "Directory for edges.txt and coords.csv of the graph used");

  ScheduleArgs sa;
  auto* sched = app.add_subcommand("schedule", "Run the online scheduler over a signal trace");
  sched->add_option("--signals", sa.signals, "Signal trace CSV (t,node,value)")->required();
  sched->add_option("--config", sa.config, "JSON config; its scheduler/pdca/learner sections are used");
  sched->add_option("--mode", sa.mode, "learned | oracle | static")
      ->check(CLI::IsMember({"learned", "oracle", "static"}));
  sched->add_option("--dictionaries", sa.dictionaries, "Directory of A_<t>.txt files for oracle mode");
  sched->add_option("--initial", sa.initial, "Initial dictionary (default: identity, or A_0 in oracle mode)");
  sched->add_option("--partition", sa.partition, "Fixed partition CSV; disables re-partitioning");
  sched->add_option("--subsets", sa.subsets, "Number of subsets (power of two)");
  sched->add_option("--noise-variance", sa.noise_variance, "Measurement noise variance");
  sched->add_option("--seed", sa.seed, "Seed override");
  sched->add_option("--out", sa.out, "Metrics CSV (t,subset_id,mse_db,epoch,cond)");
  sched->add_option("--checkpoint-dir", sa.checkpoint_dir, "Write the dictionary after every step");
  sched->add_option("--partitions-dir", sa.partitions_dir, "Write every partition epoch");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Reproduce an experiment");
  exp->add_option("kind", ea.kind, "static | online | real | ablation")
      ->required()
      ->check(CLI::IsMember({"static", "online", "real", "ablation"}));
  exp->add_option("--config", ea.config, "JSON config (schema_version 1)");
  exp->add_option("--seed", ea.seed, "Seed override");
  exp->add_option("--runs", ea.runs, "Run count override");
  exp->add_option("--threads", ea.threads, "Worker threads");
  exp->add_option("--out", ea.out, "Output directory override");

  IngestArgs ia;
  auto* ing = app.add_subcommand("ingest", "Convert station and measurement CSVs into a graph and signal trace");
  ing->add_option("--stations", ia.stations, "Station CSV (id,lat,lon)");
  ing->add_option("--measurements", ia.measurements, "Measurement CSV (station_id,year,month,value)");
  ing->add_flag("--synthetic", ia.synthetic, "Generate the synthetic sea-temperature dataset first");
  ing->add_option("--synthetic-stations", ia.synthetic_stations, "Stations in the synthetic dataset");
  ing->add_option("--out", ia.out, "Output directory");
  ing->add_option("--sensors", ia.sensors, "Stations to keep");
  ing->add_option("--k", ia.k, "Nearest neighbours per node");
  ing->add_option("--first-year", ia.first_year, "First year of the window");
  ing->add_option("--last-year", ia.last_year, "Last year of the window");
  ing->add_option("--seed", ia.seed, "Seed for station selection and synthesis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (verbose) set_log_level(LogLevel::kInfo);

  try {
    if (*part) return cmd_partition(pa);
    if (*sched) return cmd_schedule(sa);
    if (*exp) return cmd_experiment(ea);
    if (*ing) return cmd_ingest(ia);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateSubspace& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
