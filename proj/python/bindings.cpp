#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gnp/baselines.hpp"
#include "gnp/dict_learn.hpp"
#include "gnp/error.hpp"
#include "gnp/experiment.hpp"
#include "gnp/partition.hpp"
#include "gnp/sampling.hpp"

namespace py = pybind11;
using namespace gnp;

namespace {

std::vector<std::vector<int>> to_lists(const Partition& p) {
  std::vector<std::vector<int>> out;
  for (const auto& s : p.subsets()) out.push_back(s.indices());
  return out;
}

Graph graph_from(const MatrixXd& w) { return Graph(w); }

PdcaConfig pdca_config(double lipschitz, double beta, int max_iters, double tol, bool normalize, int restarts,
                       std::uint64_t seed) {
  PdcaConfig cfg;
  cfg.lipschitz = lipschitz;
  cfg.beta = beta;
  cfg.max_iters = max_iters;
  cfg.tol = tol;
  cfg.normalize_dictionary = normalize;
  cfg.restarts = restarts;
  cfg.seed = seed;
  return cfg;
}

ExperimentConfig config_from(const std::string& kind, const std::string& json_text) {
  return json_text.empty() ? ExperimentConfig::defaults(parse_experiment_kind(kind))
                           : ExperimentConfig::from_json_text(json_text);
}

}  // namespace

PYBIND11_MODULE(_gnpart, m) {
  m.doc() = "Subspace-aware graph node partitioning and online sensor scheduling";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<DegenerateSubspace>(m, "DegenerateSubspace", PyExc_ArithmeticError);

  // Graphs are passed around as dense weight matrices.
  m.def(
      "random_sensor_graph",
      [](int n, int k_min, int k_max, std::uint64_t seed) {
        const Graph g = random_sensor_graph(n, k_min, k_max, seed);
        return py::make_tuple(g.weights(), MatrixXd(*g.coords()));
      },
      py::arg("n_nodes"), py::arg("k_min") = 2, py::arg("k_max") = 8, py::arg("seed") = 0,
      "Returns (weights, coords) of a random k-NN sensor graph.");
  m.def("laplacian", [](const MatrixXd& w) { return laplacian(graph_from(w)); }, py::arg("weights"));
  m.def(
      "gft_basis",
      [](const MatrixXd& w) {
        const GftBasis b = gft_basis(graph_from(w));
        return py::make_tuple(b.eigenvalues, b.eigenvectors);
      },
      py::arg("weights"), "Returns (eigenvalues, eigenvectors) of the Laplacian, ascending.");
  m.def(
      "spectral_clustering",
      [](const MatrixXd& w, int n_clusters, std::uint64_t seed) {
        return spectral_clustering(graph_from(w), n_clusters, seed);
      },
      py::arg("weights"), py::arg("n_clusters"), py::arg("seed") = 0);

  m.def(
      "gen_hd",
      [](const MatrixXd& w, double alpha, std::uint64_t seed) {
        auto gen = gen_hd(gft_basis(graph_from(w)), alpha, seed);
        return py::make_tuple(gen.dictionary.matrix(), gen.signal);
      },
      py::arg("weights"), py::arg("alpha") = 10.0, py::arg("seed") = 0, "Returns (A, x).");
  m.def(
      "gen_pws",
      [](const MatrixXd& w, const std::vector<std::vector<int>>& clusters, std::uint64_t seed, int n_smooth) {
        auto gen = gen_pws(gft_basis(graph_from(w)), clusters, seed, n_smooth);
        return py::make_tuple(gen.dictionary.matrix(), gen.signal);
      },
      py::arg("weights"), py::arg("clusters"), py::arg("seed") = 0, py::arg("n_smooth") = 32, "Returns (A, x).");
  m.def(
      "bandlimited_basis",
      [](const MatrixXd& w, int bandwidth) { return bandlimited_basis(gft_basis(graph_from(w)), bandwidth).matrix(); },
      py::arg("weights"), py::arg("bandwidth"));

  m.def(
      "minimax_reconstruct",
      [](const MatrixXd& a, const VectorXd& x, std::vector<int> nodes, double sigma, std::uint64_t seed) {
        const SamplingSet set(std::move(nodes), static_cast<int>(x.size()));
        return minimax_reconstruct(SubspaceDictionary(a), sample(x, set, sigma, seed));
      },
      py::arg("a"), py::arg("x"), py::arg("nodes"), py::arg("sigma") = 0.0, py::arg("seed") = 0,
      "Samples x on the nodes (with optional white noise) and reconstructs it.");
  m.def(
      "aopt_objective",
      [](const MatrixXd& a, std::vector<int> nodes) {
        return aopt_objective(a, SamplingSet(std::move(nodes), static_cast<int>(a.rows())));
      },
      py::arg("a"), py::arg("nodes"));
  m.def("mse_db", &mse_db, py::arg("x"), py::arg("x_rec"));
  m.def("condition_number", &condition_number, py::arg("a"));

  m.def("objective_f", &objective_f, py::arg("m"), py::arg("a"));
  m.def("grad_f", &grad_f, py::arg("m"), py::arg("a"));
  m.def("prox_g", &prox_g, py::arg("v"), py::arg("target_card"));
  m.def(
      "pdca_bipartition",
      [](const MatrixXd& a, double lipschitz, double beta, int max_iters, double tol, bool normalize, int restarts,
         std::uint64_t seed) {
        const auto r = pdca_bipartition(SubspaceDictionary(a),
                                        pdca_config(lipschitz, beta, max_iters, tol, normalize, restarts, seed));
        py::list trace;
        for (const auto& row : r.trace) trace.append(py::make_tuple(row.iter, row.f, row.h, row.total));
        py::dict out;
        out["first"] = r.first.indices();
        out["second"] = r.second.indices();
        out["relaxed"] = r.relaxed;
        out["trace"] = trace;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["binary_objective"] = r.binary_objective;
        return out;
      },
      py::arg("a"), py::arg("lipschitz") = 1e3, py::arg("beta") = 1.0, py::arg("max_iters") = 5000,
      py::arg("tol") = 1e-6, py::arg("normalize") = true, py::arg("restarts") = 1, py::arg("seed") = 0);
  m.def(
      "hierarchical_partition",
      [](const MatrixXd& a, int levels, double lipschitz, double beta, int restarts, std::uint64_t seed) {
        PdcaConfig cfg = pdca_config(lipschitz, beta, 5000, 1e-6, true, restarts, seed);
        return to_lists(hierarchical_partition(SubspaceDictionary(a), levels, cfg));
      },
      py::arg("a"), py::arg("levels"), py::arg("lipschitz") = 1e3, py::arg("beta") = 1.0, py::arg("restarts") = 1,
      py::arg("seed") = 0, "2**levels subsets as lists of node ids.");
  m.def(
      "srel_partition",
      [](const MatrixXd& w, int n_subsets, std::uint64_t seed) {
        return to_lists(srel_partition(graph_from(w), n_subsets, seed));
      },
      py::arg("weights"), py::arg("n_subsets"), py::arg("seed") = 0);
  m.def(
      "sfrob_partition",
      [](const MatrixXd& a, int n_subsets) { return to_lists(sfrob_partition(SubspaceDictionary(a), n_subsets)); },
      py::arg("a"), py::arg("n_subsets"));

  m.def("prox_l1_budget", &prox_l1_budget, py::arg("y"), py::arg("row_budget"));
  m.def(
      "learn",
      [](const MatrixXd& x, const MatrixXd& w, const MatrixXd& a0, double budget, int max_outer) {
        DictLearnConfig cfg;
        cfg.budget = budget;
        cfg.max_outer = max_outer;
        const auto r = learn(x, ConfidenceWeights{w}, SubspaceDictionary(a0), cfg);
        return py::make_tuple(r.dictionary.matrix(), r.coefficients, r.objective_trace);
      },
      py::arg("x"), py::arg("w"), py::arg("a0"), py::arg("budget") = 300.0, py::arg("max_outer") = 50,
      "Returns (A, D, objective_trace).");

  m.def(
      "default_config", [](const std::string& kind) { return ExperimentConfig::defaults(parse_experiment_kind(kind)).to_json_text(); },
      py::arg("kind"), "Default configuration JSON for static | online-synthetic | online-real | ablation.");
  m.def(
      "run_static_experiment",
      [](const std::string& json_text) {
        const auto r = run_static_experiment(config_from("static", json_text));
        py::dict out;
        for (const auto& row : r.rows) {
          py::dict cols;
          for (std::size_t i = 0; i < r.columns.size(); ++i) cols[py::str(r.columns[i])] = row.mse_db[i];
          out[py::make_tuple(row.signal, row.condition)] = cols;
        }
        return out;
      },
      py::arg("config_json") = "", "Average MSE in dB keyed by (signal, condition) then column.");
  m.def(
      "run_online_experiment",
      [](const std::string& json_text) {
        const auto r = run_online_experiment(config_from("online-synthetic", json_text));
        py::dict out;
        for (const auto& [method, v] : r.summary) out[py::str(method)] = v;
        return out;
      },
      py::arg("config_json") = "", "Average MSE in dB per method.");
}
