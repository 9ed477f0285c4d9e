#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gnp/error.hpp"
#include "gnp/experiment.hpp"
#include "gnp/io.hpp"
#include "helpers.hpp"

using namespace gnp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gnpart_test_" + name);
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

}  // namespace

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, -3.0103, 1e-300, 123456789.123456789, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("csv validation") {
  io::CsvTable t{{"a", "b"}, {{"1", "x"}}};
  CHECK_NOTHROW(t.validate({"a"}));
  CHECK_THROWS(t.validate({"b"}));
  t.rows.push_back({"1"});
  CHECK_THROWS(t.validate());
  CHECK_THROWS((io::CsvTable{{"a", "a"}, {}}.validate()));
}

TEST_CASE("file formats round-trip") {
  const fs::path dir = scratch_dir("io");
  const Graph g = random_sensor_graph(20, 2, 5, 3);
  io::write_edge_list(dir / "edges.txt", g);
  io::write_coords(dir / "coords.csv", *g.coords());
  const Graph h = io::read_edge_list(dir / "edges.txt", dir / "coords.csv");
  CHECK((h.weights() - g.weights()).norm() == 0.0);
  CHECK((*h.coords() - *g.coords()).norm() == 0.0);

  const Partition p = cyclic_assignment({5, 1, 4, 0, 3, 2, 6, 7}, 4);
  io::write_partition(dir / "p.csv", p);
  const Partition q = io::read_partition(dir / "p.csv");
  for (int i = 0; i < 4; ++i) CHECK(p[i] == q[i]);

  std::vector<MetricsRecord> recs{{0, 0, -12.5, 0, 3.25}, {1, 1, kMseFloorDb, 0, 1.0}};
  io::write_metrics(dir / "m.csv", recs);
  const auto back = io::read_metrics(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].mse_db == kMseFloorDb);
  CHECK(back[0].cond == 3.25);
  CHECK(slurp(dir / "m.csv").rfind("t,subset_id,mse_db,epoch,cond\n", 0) == 0);

  const MatrixXd m = testing_helpers::random_matrix(4, 3, 1);
  io::write_matrix(dir / "a.txt", m);
  CHECK((io::read_matrix(dir / "a.txt") - m).norm() == 0.0);
  io::write_signal_trace(dir / "s.csv", m);
  CHECK((io::read_signal_trace(dir / "s.csv") - m).norm() == 0.0);
}

TEST_CASE("malformed inputs are rejected") {
  const fs::path dir = scratch_dir("bad");
  std::ofstream(dir / "edges.txt") << "# nodes 3\n0 1 1\n1 0 2\n";
  CHECK_THROWS_AS(io::read_edge_list(dir / "edges.txt"), InvalidInput);
  std::ofstream(dir / "p.csv") << "subset_id,node_id\n0,0\n0,1\n1,1\n";
  CHECK_THROWS_AS(io::read_partition(dir / "p.csv"), InvalidInput);
  std::ofstream(dir / "m.csv") << "t,wrong\n";
  CHECK_THROWS_AS(io::read_metrics(dir / "m.csv"), InvalidInput);
  CHECK_THROWS(io::read_csv(dir / "missing.csv"));
}

TEST_CASE("experiment configuration") {
  SUBCASE("defaults by kind") {
    CHECK(ExperimentConfig::defaults(ExperimentKind::kStatic).n_subsets == 4);
    CHECK(ExperimentConfig::defaults(ExperimentKind::kStatic).runs == 30);
    CHECK(ExperimentConfig::defaults(ExperimentKind::kOnlineSynthetic).n_subsets == 16);
    CHECK(ExperimentConfig::defaults(ExperimentKind::kOnlineSynthetic).length == 64);
    CHECK(ExperimentConfig::defaults(ExperimentKind::kAblation).noise_variance == 0.5);
  }
  SUBCASE("json round trip") {
    auto c = ExperimentConfig::defaults(ExperimentKind::kOnlineSynthetic);
    c.seed = 99;
    c.pdca.beta = 0.5;
    const auto d = ExperimentConfig::from_json_text(c.to_json_text());
    CHECK(d.seed == 99);
    CHECK(d.pdca.beta == 0.5);
    CHECK(d.to_json_text() == c.to_json_text());
  }
  SUBCASE("partial json keeps the defaults") {
    const auto c = ExperimentConfig::from_json_text(R"({"schema_version": 1, "kind": "static", "runs": 2})");
    CHECK(c.runs == 2);
    CHECK(c.n_nodes == 256);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"schema_version": 2, "kind": "static"})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"kind": "static"})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"schema_version": 1, "kind": "static", "rnus": 2})"),
                    ConfigError);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text(R"({"schema_version": 1, "kind": "static", "pdca": {"gamma": 1}})"),
        ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"schema_version": 1, "kind": "nope"})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{not json"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"schema_version": 1, "kind": "static", "n_subsets": 3})"),
                    ConfigError);
  }
}

TEST_CASE("parallel map keeps index order and propagates errors") {
  const auto v = parallel_map<int>(50, 4, [](int i) { return i * i; });
  for (int i = 0; i < 50; ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map<int>(10, 3,
                                    [](int i) {
                                      if (i == 7) throw NumericalFailure("x");
                                      return i;
                                    }),
                  NumericalFailure);
}
