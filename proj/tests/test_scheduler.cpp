#include "doctest.h"
#include "gnp/error.hpp"
#include "gnp/scheduler.hpp"
#include "helpers.hpp"

using namespace gnp;
using testing_helpers::random_matrix;

namespace {

SignalTrace small_trace(int length, std::uint64_t seed) {
  const Graph g = random_sensor_graph(32, 2, 6, seed);
  const GftBasis b = gft_basis(g);
  return generate_tv_pws_trace(g, b, spectral_clustering(g, b, 3, seed), length, 0.5, seed + 1);
}

}  // namespace

TEST_CASE("signal buffer is a FIFO window") {
  SignalBuffer buf(2);
  CHECK(buf.empty());
  buf.push(VectorXd::Constant(3, 1.0), VectorXd::Ones(3));
  buf.push(VectorXd::Constant(3, 2.0), VectorXd::Zero(3));
  buf.push(VectorXd::Constant(3, 3.0), VectorXd::Ones(3));
  REQUIRE(buf.size() == 2);
  CHECK(buf.signals()(0, 0) == 2.0);
  CHECK(buf.signals()(0, 1) == 3.0);
  CHECK(buf.confidences().columns(0, 0) == 0.0);
  CHECK_THROWS_AS(buf.push(VectorXd::Ones(4), VectorXd::Ones(4)), InvalidInput);
  CHECK_THROWS_AS(SignalBuffer(0), InvalidInput);
}

TEST_CASE("configuration checks") {
  SchedulerConfig cfg;
  cfg.n_subsets = 3;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.n_subsets = 4;
  cfg.w_high = 2.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.w_high = 1.0;
  cfg.partition = PartitionMode::kFixed;
  CHECK_THROWS_AS(Scheduler(cfg, SubspaceDictionary::identity(8)), InvalidInput);
}

TEST_CASE("subsets cycle and partitions balance the load") {
  SchedulerConfig cfg;
  cfg.n_subsets = 4;
  cfg.dictionary = DictionaryMode::kStatic;
  Scheduler s(cfg, SubspaceDictionary(random_matrix(32, 6, 1)));
  std::vector<int> counts(32, 0);
  for (int t = 0; t < 12; ++t) {
    const auto out = s.step(VectorXd::Ones(32));
    CHECK(out.metrics.subset_id == t % 4);
    CHECK(out.metrics.epoch == t / 4);
    for (int v : (*s.partition())[static_cast<std::size_t>(t % 4)].indices()) ++counts[static_cast<std::size_t>(v)];
  }
  CHECK(s.partition_history().size() == 3);
  for (int c : counts) CHECK(c == 3);
}

TEST_CASE("perfect recovery with the true static subspace") {
  SchedulerConfig cfg;
  cfg.n_subsets = 2;
  cfg.dictionary = DictionaryMode::kStatic;
  const MatrixXd a = random_matrix(24, 5, 3);
  Scheduler s(cfg, SubspaceDictionary(a));
  for (int t = 0; t < 6; ++t) {
    const VectorXd x = a * random_matrix(5, 1, 10 + t).col(0);
    CHECK(s.step(x).metrics.mse_db <= -160.0);
  }
}

TEST_CASE("cold start on a constant signal") {
  SchedulerConfig cfg;
  cfg.n_subsets = 2;
  cfg.buffer_width = 4;
  cfg.learner.max_outer = 20;
  const int n = 16;
  Scheduler s(cfg, SubspaceDictionary::identity(n));
  const VectorXd x = VectorXd::Constant(n, 2.5);
  for (int t = 0; t < cfg.buffer_width; ++t) s.step(x);
  const MatrixXd& a = s.dictionary().matrix();
  const VectorXd one = VectorXd::Ones(n).normalized();
  const VectorXd proj = a * a.completeOrthogonalDecomposition().solve(one);
  CHECK(std::acos(std::min(1.0, proj.norm())) <= 0.1);
  CHECK(s.buffer().size() == cfg.buffer_width);
}

TEST_CASE("run over a trace") {
  SchedulerConfig cfg;
  cfg.n_subsets = 4;
  cfg.sigma = std::sqrt(1e-3);
  cfg.dictionary = DictionaryMode::kOracle;
  cfg.seed = 5;
  SUBCASE("length one gives one record") {
    const SignalTrace tr = small_trace(1, 1);
    CHECK(run(tr, cfg, tr.subspaces.front()).size() == 1);
  }
  SUBCASE("same seed, same records") {
    const SignalTrace tr = small_trace(10, 2);
    const auto a = run(tr, cfg, tr.subspaces.front());
    const auto b = run(tr, cfg, tr.subspaces.front());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].mse_db == b[i].mse_db);
      CHECK(a[i].cond == b[i].cond);
    }
  }
  SUBCASE("fixed oracle run matches the adaptive run before the first re-partition") {
    const SignalTrace tr = small_trace(10, 3);
    Scheduler s(cfg, tr.subspaces.front());
    std::vector<MetricsRecord> adaptive;
    for (int t = 0; t < tr.length(); ++t) adaptive.push_back(s.step(tr.signals.col(t), &tr.subspaces[t]).metrics);
    const auto fixed = run_fixed(tr, s.partition_history().front(), cfg, tr.subspaces.front(), true);
    for (int t = 0; t < cfg.n_subsets; ++t) CHECK(fixed[t].mse_db == adaptive[t].mse_db);
    const auto pinned = run_fixed(tr, s.partition_history().front(), cfg, tr.subspaces.front(), false);
    CHECK(pinned.front().mse_db == fixed.front().mse_db);
  }
  SUBCASE("oracle mode needs subspaces") {
    SignalTrace tr = small_trace(3, 4);
    tr.subspaces.clear();
    CHECK_THROWS_AS(run(tr, cfg, SubspaceDictionary::identity(32)), InvalidInput);
  }
}

TEST_CASE("mean of records") {
  std::vector<MetricsRecord> r(2);
  r[0].mse_db = -10.0;
  r[1].mse_db = -20.0;
  CHECK(mean_mse_db(r) == -15.0);
  CHECK_THROWS_AS(mean_mse_db({}), InvalidInput);
}
