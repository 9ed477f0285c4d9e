#include "doctest.h"
#include "gnp/baselines.hpp"
#include "helpers.hpp"

using namespace gnp;
using testing_helpers::random_matrix;
using testing_helpers::two_cliques;

TEST_CASE("SRel") {
  SUBCASE("two cliques dealt to three subsets: each mixes both cliques") {
    const Partition p = srel_partition(two_cliques(5), 3, 0);
    for (const auto& s : p.subsets()) {
      bool low = false, high = false;
      for (int v : s.indices()) (v < 5 ? low : high) = true;
      CHECK(low);
      CHECK(high);
    }
  }
  SUBCASE("as many subsets as nodes gives singletons") {
    const Partition p = srel_partition(two_cliques(3), 6, 0);
    for (const auto& s : p.subsets()) CHECK(s.size() == 1);
  }
  SUBCASE("valid balanced partition on a sensor graph") {
    const Graph g = random_sensor_graph(100, 2, 8, 4);
    for (auto merge : {ClusterMerge::kRoundRobin, ClusterMerge::kConcatenate}) {
      const Partition p = srel_partition(g, 8, 4, merge);
      CHECK(p.n_subsets() == 8);
      for (const auto& s : p.subsets()) CHECK((s.size() == 12 || s.size() == 13));
    }
    const auto r = srel_ranking(g, 4);
    std::vector<int> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  }
}

TEST_CASE("SFrob") {
  SUBCASE("identity ties resolve to index order") {
    const auto r = sfrob_ranking(SubspaceDictionary::identity(6));
    CHECK(r == std::vector<int>{0, 1, 2, 3, 4, 5});
    const Partition p = sfrob_partition(SubspaceDictionary::identity(6), 3);
    CHECK(p[0].indices() == std::vector<int>{0, 3});
    CHECK(p[1].indices() == std::vector<int>{1, 4});
    CHECK(p[2].indices() == std::vector<int>{2, 5});
  }
  SUBCASE("single atom with a dominant entry") {
    MatrixXd u = MatrixXd::Constant(7, 1, 0.1);
    u(4, 0) = 3.0;
    CHECK(sfrob_ranking(SubspaceDictionary(u)).front() == 4);
  }
  SUBCASE("first pick is the exhaustive best single node") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const MatrixXd a = random_matrix(8, 3, s);
      int best = -1;
      double best_val = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 8; ++i) {
        const MatrixXd row = a.row(i);
        const double v = (row * row.transpose() + kSfrobRidge * MatrixXd::Identity(1, 1)).inverse().trace();
        if (v < best_val) {
          best_val = v;
          best = i;
        }
      }
      CHECK(sfrob_ranking(SubspaceDictionary(a)).front() == best);
    }
  }
}

TEST_CASE("bandlimited basis") {
  const Graph g = random_sensor_graph(30, 2, 8, 2);
  const GftBasis b = gft_basis(g);
  const auto bl = bandlimited_basis(b, 5);
  CHECK(bl.n_atoms() == 5);
  CHECK((bl.matrix() - b.eigenvectors.leftCols(5)).norm() == 0.0);
  CHECK_THROWS(bandlimited_basis(b, 31));
}
