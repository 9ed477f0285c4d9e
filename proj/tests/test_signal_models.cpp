#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "gnp/error.hpp"
#include "gnp/signal_models.hpp"
#include "helpers.hpp"

using namespace gnp;

namespace {

struct Fixture {
  Graph g = random_sensor_graph(64, 2, 8, 5);
  GftBasis basis = gft_basis(g);
  std::vector<NodeSet> clusters = spectral_clustering(g, basis, 3, 9);
};

VectorXd ranks(const VectorXd& v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) < v(b); });
  VectorXd r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r(idx[i]) = static_cast<double>(i);
  return r;
}

double spearman(const VectorXd& a, const VectorXd& b) {
  VectorXd ra = ranks(a), rb = ranks(b);
  ra.array() -= ra.mean();
  rb.array() -= rb.mean();
  return ra.dot(rb) / (ra.norm() * rb.norm());
}

}  // namespace

TEST_CASE("dictionary rejects zero columns and non-finite entries") {
  MatrixXd a = MatrixXd::Identity(3, 2);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(SubspaceDictionary{a}, InvalidInput);
  CHECK_THROWS_AS(SubspaceDictionary{MatrixXd::Zero(3, 1)}, InvalidInput);
}

TEST_CASE("heat diffusion") {
  Fixture f;
  SUBCASE("alpha zero is the identity") {
    const auto gen = gen_hd(f.basis, 0.0, 3);
    CHECK((gen.dictionary.matrix() - MatrixXd::Identity(64, 64)).norm() <= 1e-10);
    CHECK((gen.signal - gen.dictionary.matrix() * gen.signal).norm() <= 1e-10);
  }
  SUBCASE("kernel is symmetric") {
    const MatrixXd h = heat_kernel(f.basis, 10.0);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("spectrum decays with frequency") {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto gen = gen_hd(f.basis, 10.0, s);
      const VectorXd xhat = (f.basis.eigenvectors.transpose() * gen.signal).cwiseAbs();
      total += spearman(xhat, f.basis.eigenvalues);
    }
    CHECK(total / 10.0 < 0.0);
  }
}

TEST_CASE("piecewise smooth") {
  Fixture f;
  const auto gen = gen_pws(f.basis, f.clusters, 17);
  const MatrixXd& a = gen.dictionary.matrix();
  REQUIRE(a.cols() == 35);
  SUBCASE("signal lies in the range of the dictionary") {
    const VectorXd d = a.completeOrthogonalDecomposition().solve(gen.signal);
    CHECK((a * d - gen.signal).norm() <= 1e-10 * std::max(1.0, gen.signal.norm()));
  }
  SUBCASE("smooth part removed leaves a piecewise constant signal") {
    const VectorXd d = a.completeOrthogonalDecomposition().solve(gen.signal);
    const VectorXd rest = gen.signal - a.leftCols(32) * d.head(32);
    for (const auto& c : f.clusters)
      for (int v : c) CHECK(rest(v) == doctest::Approx(rest(c.front())).epsilon(1e-8));
  }
  SUBCASE("smooth columns skip the constant eigenvector") {
    CHECK((a.leftCols(32) - f.basis.eigenvectors.middleCols(1, 32)).norm() == 0.0);
  }
  SUBCASE("clusters must partition the nodes") {
    auto bad = f.clusters;
    bad[0].push_back(bad[1].front());
    CHECK_THROWS_AS(gen_pws(f.basis, bad, 1), InvalidInput);
  }
}

TEST_CASE("cluster offset coefficients have variance five") {
  std::vector<double> samples;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const auto c = draw_tv_pws_coefficients(8, 3, s);
    for (int i = 0; i < 3; ++i) samples.push_back(c.offsets(i));
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples.size() - 1);
  CHECK(var == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("time-varying model") {
  Fixture f;
  CHECK(tv_alpha(0) == 2.0);
  CHECK(tv_alpha(8) == 3.0);
  const double lmax = f.basis.eigenvalues(63);
  for (int t = 1; t < 64; ++t) CHECK(std::exp(-tv_alpha(t) * lmax) < std::exp(-tv_alpha(t - 1) * lmax));

  SUBCASE("drift stays within two hops of the initial boundaries") {
    std::vector<int> labels0(64);
    for (int c = 0; c < 3; ++c)
      for (int v : f.clusters[c]) labels0[v] = c;
    const auto eligible = boundary_nodes(f.g, labels0, 2);
    const std::set<int> allowed(eligible.begin(), eligible.end());
    const auto drift = drift_clusters(f.g, f.clusters, 64, 0.5, 4);
    REQUIRE(drift.size() == 64);
    CHECK(drift[0] == labels0);
    bool any_change = false;
    for (const auto& lab : drift)
      for (int i = 0; i < 64; ++i)
        if (lab[i] != labels0[i]) {
          any_change = true;
          CHECK(allowed.count(i) == 1);
        }
    CHECK(any_change);
  }
  SUBCASE("trace shares coefficients and matches its subspaces") {
    const SignalTrace tr = generate_tv_pws_trace(f.g, f.basis, f.clusters, 12, 0.5, 8);
    REQUIRE(tr.length() == 12);
    REQUIRE(tr.subspaces.size() == 12);
    const auto coef = draw_tv_pws_coefficients(64, 3, 8);
    VectorXd d(67);
    d << coef.smooth, coef.offsets;
    for (int t = 0; t < 12; ++t) {
      CHECK((tr.subspaces[t].matrix() * d - tr.signals.col(t)).norm() <= 1e-10);
      CHECK((tr.subspaces[t].matrix().leftCols(64) - heat_kernel(f.basis, tv_alpha(t))).norm() <= 1e-12);
    }
  }
}

TEST_CASE("additive noise") {
  const VectorXd x = VectorXd::LinSpaced(10, 0.0, 1.0);
  CHECK((add_noise(x, 0.0, 1) - x).norm() == 0.0);
  CHECK_THROWS_AS(add_noise(x, -1.0, 1), InvalidInput);
  const double sigma = std::sqrt(1e-3);
  const VectorXd z = VectorXd::Zero(100000);
  const VectorXd n = add_noise(z, sigma, 42);
  const double var = (n.array() - n.mean()).square().sum() / (n.size() - 1);
  CHECK(var == doctest::Approx(1e-3).epsilon(0.02));
  CHECK((add_noise(z.head(50), sigma, 42) - add_noise(z.head(50), sigma, 42)).norm() == 0.0);
}
