#include "doctest.h"
#include "gnp/error.hpp"
#include "gnp/sampling.hpp"
#include "helpers.hpp"

using namespace gnp;
using testing_helpers::random_matrix;

TEST_CASE("sampling sets") {
  const SamplingSet s({3, 1, 3}, 5);
  CHECK(s.indices() == std::vector<int>{1, 3});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(0));
  CHECK(SamplingSet::from_indicator(s.indicator()) == s);
  CHECK_THROWS_AS(SamplingSet({5}, 5), InvalidInput);
}

TEST_CASE("sampling operator") {
  VectorXd x(2);
  x << 3, 7;
  CHECK((sample(x, SamplingSet::all(2), 0.0, 1).values - x).norm() == 0.0);
  const auto one = sample(x, SamplingSet({0}, 2), 0.0, 1);
  REQUIRE(one.values.size() == 1);
  CHECK(one.values(0) == 3.0);
  CHECK_THROWS_AS(sample(x, SamplingSet({}, 2), 0.0, 1), InvalidInput);

  const double sigma = 0.1;
  const VectorXd z = VectorXd::Zero(20);
  const SamplingSet set({0, 2, 4, 6, 8}, 20);
  Rng rng(9);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) acc += sample(z, set, sigma, rng).values.squaredNorm() / set.size();
  CHECK(acc / draws == doctest::Approx(sigma * sigma).epsilon(0.03));
}

TEST_CASE("minimax reconstruction") {
  SUBCASE("perfect recovery under the direct-sum condition") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const MatrixXd a = random_matrix(20, 5, s);
      const VectorXd d = random_matrix(5, 1, s + 100).col(0);
      const VectorXd x = a * d;
      const SamplingSet set({0, 3, 5, 8, 11, 13, 19}, 20);
      const VectorXd xr = minimax_reconstruct(SubspaceDictionary(a), sample(x, set, 0.0, 0));
      CHECK((xr - x).norm() <= 1e-8 * x.norm());
    }
  }
  SUBCASE("identity dictionary with full sampling returns the samples") {
    const VectorXd x = random_matrix(6, 1, 3).col(0);
    const auto meas = sample(x, SamplingSet::all(6), 0.0, 0);
    CHECK((minimax_reconstruct(SubspaceDictionary::identity(6), meas) - meas.values).norm() <= 1e-12);
  }
  SUBCASE("rank-deficient block gives the minimum-norm consistent solution") {
    MatrixXd a(4, 2);
    a << 1, 2, 2, 4, 0, 1, 1, 0;
    const SamplingSet set({0, 1}, 4);
    VectorXd y(2);
    y << 1.0, 3.0;
    const Measurement meas{y, set, 0.0};
    const VectorXd xr = minimax_reconstruct(SubspaceDictionary(a), meas);
    const MatrixXd sa = restrict_rows(a, set);
    Eigen::JacobiSVD<MatrixXd> svd(sa, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd sinv = svd.singularValues();
    for (Eigen::Index i = 0; i < sinv.size(); ++i) sinv(i) = sinv(i) > 1e-12 ? 1.0 / sinv(i) : 0.0;
    const MatrixXd pinv = svd.matrixV().leftCols(sinv.size()) * sinv.asDiagonal() *
                          svd.matrixU().leftCols(sinv.size()).transpose();
    const VectorXd dprime = pinv * y;
    CHECK((xr - a * dprime).norm() <= 1e-12);
    CHECK((xr - a * (pinv * sa) * dprime).norm() <= 1e-12);
  }
  SUBCASE("zero block is degenerate") {
    MatrixXd a = MatrixXd::Zero(3, 1);
    a(2, 0) = 1.0;
    const Measurement meas{VectorXd::Ones(2), SamplingSet({0, 1}, 3), 0.0};
    CHECK_THROWS_AS(minimax_reconstruct(SubspaceDictionary(a), meas), DegenerateSubspace);
  }
}

TEST_CASE("zero padding") {
  const Measurement meas{VectorXd::Constant(1, 5.0), SamplingSet({1}, 3), 0.0};
  const VectorXd x = ls_reconstruct(meas);
  CHECK(x(0) == 0.0);
  CHECK(x(1) == 5.0);
  CHECK(x(2) == 0.0);
  const VectorXd v = random_matrix(4, 1, 2).col(0);
  CHECK((ls_reconstruct(sample(v, SamplingSet::all(4), 0.0, 0)) - v).norm() == 0.0);
  // Sampling a zero-padded signal on the same set and padding again changes nothing.
  const Measurement again = sample(x, meas.set, 0.0, 0);
  CHECK((ls_reconstruct(again) - x).norm() == 0.0);
}

TEST_CASE("A-optimality objective") {
  CHECK(aopt_objective(SubspaceDictionary::identity(5), SamplingSet({0, 2, 4}, 5)) == doctest::Approx(3.0));
  MatrixXd a(2, 1);
  a << 1, 1;
  CHECK(aopt_objective(a, SamplingSet({0}, 2)) == doctest::Approx(1.0));
  CHECK(aopt_objective(MatrixXd::Ones(3, 1), SamplingSet({0, 1}, 3)) == kInfiniteObjective);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const MatrixXd m = random_matrix(10, 4, s);
    const SamplingSet set({1, 2, 4, 6, 7, 9}, 10);
    // S^T A A^T S is 6x6 of rank 4 here.
    CHECK(aopt_objective(m, set) == kInfiniteObjective);
    const MatrixXd sq = random_matrix(10, 6, s + 50);
    const MatrixXd sb = restrict_rows(sq, set);
    CHECK(aopt_objective(sq, set) == doctest::Approx((sb * sb.transpose()).inverse().trace()).epsilon(1e-10));
  }
}

TEST_CASE("mse in decibels") {
  VectorXd x(2), z = VectorXd::Zero(2);
  x << 1, 0;
  CHECK(mse_db(x, z) == doctest::Approx(-3.0103).epsilon(1e-5));
  CHECK(mse_db(x, x) == kMseFloorDb);
  const VectorXd ones = VectorXd::Ones(7);
  CHECK(mse_db(ones, VectorXd::Zero(7)) == doctest::Approx(0.0));
}

TEST_CASE("noise error bound holds on average") {
  const MatrixXd a = random_matrix(12, 3, 4);
  const SamplingSet set({0, 2, 5, 7, 9, 11}, 12);
  const SubspaceDictionary dict(a);
  const double sigma = 0.05;
  const VectorXd x = a * VectorXd::Ones(3);
  Rng rng(77);
  double acc = 0.0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) acc += (minimax_reconstruct(dict, sample(x, set, sigma, rng)) - x).squaredNorm();
  CHECK(acc / draws <= mse_upper_bound(dict, set, sigma));
}

TEST_CASE("condition number") {
  CHECK(condition_number(MatrixXd::Identity(3, 3)) == doctest::Approx(1.0));
  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 0.5;
  CHECK(condition_number(d) == doctest::Approx(8.0));
  d(1, 1) = 0.0;
  CHECK(condition_number(d) == std::numeric_limits<double>::infinity());
}
