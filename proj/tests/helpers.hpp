#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gnp/graph.hpp"
#include "gnp/partition.hpp"

namespace testing_helpers {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline VectorXd random_vector(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

/// Central differences of a scalar function of a vector.
inline VectorXd numeric_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-6) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// Central differences of a scalar function of a matrix.
inline MatrixXd numeric_gradient(const std::function<double(const MatrixXd&)>& f, const MatrixXd& x, double h = 1e-6) {
  MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      MatrixXd p = x, m = x;
      p(i, j) += h;
      m(i, j) -= h;
      g(i, j) = (f(p) - f(m)) / (2.0 * h);
    }
  return g;
}

inline double relative_error(const MatrixXd& got, const MatrixXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

/// Dense primal-dual interior point method for
///   min 1/2 x^T P x + q^T x  s.t.  G x <= h,  A x = b.
/// Generic (knows nothing about the feasible set's structure); used as the
/// reference for projections.
inline VectorXd solve_qp(const MatrixXd& P, const VectorXd& q, const MatrixXd& G, const VectorXd& h, const MatrixXd& A,
                         const VectorXd& b, int max_iters = 200, double tol = 1e-12) {
  const Eigen::Index n = P.rows(), m = G.rows(), p = A.rows();
  VectorXd x = VectorXd::Zero(n), s = VectorXd::Ones(m), z = VectorXd::Ones(m), y = VectorXd::Zero(p);
  // Start strictly inside the inequality constraints where possible.
  s = (h - G * x).cwiseMax(1.0);
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd r_dual = P * x + q + G.transpose() * z + A.transpose() * y;
    const VectorXd r_prim_eq = A * x - b;
    const VectorXd r_prim_in = G * x + s - h;
    const double mu = s.dot(z) / static_cast<double>(m);
    if (mu <= 0.0 || (r_dual.norm() < tol && r_prim_eq.norm() < tol && r_prim_in.norm() < tol && mu < tol)) break;

    auto newton = [&](const VectorXd& r_cent) {
      // Eliminate s and z: (P + G^T diag(z/s) G) dx + A^T dy = rhs.
      const VectorXd d = z.cwiseQuotient(s);
      MatrixXd kkt = MatrixXd::Zero(n + p, n + p);
      kkt.topLeftCorner(n, n) = P + G.transpose() * d.asDiagonal() * G;
      kkt.topRightCorner(n, p) = A.transpose();
      kkt.bottomLeftCorner(p, n) = A;
      VectorXd rhs(n + p);
      // ds = -r_prim_in - G dx ; dz = (-r_cent - z.*ds) ./ s
      rhs.head(n) = -r_dual + G.transpose() * (r_cent.cwiseQuotient(s) - d.cwiseProduct(r_prim_in));
      rhs.tail(p) = -r_prim_eq;
      const VectorXd sol = kkt.fullPivLu().solve(rhs);
      VectorXd dx = sol.head(n), dy = sol.tail(p);
      VectorXd ds = -r_prim_in - G * dx;
      VectorXd dz = (-r_cent - z.cwiseProduct(ds)).cwiseQuotient(s);
      return std::make_tuple(dx, dy, ds, dz);
    };
    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      return a;
    };

    // Predictor.
    auto [dx_a, dy_a, ds_a, dz_a] = newton(s.cwiseProduct(z));
    const double a_aff = std::min(max_step(s, ds_a), max_step(z, dz_a));
    const double mu_aff = (s + a_aff * ds_a).dot(z + a_aff * dz_a) / static_cast<double>(m);
    const double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    // Corrector.
    const VectorXd r_cent = s.cwiseProduct(z) + ds_a.cwiseProduct(dz_a) - VectorXd::Constant(m, sigma * mu);
    auto [dx, dy, ds, dz] = newton(r_cent);
    const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
    if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;
    x += a * dx;
    y += a * dy;
    s += a * ds;
    z += a * dz;
  }
  return x;
}

/// Projection onto {m in [0,1]^n : 1^T m = c} through the generic QP solver.
inline VectorXd qp_project_box_hyperplane(const VectorXd& v, double c) {
  const Eigen::Index n = v.size();
  MatrixXd G(2 * n, n);
  G << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  VectorXd h(2 * n);
  h << VectorXd::Ones(n), VectorXd::Zero(n);
  return solve_qp(MatrixXd::Identity(n, n), -v, G, h, MatrixXd::Ones(1, n), VectorXd::Constant(1, c));
}

/// tr((S^T A A^T S)^2) for an index set, by dense evaluation.
inline double dense_surrogate_block(const MatrixXd& a, const std::vector<int>& idx) {
  MatrixXd sa(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) sa.row(static_cast<Eigen::Index>(i)) = a.row(idx[i]);
  const MatrixXd b = sa * sa.transpose();
  return (b * b).trace();
}

/// Exhaustive minimum of the squared-trace surrogate over balanced splits,
/// first subset of size ceil(n/2).
inline double brute_surrogate_min(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int first = (n + 1) / 2;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != first) continue;
    std::vector<int> s1, s2;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? s1 : s2).push_back(i);
    best = std::min(best, dense_surrogate_block(a, s1) + dense_surrogate_block(a, s2));
  }
  return best;
}

inline gnp::Graph path_graph(int n, double w = 1.0) {
  MatrixXd W = MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) W(i, i + 1) = W(i + 1, i) = w;
  return gnp::Graph(W);
}

inline gnp::Graph complete_graph(int n) {
  MatrixXd W = MatrixXd::Ones(n, n);
  W.diagonal().setZero();
  return gnp::Graph(W);
}

/// Two cliques of size k joined by a single edge (k-1, k).
inline gnp::Graph two_cliques(int k) {
  MatrixXd W = MatrixXd::Zero(2 * k, 2 * k);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) W(c * k + i, c * k + j) = 1.0;
  W(k - 1, k) = W(k, k - 1) = 1.0;
  return gnp::Graph(W);
}

}  // namespace testing_helpers
