#include "gnp/signal_models.hpp"

#include <cmath>

#include "gnp/error.hpp"

namespace gnp {

SubspaceDictionary::SubspaceDictionary(MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.size() == 0) throw InvalidInput("subspace dictionary must be nonempty");
  if (!matrix_.allFinite()) throw InvalidInput("subspace dictionary has non-finite entries");
  for (Eigen::Index c = 0; c < matrix_.cols(); ++c)
    if (matrix_.col(c).cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("subspace dictionary has an all-zero column");
}

void SignalTrace::validate() const {
  if (signals.cols() < 1 || signals.rows() < 1) throw InvalidInput("signal trace must hold at least one signal");
  if (!subspaces.empty() && static_cast<int>(subspaces.size()) != length())
    throw InvalidInput("signal trace subspace count must equal its length");
  for (const auto& a : subspaces)
    if (a.n_nodes() != n_nodes()) throw InvalidInput("trace subspace row count must equal node count");
}

VectorXd gaussian_vector(int n, double mean, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(mean, stddev);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

MatrixXd heat_kernel(const GftBasis& basis, double alpha) {
  const VectorXd response = (-alpha * basis.eigenvalues.array()).exp();
  return basis.eigenvectors * response.asDiagonal() * basis.eigenvectors.transpose();
}

GeneratedSignal gen_hd(const GftBasis& basis, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw InvalidInput("heat diffusion alpha must be nonnegative");
  Rng rng(seed);
  const int n = static_cast<int>(basis.eigenvalues.size());
  MatrixXd a = heat_kernel(basis, alpha);
  const VectorXd d = gaussian_vector(n, 1.0, 1.0, rng);
  VectorXd x = a * d;
  return {SubspaceDictionary(std::move(a)), std::move(x)};
}

MatrixXd cluster_indicators(const std::vector<NodeSet>& clusters, int n) {
  MatrixXd ind = MatrixXd::Zero(n, static_cast<Eigen::Index>(clusters.size()));
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int i : clusters[c]) {
      if (i < 0 || i >= n) throw InvalidInput("cluster node index out of range");
      if (ind.row(i).sum() != 0.0) throw InvalidInput("clusters overlap");
      ind(i, static_cast<Eigen::Index>(c)) = 1.0;
    }
  }
  for (int i = 0; i < n; ++i)
    if (ind.row(i).sum() != 1.0) throw InvalidInput("clusters do not cover every node");
  return ind;
}

GeneratedSignal gen_pws(const GftBasis& basis, const std::vector<NodeSet>& clusters, std::uint64_t seed,
                        int n_smooth) {
  const int n = static_cast<int>(basis.eigenvalues.size());
  if (n_smooth < 1 || n_smooth >= n) throw InvalidInput("PWS smooth block must use 1..N-1 eigenvectors");
  const MatrixXd indicators = cluster_indicators(clusters, n);
  const auto n_clusters = indicators.cols();

  MatrixXd a(n, n_smooth + n_clusters);
  a.leftCols(n_smooth) = basis.eigenvectors.middleCols(1, n_smooth);
  a.rightCols(n_clusters) = indicators;

  Rng rng(seed);
  const VectorXd d1 = gaussian_vector(n_smooth, 1.0, 1.0, rng);
  const VectorXd d2 = gaussian_vector(static_cast<int>(n_clusters), 0.0, std::sqrt(5.0), rng);
  VectorXd x = a.leftCols(n_smooth) * d1 + indicators * d2;
  return {SubspaceDictionary(std::move(a)), std::move(x)};
}

TvPwsCoefficients draw_tv_pws_coefficients(int n_nodes, int n_clusters, std::uint64_t seed) {
  Rng rng(seed);
  TvPwsCoefficients c;
  c.smooth = gaussian_vector(n_nodes, 1.0, 1.0, rng);
  c.offsets = gaussian_vector(n_clusters, 0.0, std::sqrt(5.0), rng);
  return c;
}

GeneratedSignal gen_tv_pws(const GftBasis& basis, int t, const std::vector<NodeSet>& clusters_t,
                           std::uint64_t seed) {
  if (t < 0) throw InvalidInput("time index must be nonnegative");
  const int n = static_cast<int>(basis.eigenvalues.size());
  const MatrixXd indicators = cluster_indicators(clusters_t, n);
  const auto coeffs = draw_tv_pws_coefficients(n, static_cast<int>(indicators.cols()), seed);

  MatrixXd a(n, n + indicators.cols());
  a.leftCols(n) = heat_kernel(basis, tv_alpha(t));
  a.rightCols(indicators.cols()) = indicators;
  VectorXd x = a.leftCols(n) * coeffs.smooth + indicators * coeffs.offsets;
  return {SubspaceDictionary(std::move(a)), std::move(x)};
}

std::vector<NodeSet> labels_to_clusters(std::span<const int> labels, int n_clusters) {
  std::vector<NodeSet> clusters(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    const int lab = labels[static_cast<std::size_t>(i)];
    if (lab < 0 || lab >= n_clusters) throw InvalidInput("cluster label out of range");
    clusters[static_cast<std::size_t>(lab)].push_back(i);
  }
  return clusters;
}

std::vector<std::vector<int>> drift_clusters(const Graph& g, const std::vector<NodeSet>& clusters0, int length,
                                             double p_switch, std::uint64_t seed, int hops) {
  const int n = g.size();
  if (length < 1) throw InvalidInput("drift length must be positive");
  if (p_switch < 0.0 || p_switch > 1.0) throw InvalidInput("switch probability must lie in [0, 1]");
  const int k = static_cast<int>(clusters0.size());
  if (k < 2) throw InvalidInput("cluster drift needs at least two clusters");
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int c = 0; c < k; ++c)
    for (int i : clusters0[static_cast<std::size_t>(c)]) labels[static_cast<std::size_t>(i)] = c;
  for (int lab : labels)
    if (lab < 0) throw InvalidInput("initial clusters do not cover every node");

  const std::vector<int> eligible = boundary_nodes(g, labels, hops);
  Rng rng(seed);
  std::bernoulli_distribution flip(p_switch);
  std::uniform_int_distribution<int> other(1, k - 1);

  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(length));
  out.push_back(labels);
  for (int t = 1; t < length; ++t) {
    for (int i : eligible) {
      if (!flip(rng)) continue;
      auto& lab = labels[static_cast<std::size_t>(i)];
      lab = (lab + other(rng)) % k;
    }
    out.push_back(labels);
  }
  return out;
}

SignalTrace generate_tv_pws_trace(const Graph& g, const GftBasis& basis, const std::vector<NodeSet>& clusters0,
                                  int length, double p_switch, std::uint64_t seed) {
  const int n = g.size();
  const int k = static_cast<int>(clusters0.size());
  // Independent streams for the drift and the coefficients.
  const auto labels = drift_clusters(g, clusters0, length, p_switch, seed ^ 0x9e3779b97f4a7c15ULL);
  SignalTrace trace;
  trace.signals.resize(n, length);
  trace.subspaces.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    auto gen = gen_tv_pws(basis, t, labels_to_clusters(labels[static_cast<std::size_t>(t)], k), seed);
    trace.signals.col(t) = gen.signal;
    trace.subspaces.push_back(std::move(gen.dictionary));
  }
  return trace;
}

VectorXd add_noise(const VectorXd& x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidInput("noise sigma must be nonnegative");
  if (sigma == 0.0) return x;
  return x + gaussian_vector(static_cast<int>(x.size()), 0.0, sigma, rng);
}

VectorXd add_noise(const VectorXd& x, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return add_noise(x, sigma, rng);
}

}  // namespace gnp
