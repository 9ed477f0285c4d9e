#include "gnp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "gnp/error.hpp"

namespace gnp {

Graph::Graph(MatrixXd weights, std::optional<Coords> coords)
    : weights_(std::move(weights)), coords_(std::move(coords)) {
  const auto n = weights_.rows();
  if (n < 1 || weights_.cols() != n) throw InvalidInput("graph weights must be a nonempty square matrix");
  if (coords_ && coords_->rows() != n) throw InvalidInput("coordinate count does not match node count");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) throw InvalidInput("graph weights must have a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0) throw InvalidInput("graph weights must be finite and nonnegative");
      if (std::abs(w - weights_(j, i)) > 1e-12) throw InvalidInput("graph weights must be symmetric");
    }
  }
}

int Graph::edge_count() const {
  int count = 0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if (weights_(i, j) > 0.0) ++count;
  return count;
}

Graph build_knn_graph(const MatrixXd& distances, std::span<const int> k_per_node, double scale,
                      std::optional<Coords> coords) {
  const int n = static_cast<int>(distances.rows());
  if (n < 2) throw InvalidInput("k-NN graph needs at least two nodes");
  if (distances.cols() != n || static_cast<int>(k_per_node.size()) != n)
    throw InvalidInput("distance matrix and k list must match the node count");
  if (!(scale > 0.0)) throw InvalidInput("k-NN weight scale must be positive");

  MatrixXd w = MatrixXd::Zero(n, n);
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    const int k = k_per_node[static_cast<std::size_t>(i)];
    if (k < 1 || k >= n) throw InvalidInput("each k must satisfy 1 <= k < N");
    order.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      const double da = distances(i, a), db = distances(i, b);
      return da < db || (da == db && a < b);
    });
    for (int r = 0; r < k; ++r) {
      const int j = order[static_cast<std::size_t>(r)];
      const double d = distances(i, j) / scale;
      const double weight = std::exp(-d * d);
      w(i, j) = weight;
      w(j, i) = weight;
    }
  }
  return Graph(std::move(w), std::move(coords));
}

Graph build_knn_graph(const Coords& coords, std::span<const int> k_per_node) {
  const auto n = coords.rows();
  MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = (coords.row(i) - coords.row(j)).norm();
  return build_knn_graph(dist, k_per_node, 1.0, coords);
}

Graph random_sensor_graph(int n_nodes, int k_min, int k_max, std::uint64_t seed) {
  if (n_nodes < 2 || k_min < 1 || k_max < k_min || k_max >= n_nodes)
    throw InvalidInput("invalid random sensor graph parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> kdist(k_min, k_max);
  Coords coords(n_nodes, 2);
  std::vector<int> ks(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    coords(i, 0) = unit(rng);
    coords(i, 1) = unit(rng);
  }
  for (auto& k : ks) k = kdist(rng);
  return build_knn_graph(coords, ks);
}

MatrixXd laplacian(const Graph& g) {
  MatrixXd l = -g.weights();
  l.diagonal() = g.degrees();
  return l;
}

GftBasis gft_basis(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(laplacian(g));
  if (solver.info() != Eigen::Success) throw NumericalFailure("Laplacian eigendecomposition did not converge");
  GftBasis basis{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
    auto col = basis.eigenvectors.col(c);
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) > 1e-8) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
  }
  return basis;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

std::vector<NodeSet> group_by_label(std::span<const int> labels) {
  std::vector<NodeSet> groups;
  std::vector<int> slot;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    const int lab = labels[static_cast<std::size_t>(i)];
    if (lab >= static_cast<int>(slot.size())) slot.resize(static_cast<std::size_t>(lab) + 1, -1);
    auto& s = slot[static_cast<std::size_t>(lab)];
    if (s < 0) {
      s = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(s)].push_back(i);
  }
  return groups;
}

// Lloyd iterations from a k-means++ seeding. Returns inertia, or +inf when a
// cluster empties out.
double kmeans_once(const MatrixXd& points, int k, std::mt19937_64& rng, std::vector<int>& labels) {
  const auto n = points.rows();
  MatrixXd centers(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));
  VectorXd d2(n);
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int p = 0; p < c; ++p) best = std::min(best, (points.row(i) - centers.row(p)).squaredNorm());
      d2(i) = best;
    }
    const double total = d2.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2(i);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(chosen);
  }

  labels.assign(static_cast<std::size_t>(n), 0);
  double inertia = 0.0;
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = iter == 0;
    inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist = (points.row(i) - centers.row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          best_c = c;
        }
      }
      inertia += best;
      if (labels[static_cast<std::size_t>(i)] != best_c) changed = true;
      labels[static_cast<std::size_t>(i)] = best_c;
    }
    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) return std::numeric_limits<double>::infinity();
      centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
    if (!changed) break;
  }
  return inertia;
}

}  // namespace

std::vector<NodeSet> connected_components(const Graph& g) {
  UnionFind uf(g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.weights()(i, j) > 0.0) uf.unite(i, j);
  std::vector<int> labels(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) labels[static_cast<std::size_t>(i)] = uf.find(i);
  return group_by_label(labels);
}

std::vector<NodeSet> spectral_clustering(const Graph& g, int n_clusters, std::uint64_t seed) {
  return spectral_clustering(g, gft_basis(g), n_clusters, seed);
}

std::vector<NodeSet> spectral_clustering(const Graph& g, const GftBasis& basis, int n_clusters,
                                         std::uint64_t seed) {
  const int n = g.size();
  if (n_clusters < 1 || n_clusters > n) throw InvalidInput("n_clusters must lie in [1, N]");
  if (n_clusters == 1) {
    NodeSet all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }
  const MatrixXd embedding = basis.eigenvectors.leftCols(n_clusters);

  constexpr int kRestarts = 10;
  constexpr int kRetryBudget = 20;
  std::mt19937_64 rng(seed);
  std::vector<int> best_labels, labels;
  double best_inertia = std::numeric_limits<double>::infinity();
  int successes = 0;
  for (int attempt = 0; attempt < kRestarts + kRetryBudget && successes < kRestarts; ++attempt) {
    const double inertia = kmeans_once(embedding, n_clusters, rng, labels);
    if (!std::isfinite(inertia)) continue;
    ++successes;
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  if (best_labels.empty()) throw NumericalFailure("k-means kept producing empty clusters");
  return group_by_label(best_labels);
}

double modularity(const Graph& g, const std::vector<NodeSet>& clusters) {
  const MatrixXd& w = g.weights();
  const VectorXd deg = g.degrees();
  const double two_m = deg.sum();
  if (two_m <= 0.0) throw InvalidInput("modularity is undefined on an edgeless graph");
  double q = 0.0;
  for (const auto& c : clusters) {
    double inside = 0.0, degree = 0.0;
    for (int i : c) {
      degree += deg(i);
      for (int j : c) inside += w(i, j);
    }
    q += inside / two_m - (degree / two_m) * (degree / two_m);
  }
  return q;
}

std::vector<NodeSet> modularity_clustering(const Graph& g, std::uint64_t seed) {
  const int n = g.size();
  const VectorXd deg = g.degrees();
  const double two_m = deg.sum();
  if (two_m <= 0.0) throw InvalidInput("modularity clustering needs at least one edge");

  // e(i, j): fraction of edge endpoints running between communities i and j.
  MatrixXd e = g.weights() / two_m;
  VectorXd a = deg / two_m;
  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  std::vector<NodeSet> members(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(i)] = {i};

  std::mt19937_64 rng(seed);
  std::vector<double> priority(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& p : priority) p = u(rng);

  while (true) {
    constexpr double kTieTol = 1e-15;
    double best_gain = 0.0;
    int bi = -1, bj = -1;
    double best_prio = -1.0;
    for (int i = 0; i < n; ++i) {
      if (!alive[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!alive[static_cast<std::size_t>(j)] || e(i, j) <= 0.0) continue;
        const double gain = 2.0 * (e(i, j) - a(i) * a(j));
        const double prio = priority[static_cast<std::size_t>(i)] + priority[static_cast<std::size_t>(j)];
        if (gain <= kTieTol) continue;
        const bool better = bi < 0 || gain > best_gain + kTieTol ||
                            (gain >= best_gain - kTieTol && prio > best_prio);
        if (better) {
          best_gain = gain;
          bi = i;
          bj = j;
          best_prio = prio;
        }
      }
    }
    if (bi < 0) break;
    e.row(bi) += e.row(bj);
    e.col(bi) += e.col(bj);
    e(bi, bi) = 0.0;
    e.row(bj).setZero();
    e.col(bj).setZero();
    a(bi) += a(bj);
    a(bj) = 0.0;
    alive[static_cast<std::size_t>(bj)] = false;
    auto& dst = members[static_cast<std::size_t>(bi)];
    auto& src = members[static_cast<std::size_t>(bj)];
    dst.insert(dst.end(), src.begin(), src.end());
    src.clear();
  }

  std::vector<NodeSet> clusters;
  for (int i = 0; i < n; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    auto c = members[static_cast<std::size_t>(i)];
    std::sort(c.begin(), c.end());
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(), [](const NodeSet& x, const NodeSet& y) { return x.front() < y.front(); });
  return clusters;
}

VectorXd eigenvector_centrality(const Graph& g) {
  const int n = g.size();
  VectorXd out = VectorXd::Zero(n);
  for (const auto& comp : connected_components(g)) {
    const int k = static_cast<int>(comp.size());
    if (k == 1) continue;
    MatrixXd w(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        w(i, j) = g.weights()(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(w);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigenvector centrality: eigensolver failed");
    const double radius = es.eigenvalues()(k - 1);
    VectorXd c = es.eigenvectors().col(k - 1);
    if (c.sum() < 0.0) c = -c;
    for (int i = 0; i < k; ++i) out(comp[static_cast<std::size_t>(i)]) = std::max(0.0, c(i)) * radius;
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

std::vector<int> boundary_nodes(const Graph& g, std::span<const int> labels, int hops) {
  const int n = g.size();
  if (static_cast<int>(labels.size()) != n) throw InvalidInput("label count does not match node count");
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::queue<int> frontier;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.weights()(i, j) > 0.0 && labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
        dist[static_cast<std::size_t>(i)] = 1;
        frontier.push(i);
        break;
      }
    }
  }
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    if (dist[static_cast<std::size_t>(i)] >= hops) continue;
    for (int j = 0; j < n; ++j) {
      if (g.weights()(i, j) > 0.0 && dist[static_cast<std::size_t>(j)] < 0) {
        dist[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(i)] + 1;
        frontier.push(j);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (dist[static_cast<std::size_t>(i)] > 0) out.push_back(i);
  return out;
}

double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double dlat = (lat2_deg - lat1_deg) * kDeg;
  const double dlon = (lon2_deg - lon1_deg) * kDeg;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1_deg * kDeg) * std::cos(lat2_deg * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

}  // namespace gnp
