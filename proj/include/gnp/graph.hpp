#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gnp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using NodeSet = std::vector<int>;

/// Weighted undirected graph. Immutable once constructed.
class Graph {
 public:
  /// Validates symmetry (1e-12), zero diagonal and nonnegative finite weights.
  explicit Graph(MatrixXd weights, std::optional<Coords> coords = std::nullopt);

  int size() const { return static_cast<int>(weights_.rows()); }
  const MatrixXd& weights() const { return weights_; }
  const std::optional<Coords>& coords() const { return coords_; }
  VectorXd degrees() const { return weights_.rowwise().sum(); }
  int edge_count() const;

 private:
  MatrixXd weights_;
  std::optional<Coords> coords_;
};

/// Laplacian eigendecomposition; eigenvalues ascending, columns orthonormal.
struct GftBasis {
  VectorXd eigenvalues;
  MatrixXd eigenvectors;
};

/// Union of directed k-NN edges under Euclidean distance, weight exp(-d^2).
Graph build_knn_graph(const Coords& coords, std::span<const int> k_per_node);

/// Same construction from a precomputed distance matrix; weight exp(-(d/scale)^2).
Graph build_knn_graph(const MatrixXd& distances, std::span<const int> k_per_node,
                      double scale, std::optional<Coords> coords = std::nullopt);

/// Uniform nodes in the unit square, per-node k drawn uniformly from [k_min, k_max].
Graph random_sensor_graph(int n_nodes, int k_min, int k_max, std::uint64_t seed);

MatrixXd laplacian(const Graph& g);

/// Deterministic: the first entry with |value| > 1e-8 of each eigenvector is positive.
GftBasis gft_basis(const Graph& g);

/// Connected components via union-find, each sorted, ordered by smallest node.
std::vector<NodeSet> connected_components(const Graph& g);

/// k-means (seeded, 10 restarts, best inertia) on rows of the first
/// n_clusters Laplacian eigenvectors.
std::vector<NodeSet> spectral_clustering(const Graph& g, int n_clusters, std::uint64_t seed);
std::vector<NodeSet> spectral_clustering(const Graph& g, const GftBasis& basis, int n_clusters,
                                         std::uint64_t seed);

/// Greedy agglomerative (CNM) modularity maximization. Merges are only
/// accepted while they strictly increase modularity. The seed only breaks
/// exact ties between equally good merges.
std::vector<NodeSet> modularity_clustering(const Graph& g, std::uint64_t seed);

/// Newman modularity of a node partition.
double modularity(const Graph& g, const std::vector<NodeSet>& clusters);

/// Perron vector of W; unit l2 norm, nonnegative.
/// Disconnected graphs are handled component-wise, each component scaled by
/// its own spectral radius before the global normalization.
VectorXd eigenvector_centrality(const Graph& g);

/// Nodes within `hops` edges of any node whose neighborhood spans two labels.
std::vector<int> boundary_nodes(const Graph& g, std::span<const int> labels, int hops);

/// Haversine great-circle distance in kilometers.
double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

inline constexpr double kEarthRadiusKm = 6371.0088;

}  // namespace gnp
