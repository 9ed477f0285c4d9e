#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gnp/graph.hpp"

namespace gnp {

/// Generation transform A of a signal subspace {A d}. N x M, M <= N is not
/// enforced because the time-varying PWS model stacks an N x N block with
/// cluster indicators.
class SubspaceDictionary {
 public:
  /// Rejects empty matrices, non-finite entries and all-zero columns.
  explicit SubspaceDictionary(MatrixXd matrix);

  const MatrixXd& matrix() const { return matrix_; }
  int n_nodes() const { return static_cast<int>(matrix_.rows()); }
  int n_atoms() const { return static_cast<int>(matrix_.cols()); }

  static SubspaceDictionary identity(int n) { return SubspaceDictionary(MatrixXd::Identity(n, n)); }

 private:
  MatrixXd matrix_;
};

struct GeneratedSignal {
  SubspaceDictionary dictionary;
  VectorXd signal;
};

/// Signals stored column-wise, optionally with the ground-truth subspace per step.
struct SignalTrace {
  MatrixXd signals;
  std::vector<SubspaceDictionary> subspaces;
  double noise_sigma = 0.0;

  int n_nodes() const { return static_cast<int>(signals.rows()); }
  int length() const { return static_cast<int>(signals.cols()); }
  bool has_subspaces() const { return !subspaces.empty(); }
  /// Throws InvalidInput if T < 1 or the subspace list has the wrong length.
  void validate() const;
};

using Rng = std::mt19937_64;

VectorXd gaussian_vector(int n, double mean, double stddev, Rng& rng);

/// U exp(-alpha Lambda) U^T.
MatrixXd heat_kernel(const GftBasis& basis, double alpha);

/// Heat-diffusion signal: A = U exp(-alpha Lambda) U^T, x = A d, d ~ N(1, I).
GeneratedSignal gen_hd(const GftBasis& basis, double alpha, std::uint64_t seed);

/// Piecewise-smooth signal: A = [u_1..u_32 | 1_T1 1_T2 1_T3], d1 ~ N(1, I),
/// d2 ~ N(0, 5 I). u_0 (the constant eigenvector) is skipped.
GeneratedSignal gen_pws(const GftBasis& basis, const std::vector<NodeSet>& clusters, std::uint64_t seed,
                        int n_smooth = 32);

/// Cluster indicator columns; throws if the clusters do not partition [0, n).
MatrixXd cluster_indicators(const std::vector<NodeSet>& clusters, int n);

/// Heat exponent of the time-varying model: 2 + t / 8.
inline double tv_alpha(int t) { return 2.0 + static_cast<double>(t) / 8.0; }

/// Coefficients shared by every step of one time-varying PWS run.
struct TvPwsCoefficients {
  VectorXd smooth;   // d1 ~ N(1, I), length N
  VectorXd offsets;  // d2 ~ N(0, 5 I), one per cluster
};

TvPwsCoefficients draw_tv_pws_coefficients(int n_nodes, int n_clusters, std::uint64_t seed);

/// A_t = [U exp(-alpha(t) Lambda) U^T, 1_T1(t) 1_T2(t) 1_T3(t)], x_t = A_t [d1; d2].
/// d1 and d2 come from the seed, so every t of a run shares them.
GeneratedSignal gen_tv_pws(const GftBasis& basis, int t, const std::vector<NodeSet>& clusters_t, std::uint64_t seed);

/// Cluster labels for t = 0..T-1. Nodes within `hops` of the t = 0 cluster
/// boundaries are, at each t >= 1 and with probability `p_switch`, moved to
/// one of the other clusters chosen uniformly. Row t holds the labels at t.
std::vector<std::vector<int>> drift_clusters(const Graph& g, const std::vector<NodeSet>& clusters0, int length,
                                             double p_switch, std::uint64_t seed, int hops = 2);

std::vector<NodeSet> labels_to_clusters(std::span<const int> labels, int n_clusters);

/// Full time-varying PWS trace with ground-truth subspaces, noiseless.
SignalTrace generate_tv_pws_trace(const Graph& g, const GftBasis& basis, const std::vector<NodeSet>& clusters0,
                                  int length, double p_switch, std::uint64_t seed);

/// x + N(0, sigma^2 I).
VectorXd add_noise(const VectorXd& x, double sigma, std::uint64_t seed);
VectorXd add_noise(const VectorXd& x, double sigma, Rng& rng);

}  // namespace gnp
