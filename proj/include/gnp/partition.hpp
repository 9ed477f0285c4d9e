#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gnp/sampling.hpp"

namespace gnp {

/// Ordered disjoint subsets covering every node with sizes in {floor(N/M), ceil(N/M)}.
class Partition {
 public:
  /// Throws InvalidInput unless the subsets satisfy the invariants above.
  explicit Partition(std::vector<SamplingSet> subsets);

  const std::vector<SamplingSet>& subsets() const { return subsets_; }
  const SamplingSet& operator[](std::size_t i) const { return subsets_[i]; }
  int n_subsets() const { return static_cast<int>(subsets_.size()); }
  int n_nodes() const { return subsets_.front().n_nodes(); }
  /// Subset id per node.
  std::vector<int> labels() const;

 private:
  std::vector<SamplingSet> subsets_;
};

/// Assigns ranked nodes to n_subsets cyclically: rank r goes to subset r mod n_subsets.
Partition cyclic_assignment(const std::vector<int>& ranking, int n_subsets);

enum class BinarizeRule { kThresholdHalf, kTopHalf };
enum class ProxMethod { kBisection, kAdmm };

struct PdcaConfig {
  double lipschitz = 1e3;
  double beta = 1.0;
  int max_iters = 5000;
  double tol = 1e-6;
  BinarizeRule binarize = BinarizeRule::kTopHalf;
  ProxMethod prox = ProxMethod::kBisection;
  /// Rescale A so the gradient Lipschitz constant of f equals `lipschitz`.
  /// The binary problem is invariant to the scale of A, the relaxed one is not.
  bool normalize_dictionary = true;
  /// Independent runs; the first starts from m0 (or the default point), the
  /// rest from seeded uniform points in [0,1]^N. The lowest binarized
  /// objective wins, ties going to the earlier run.
  int restarts = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// tr((A^T diag(m) A)^2) + tr((A^T diag(1-m) A)^2).
double objective_f(const VectorXd& m, const MatrixXd& a);
/// 2 Diag(A A^T (2 diag(m) - I) A A^T).
VectorXd grad_f(const VectorXd& m, const MatrixXd& a);
/// beta (1^T (m . m) - 1^T m).
double objective_h(const VectorXd& m, double beta);
/// beta (2 m - 1).
VectorXd grad_h(const VectorXd& m, double beta);

/// Quadratic form of f: with Q = (A A^T) .* (A A^T),
/// f(m) = m^T Q m + (1-m)^T Q (1-m) and grad f(m) = 2 Q (2m - 1).
class SquaredTraceObjective {
 public:
  explicit SquaredTraceObjective(const MatrixXd& a);

  double value(const VectorXd& m) const;
  VectorXd gradient(const VectorXd& m) const;
  /// 4 ||Q||_2, the Lipschitz constant of the gradient.
  double lipschitz() const { return lipschitz_; }
  const MatrixXd& q() const { return q_; }

 private:
  MatrixXd q_;
  double lipschitz_;
};

/// Euclidean projection onto {m in [0,1]^N : 1^T m = target}. The box holds
/// exactly and the sum to within 1e-9.
VectorXd prox_g(const VectorXd& v, double target_card);

/// Same projection through ADMM on the box/hyperplane splitting. Returns the
/// box iterate, so the box holds exactly and the sum only approximately.
VectorXd prox_g_admm(const VectorXd& v, double target_card, double rho = 1.0, int max_iters = 20000,
                     double tol = 1e-12);

struct PdcaTraceRow {
  int iter;
  double f;
  double h;
  double total;  // f + g - h with g = 0 at feasible iterates
};

struct BipartitionResult {
  SamplingSet first;   // ceil(N/2) nodes
  SamplingSet second;  // floor(N/2) nodes
  std::vector<PdcaTraceRow> trace;
  VectorXd relaxed;
  int iterations = 0;
  bool converged = false;
  double lipschitz_bound = 0.0;  // 4 ||Q||_2 of the (possibly rescaled) dictionary
  double final_infeasibility = 0.0;  // 1^T (m . (1 - m))
  /// Squared-trace objective of the binarized split on the caller's dictionary.
  double binary_objective = 0.0;
};

/// 0.5 + Uniform(-0.01, 0.01), seeded.
VectorXd default_initial_point(int n, std::uint64_t seed);

/// Proximal DC iterations m <- prox_g(m - gamma (grad f(m) - grad h(m))),
/// gamma = 1/L, followed by binarization with exact-cardinality repair.
/// The trace and relaxed point belong to the winning restart.
BipartitionResult pdca_bipartition(const SubspaceDictionary& a, const PdcaConfig& cfg,
                                   std::optional<VectorXd> m0 = std::nullopt);

/// Binary indicator from relaxed values; the first subset gets ceil(N/2) nodes.
VectorXd binarize(const VectorXd& relaxed, BinarizeRule rule);

struct BruteForceResult {
  SamplingSet first;
  SamplingSet second;
  double objective;
};

/// Exhaustive search over balanced bipartitions of N <= 14 nodes.
/// exact = true minimizes the trace-inverse sum, otherwise the squared-trace surrogate.
BruteForceResult brute_force_bipartition(const SubspaceDictionary& a, bool exact);

/// Squared-trace surrogate of a binary split: sum_i tr((S_i^T A A^T S_i)^2).
double surrogate_objective(const MatrixXd& a, const SamplingSet& first, const SamplingSet& second);

/// 2^k subsets by recursive bipartitioning on row-restricted dictionaries.
/// Subsets come out in depth-first order.
Partition hierarchical_partition(const SubspaceDictionary& a, int k, const PdcaConfig& cfg);

struct NeumannCheck {
  double exact;   // tr(B^{-1})
  double order1;  // (1/alpha) tr(2I - alpha B)
  double order2;  // (1/alpha) tr(3I - 3 alpha B + (alpha B)^2)
  double alpha;   // 0.9 / ||B||_op
  /// Convergent series alpha tr(sum_{j<=n} (I - alpha B)^j) for n = 1, 2.
  double series1;
  double series2;
};

/// Truncated Neumann expansions of tr(B^{-1}), B = S^T A A^T S.
NeumannCheck neumann_surrogate_check(const SubspaceDictionary& a, const SamplingSet& set);

/// tr(S^T A A^T S).
double subset_gram_trace(const MatrixXd& a, const SamplingSet& set);

}  // namespace gnp
