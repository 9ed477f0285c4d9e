#pragma once

#include <cstdint>
#include <vector>

#include "gnp/partition.hpp"

namespace gnp {

/// How the per-cluster rankings of SRel are merged into one list.
enum class ClusterMerge { kRoundRobin, kConcatenate };

/// Modularity clusters, each ranked by eigenvector centrality, merged across
/// clusters (largest cluster first) and dealt cyclically to the subsets.
std::vector<int> srel_ranking(const Graph& g, std::uint64_t seed, ClusterMerge merge = ClusterMerge::kRoundRobin);
Partition srel_partition(const Graph& g, int n_subsets, std::uint64_t seed,
                         ClusterMerge merge = ClusterMerge::kRoundRobin);

inline constexpr double kSfrobRidge = 1e-8;

/// Greedy A-optimal ranking: each step adds the node that most decreases
/// tr((S^T A A^T S + ridge I)^{-1}). Ties go to the lower node index.
std::vector<int> sfrob_ranking(const SubspaceDictionary& a, double ridge = kSfrobRidge);
Partition sfrob_partition(const SubspaceDictionary& a, int n_subsets, double ridge = kSfrobRidge);

/// [u_0 .. u_{B-1}]: the B lowest-frequency Laplacian eigenvectors.
SubspaceDictionary bandlimited_basis(const GftBasis& basis, int bandwidth);

}  // namespace gnp
