#include "gnp/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "gnp/error.hpp"

namespace gnp {

std::vector<int> srel_ranking(const Graph& g, std::uint64_t seed, ClusterMerge merge) {
  auto clusters = modularity_clustering(g, seed);
  const VectorXd centrality = eigenvector_centrality(g);
  for (auto& c : clusters)
    std::stable_sort(c.begin(), c.end(), [&](int a, int b) { return centrality(a) > centrality(b); });
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const NodeSet& a, const NodeSet& b) { return a.size() > b.size(); });

  std::vector<int> ranking;
  ranking.reserve(static_cast<std::size_t>(g.size()));
  if (merge == ClusterMerge::kConcatenate) {
    for (const auto& c : clusters) ranking.insert(ranking.end(), c.begin(), c.end());
    return ranking;
  }
  for (std::size_t r = 0; ranking.size() < static_cast<std::size_t>(g.size()); ++r)
    for (const auto& c : clusters)
      if (r < c.size()) ranking.push_back(c[r]);
  return ranking;
}

Partition srel_partition(const Graph& g, int n_subsets, std::uint64_t seed, ClusterMerge merge) {
  if (n_subsets < 2) throw InvalidInput("SRel needs at least two subsets");
  return cyclic_assignment(srel_ranking(g, seed, merge), n_subsets);
}

std::vector<int> sfrob_ranking(const SubspaceDictionary& a, double ridge) {
  if (!(ridge > 0.0)) throw InvalidInput("SFrob ridge must be positive");
  const MatrixXd& mat = a.matrix();
  const int n = a.n_nodes();

  // Adding node v to the selected set raises the size of the K x K Gram block
  // for every candidate alike, and tr((A_S A_S^T + eI_K)^{-1}) differs from
  // tr((A_S^T A_S + eI_M)^{-1}) by (K - M)/e. The greedy choice therefore only
  // needs the M x M inverse C, updated by Sherman-Morrison:
  //   tr(C') = tr(C) - a^T C^2 a / (1 + a^T C a).
  MatrixXd cat = mat.transpose() / ridge;  // C A^T, one column per node
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<int> ranking;
  ranking.reserve(static_cast<std::size_t>(n));
  for (int step = 0; step < n; ++step) {
    int best = -1;
    double best_gain = -1.0;
    for (int v = 0; v < n; ++v) {
      if (taken[static_cast<std::size_t>(v)]) continue;
      const double quad = mat.row(v).dot(cat.col(v));
      const double gain = cat.col(v).squaredNorm() / (1.0 + quad);
      if (gain > best_gain) {
        best_gain = gain;
        best = v;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    ranking.push_back(best);
    const VectorXd ca = cat.col(best);
    const double denom = 1.0 + mat.row(best).dot(ca);
    const Eigen::RowVectorXd ca_at = ca.transpose() * mat.transpose();
    cat.noalias() -= ca * ca_at / denom;
  }
  return ranking;
}

Partition sfrob_partition(const SubspaceDictionary& a, int n_subsets, double ridge) {
  if (n_subsets < 2) throw InvalidInput("SFrob needs at least two subsets");
  return cyclic_assignment(sfrob_ranking(a, ridge), n_subsets);
}

SubspaceDictionary bandlimited_basis(const GftBasis& basis, int bandwidth) {
  const auto n = basis.eigenvectors.cols();
  if (bandwidth < 1 || bandwidth > n) throw InvalidInput("bandwidth must lie in [1, N]");
  return SubspaceDictionary(basis.eigenvectors.leftCols(bandwidth));
}

}  // namespace gnp
