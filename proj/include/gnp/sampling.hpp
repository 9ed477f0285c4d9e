#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "gnp/signal_models.hpp"

namespace gnp {

/// A subset of the node set, held both as sorted indices and as a 0/1 indicator.
class SamplingSet {
 public:
  SamplingSet() = default;
  /// Indices are sorted and deduplicated; out-of-range indices throw.
  SamplingSet(std::vector<int> indices, int n_nodes);
  static SamplingSet from_indicator(const VectorXd& indicator);
  static SamplingSet all(int n_nodes);

  const std::vector<int>& indices() const { return indices_; }
  VectorXd indicator() const;
  int n_nodes() const { return n_nodes_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(int node) const;

  friend bool operator==(const SamplingSet&, const SamplingSet&) = default;

 private:
  std::vector<int> indices_;
  int n_nodes_ = 0;
};

struct Measurement {
  VectorXd values;
  SamplingSet set;
  double sigma = 0.0;
};

/// Rows of A (or entries of x) restricted to the set, i.e. S^T A.
MatrixXd restrict_rows(const MatrixXd& a, const SamplingSet& set);
VectorXd restrict(const VectorXd& x, const SamplingSet& set);

Measurement sample(const VectorXd& x, const SamplingSet& set, double sigma, std::uint64_t seed);
Measurement sample(const VectorXd& x, const SamplingSet& set, double sigma, Rng& rng);

/// Pseudo-inverse of B applied to y. Singular values at or below
/// max(rows, cols) * eps * sigma_max are treated as zero.
VectorXd pinv_solve(const MatrixXd& b, const VectorXd& y);

/// x~ = A (S^T A)^+ y. Throws DegenerateSubspace if S^T A is all zero.
VectorXd minimax_reconstruct(const SubspaceDictionary& a, const Measurement& meas);

/// Zero padding: S (S^T S)^+ y.
VectorXd ls_reconstruct(const Measurement& meas);

inline constexpr double kInfiniteObjective = std::numeric_limits<double>::infinity();

/// tr((S^T A A^T S)^{-1}); +inf when the Gram block is numerically singular.
double aopt_objective(const SubspaceDictionary& a, const SamplingSet& set);
double aopt_objective(const MatrixXd& a, const SamplingSet& set);

/// tr(Gamma) tr(A^T A) tr((S^T A A^T S)^{-1}) for white noise Gamma = sigma^2 I.
double mse_upper_bound(const SubspaceDictionary& a, const SamplingSet& set, double sigma);

inline constexpr double kMseFloorDb = -320.0;

/// 10 log10(||x~ - x||^2 / N), floored at -320 dB.
double mse_db(const VectorXd& x, const VectorXd& x_rec);

/// sigma_max / sigma_min of the matrix; +inf if rank deficient.
double condition_number(const MatrixXd& a);

}  // namespace gnp
