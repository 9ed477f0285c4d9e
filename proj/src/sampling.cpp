#include "gnp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnp/error.hpp"

namespace gnp {

SamplingSet::SamplingSet(std::vector<int> indices, int n_nodes) : indices_(std::move(indices)), n_nodes_(n_nodes) {
  if (n_nodes_ < 0) throw InvalidInput("node count must be nonnegative");
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= n_nodes_))
    throw InvalidInput("sampling index out of range");
}

SamplingSet SamplingSet::from_indicator(const VectorXd& indicator) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < indicator.size(); ++i) {
    if (indicator(i) == 1.0)
      idx.push_back(static_cast<int>(i));
    else if (indicator(i) != 0.0)
      throw InvalidInput("indicator entries must be 0 or 1");
  }
  return SamplingSet(std::move(idx), static_cast<int>(indicator.size()));
}

SamplingSet SamplingSet::all(int n_nodes) {
  std::vector<int> idx(static_cast<std::size_t>(n_nodes));
  std::iota(idx.begin(), idx.end(), 0);
  return SamplingSet(std::move(idx), n_nodes);
}

VectorXd SamplingSet::indicator() const {
  VectorXd m = VectorXd::Zero(n_nodes_);
  for (int i : indices_) m(i) = 1.0;
  return m;
}

bool SamplingSet::contains(int node) const { return std::binary_search(indices_.begin(), indices_.end(), node); }

MatrixXd restrict_rows(const MatrixXd& a, const SamplingSet& set) {
  if (a.rows() != set.n_nodes()) throw InvalidInput("row count does not match the sampling set's node count");
  return a(set.indices(), Eigen::all);
}

VectorXd restrict(const VectorXd& x, const SamplingSet& set) {
  if (x.size() != set.n_nodes()) throw InvalidInput("signal length does not match the sampling set's node count");
  return x(set.indices());
}

Measurement sample(const VectorXd& x, const SamplingSet& set, double sigma, Rng& rng) {
  if (set.empty()) throw InvalidInput("cannot sample on an empty set");
  return {add_noise(restrict(x, set), sigma, rng), set, sigma};
}

Measurement sample(const VectorXd& x, const SamplingSet& set, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return sample(x, set, sigma, rng);
}

VectorXd pinv_solve(const MatrixXd& b, const VectorXd& y) {
  Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = static_cast<double>(std::max(b.rows(), b.cols())) * std::numeric_limits<double>::epsilon() *
                        (s.size() > 0 ? s(0) : 0.0);
  VectorXd uty = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < s.size(); ++i) uty(i) = s(i) > cutoff ? uty(i) / s(i) : 0.0;
  return svd.matrixV() * uty;
}

VectorXd minimax_reconstruct(const SubspaceDictionary& a, const Measurement& meas) {
  if (meas.values.size() != meas.set.size()) throw InvalidInput("measurement length does not match its set");
  const MatrixXd sa = restrict_rows(a.matrix(), meas.set);
  if (sa.cwiseAbs().maxCoeff() == 0.0) throw DegenerateSubspace("S^T A is identically zero");
  return a.matrix() * pinv_solve(sa, meas.values);
}

VectorXd ls_reconstruct(const Measurement& meas) {
  if (meas.values.size() != meas.set.size()) throw InvalidInput("measurement length does not match its set");
  VectorXd x = VectorXd::Zero(meas.set.n_nodes());
  x(meas.set.indices()) = meas.values;
  return x;
}

double aopt_objective(const MatrixXd& a, const SamplingSet& set) {
  if (set.empty()) return kInfiniteObjective;
  const MatrixXd sa = restrict_rows(a, set);
  const MatrixXd gram = sa * sa.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  const double tol = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon() *
                     std::max(ev(ev.size() - 1), 0.0);
  if (!(ev(0) > tol)) return kInfiniteObjective;
  return ev.cwiseInverse().sum();
}

double aopt_objective(const SubspaceDictionary& a, const SamplingSet& set) { return aopt_objective(a.matrix(), set); }

double mse_upper_bound(const SubspaceDictionary& a, const SamplingSet& set, double sigma) {
  const double noise_trace = sigma * sigma * set.size();
  return noise_trace * a.matrix().squaredNorm() * aopt_objective(a, set);
}

double mse_db(const VectorXd& x, const VectorXd& x_rec) {
  if (x.size() != x_rec.size() || x.size() == 0) throw InvalidInput("mse_db needs two vectors of equal nonzero length");
  const double mse = (x_rec - x).squaredNorm() / static_cast<double>(x.size());
  if (!(mse > 0.0)) return kMseFloorDb;
  return std::max(kMseFloorDb, 10.0 * std::log10(mse));
}

double condition_number(const MatrixXd& a) {
  Eigen::BDCSVD<MatrixXd> svd(a);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

}  // namespace gnp
