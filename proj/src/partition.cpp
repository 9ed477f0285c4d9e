#include "gnp/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gnp/error.hpp"
#include "gnp/log.hpp"
#include "gnp/rng.hpp"

namespace gnp {

Partition::Partition(std::vector<SamplingSet> subsets) : subsets_(std::move(subsets)) {
  if (subsets_.empty()) throw InvalidInput("partition needs at least one subset");
  const int n = subsets_.front().n_nodes();
  const int m = static_cast<int>(subsets_.size());
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& s : subsets_) {
    if (s.n_nodes() != n) throw InvalidInput("partition subsets disagree on the node count");
    const int lo = n / m, hi = (n + m - 1) / m;
    if (s.size() < lo || s.size() > hi) throw InvalidInput("partition subsets are not balanced");
    for (int i : s.indices())
      if (seen[static_cast<std::size_t>(i)]++) throw InvalidInput("partition subsets overlap");
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InvalidInput("partition does not cover every node");
}

std::vector<int> Partition::labels() const {
  std::vector<int> out(static_cast<std::size_t>(n_nodes()), -1);
  for (int s = 0; s < n_subsets(); ++s)
    for (int i : subsets_[static_cast<std::size_t>(s)].indices()) out[static_cast<std::size_t>(i)] = s;
  return out;
}

Partition cyclic_assignment(const std::vector<int>& ranking, int n_subsets) {
  const int n = static_cast<int>(ranking.size());
  if (n_subsets < 1 || n_subsets > n) throw InvalidInput("subset count must lie in [1, N]");
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_subsets));
  for (int r = 0; r < n; ++r) groups[static_cast<std::size_t>(r % n_subsets)].push_back(ranking[static_cast<std::size_t>(r)]);
  std::vector<SamplingSet> subsets;
  subsets.reserve(groups.size());
  for (auto& g : groups) subsets.emplace_back(std::move(g), n);
  return Partition(std::move(subsets));
}

void PdcaConfig::validate() const {
  if (!(lipschitz > 0.0)) throw InvalidInput("PDCA Lipschitz constant must be positive");
  if (!(beta > 0.0)) throw InvalidInput("PDCA beta must be positive");
  if (max_iters < 1) throw InvalidInput("PDCA max_iters must be positive");
  if (!(tol > 0.0)) throw InvalidInput("PDCA tolerance must be positive");
  if (restarts < 1) throw InvalidInput("PDCA restarts must be positive");
}

double objective_f(const VectorXd& m, const MatrixXd& a) { return SquaredTraceObjective(a).value(m); }

VectorXd grad_f(const VectorXd& m, const MatrixXd& a) { return SquaredTraceObjective(a).gradient(m); }

double objective_h(const VectorXd& m, double beta) { return beta * (m.squaredNorm() - m.sum()); }

VectorXd grad_h(const VectorXd& m, double beta) { return beta * (2.0 * m.array() - 1.0).matrix(); }

SquaredTraceObjective::SquaredTraceObjective(const MatrixXd& a) {
  const MatrixXd p = a * a.transpose();
  q_ = p.cwiseProduct(p);
  if (q_.size() == 0) {
    lipschitz_ = 0.0;
    return;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q_, Eigen::EigenvaluesOnly);
  lipschitz_ = 4.0 * std::max(0.0, eig.eigenvalues().maxCoeff());
}

double SquaredTraceObjective::value(const VectorXd& m) const {
  if (m.size() != q_.rows()) throw InvalidInput("indicator length does not match the dictionary");
  const VectorXd c = VectorXd::Ones(m.size()) - m;
  return m.dot(q_ * m) + c.dot(q_ * c);
}

VectorXd SquaredTraceObjective::gradient(const VectorXd& m) const {
  if (m.size() != q_.rows()) throw InvalidInput("indicator length does not match the dictionary");
  return 2.0 * (q_ * (2.0 * m.array() - 1.0).matrix());
}

namespace {

double clipped_sum(const VectorXd& v, double tau) { return (v.array() - tau).cwiseMax(0.0).cwiseMin(1.0).sum(); }

void check_target(const VectorXd& v, double target_card) {
  const auto n = static_cast<double>(v.size());
  if (!(target_card > 0.0 && target_card < n)) throw InvalidInput("target cardinality must lie in (0, N)");
}

}  // namespace

VectorXd prox_g(const VectorXd& v, double target_card) {
  check_target(v, target_card);
  double lo = v.minCoeff() - 1.0;  // clipped sum = N here
  double hi = v.maxCoeff();        // clipped sum = 0 here
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (clipped_sum(v, mid) > target_card)
      lo = mid;
    else
      hi = mid;
  }
  double tau = 0.5 * (lo + hi);

  // The sum is affine in tau between breakpoints: solve it exactly on the
  // active pattern found by bisection.
  int ones = 0, free = 0;
  double free_sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = v(i) - tau;
    if (r >= 1.0)
      ++ones;
    else if (r > 0.0) {
      ++free;
      free_sum += v(i);
    }
  }
  if (free > 0) {
    const double exact_tau = (free_sum - (target_card - ones)) / free;
    if (std::abs(clipped_sum(v, exact_tau) - target_card) <= std::abs(clipped_sum(v, tau) - target_card))
      tau = exact_tau;
  }
  VectorXd m = (v.array() - tau).cwiseMax(0.0).cwiseMin(1.0);
  if (std::abs(m.sum() - target_card) > 1e-9) {
    std::ostringstream msg;
    msg << "projection missed the cardinality target by " << m.sum() - target_card;
    throw NumericalFailure(msg.str());
  }
  return m;
}

VectorXd prox_g_admm(const VectorXd& v, double target_card, double rho, int max_iters, double tol) {
  check_target(v, target_card);
  const auto n = static_cast<double>(v.size());
  VectorXd z = v.cwiseMax(0.0).cwiseMin(1.0);
  VectorXd u = VectorXd::Zero(v.size());
  VectorXd x(v.size());
  for (int it = 0; it < max_iters; ++it) {
    // x: argmin 1/2||x - v||^2 + rho/2 ||x - z + u||^2 on the hyperplane.
    x = (v + rho * (z - u)) / (1.0 + rho);
    x.array() += (target_card - x.sum()) / n;
    const VectorXd z_prev = z;
    z = (x + u).cwiseMax(0.0).cwiseMin(1.0);
    u += x - z;
    const double primal = (x - z).norm();
    const double dual = rho * (z - z_prev).norm();
    if (primal <= tol && dual <= tol) break;
  }
  return z;
}

VectorXd default_initial_point(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  VectorXd m(n);
  for (int i = 0; i < n; ++i) m(i) = 0.5 + u(rng);
  return m;
}

VectorXd binarize(const VectorXd& relaxed, BinarizeRule rule) {
  const int n = static_cast<int>(relaxed.size());
  const int want = (n + 1) / 2;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return relaxed(a) > relaxed(b); });

  VectorXd m = VectorXd::Zero(n);
  if (rule == BinarizeRule::kTopHalf) {
    for (int r = 0; r < want; ++r) m(order[static_cast<std::size_t>(r)]) = 1.0;
    return m;
  }
  // Threshold at 1/2, then repair the count from the sorted order.
  int count = 0;
  for (int i = 0; i < n; ++i)
    if (relaxed(i) > 0.5) {
      m(i) = 1.0;
      ++count;
    }
  for (int r = n - 1; count > want && r >= 0; --r) {
    const int i = order[static_cast<std::size_t>(r)];
    if (m(i) == 1.0) {
      m(i) = 0.0;
      --count;
    }
  }
  for (int r = 0; count < want && r < n; ++r) {
    const int i = order[static_cast<std::size_t>(r)];
    if (m(i) == 0.0) {
      m(i) = 1.0;
      ++count;
    }
  }
  return m;
}

namespace {

std::pair<SamplingSet, SamplingSet> split_indicator(const VectorXd& m) {
  std::vector<int> first, second;
  for (Eigen::Index i = 0; i < m.size(); ++i) (m(i) == 1.0 ? first : second).push_back(static_cast<int>(i));
  const int n = static_cast<int>(m.size());
  return {SamplingSet(std::move(first), n), SamplingSet(std::move(second), n)};
}

BipartitionResult pdca_single(const MatrixXd& a_in, const PdcaConfig& cfg, const VectorXd& start) {
  const int n = static_cast<int>(a_in.rows());
  const double target = 0.5 * n;

  MatrixXd a = a_in;
  SquaredTraceObjective objective(a);
  if (cfg.normalize_dictionary && objective.lipschitz() > 0.0) {
    a *= std::pow(cfg.lipschitz / objective.lipschitz(), 0.25);
    objective = SquaredTraceObjective(a);
  } else if (objective.lipschitz() > cfg.lipschitz * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "PDCA step 1/L with L=" << cfg.lipschitz << " is below the gradient Lipschitz bound "
        << objective.lipschitz() << "; descent is not guaranteed";
    log_warning(msg.str());
  }

  auto project = [&](const VectorXd& v) {
    return cfg.prox == ProxMethod::kBisection ? prox_g(v, target) : prox_g_admm(v, target);
  };

  BipartitionResult result;
  result.lipschitz_bound = objective.lipschitz();
  const double gamma = 1.0 / cfg.lipschitz;
  VectorXd m = project(start);
  auto record = [&](int iter) {
    const double f = objective.value(m);
    const double h = objective_h(m, cfg.beta);
    result.trace.push_back({iter, f, h, f - h});
  };
  record(0);
  const double scale = std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const VectorXd step = objective.gradient(m) - grad_h(m, cfg.beta);
    VectorXd next = project(m - gamma * step);
    if (!next.allFinite()) {
      std::ostringstream msg;
      msg << "PDCA diverged at iteration " << k;
      throw NumericalFailure(msg.str());
    }
    const double change = (next - m).norm() / scale;
    m = std::move(next);
    record(k);
    result.iterations = k;
    if (!std::isfinite(result.trace.back().total)) {
      std::ostringstream msg;
      msg << "PDCA objective became non-finite at iteration " << k;
      throw NumericalFailure(msg.str());
    }
    if (change <= cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.relaxed = m;
  result.final_infeasibility = m.dot(VectorXd::Ones(n) - m);
  auto [first, second] = split_indicator(binarize(m, cfg.binarize));
  result.binary_objective = surrogate_objective(a_in, first, second);
  result.first = std::move(first);
  result.second = std::move(second);
  return result;
}

BipartitionResult pdca_on_matrix(const MatrixXd& a_in, const PdcaConfig& cfg, std::optional<VectorXd> m0) {
  cfg.validate();
  const int n = static_cast<int>(a_in.rows());
  if (n < 2) throw InvalidInput("bipartition needs at least two nodes");
  if (m0) {
    if (m0->size() != n) throw InvalidInput("initial point length does not match the dictionary");
    if ((m0->array() < 0.0).any() || (m0->array() > 1.0).any())
      throw InvalidInput("initial point must lie in [0, 1]^N");
  }
  BipartitionResult best = pdca_single(a_in, cfg, m0 ? *m0 : default_initial_point(n, cfg.seed));
  for (int r = 1; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd start(n);
    for (int i = 0; i < n; ++i) start(i) = u(rng);
    BipartitionResult candidate = pdca_single(a_in, cfg, start);
    if (candidate.binary_objective < best.binary_objective) best = std::move(candidate);
  }
  return best;
}

}  // namespace

BipartitionResult pdca_bipartition(const SubspaceDictionary& a, const PdcaConfig& cfg, std::optional<VectorXd> m0) {
  return pdca_on_matrix(a.matrix(), cfg, std::move(m0));
}

double subset_gram_trace(const MatrixXd& a, const SamplingSet& set) { return restrict_rows(a, set).squaredNorm(); }

double surrogate_objective(const MatrixXd& a, const SamplingSet& first, const SamplingSet& second) {
  auto term = [&](const SamplingSet& s) {
    if (s.empty()) return 0.0;
    const MatrixXd sa = restrict_rows(a, s);
    return (sa * sa.transpose()).squaredNorm();
  };
  return term(first) + term(second);
}

BruteForceResult brute_force_bipartition(const SubspaceDictionary& a, bool exact) {
  const int n = a.n_nodes();
  if (n > 14) throw InvalidInput("brute-force bipartition is limited to N <= 14");
  if (n < 2) throw InvalidInput("bipartition needs at least two nodes");
  const int want = (n + 1) / 2;
  BruteForceResult best{SamplingSet(), SamplingSet(), kInfiniteObjective};
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != want) continue;
    std::vector<int> first, second;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? first : second).push_back(i);
    SamplingSet s1(std::move(first), n), s2(std::move(second), n);
    const double value = exact ? aopt_objective(a, s1) + aopt_objective(a, s2)
                               : surrogate_objective(a.matrix(), s1, s2);
    if (!found || value < best.objective) {
      best = {std::move(s1), std::move(s2), value};
      found = true;
    }
  }
  return best;
}

namespace {

MatrixXd drop_zero_columns(const MatrixXd& a) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    if (a.col(c).cwiseAbs().maxCoeff() > 0.0) keep.push_back(c);
  return a(Eigen::all, keep);
}

void split_recursive(const MatrixXd& a, const std::vector<int>& rows, int depth, std::size_t node_id,
                     const PdcaConfig& cfg, std::vector<std::vector<int>>& out) {
  if (depth == 0) {
    out.push_back(rows);
    return;
  }
  const MatrixXd sub = drop_zero_columns(a(rows, Eigen::all));
  PdcaConfig child_cfg = cfg;
  child_cfg.seed = derive_seed(cfg.seed, node_id);
  const auto result = pdca_on_matrix(sub, child_cfg, std::nullopt);
  std::vector<int> left, right;
  for (int i : result.first.indices()) left.push_back(rows[static_cast<std::size_t>(i)]);
  for (int i : result.second.indices()) right.push_back(rows[static_cast<std::size_t>(i)]);
  split_recursive(a, left, depth - 1, 2 * node_id + 1, cfg, out);
  split_recursive(a, right, depth - 1, 2 * node_id + 2, cfg, out);
}

}  // namespace

Partition hierarchical_partition(const SubspaceDictionary& a, int k, const PdcaConfig& cfg) {
  const int n = a.n_nodes();
  if (k < 1 || k > 30 || (1 << k) > n) throw InvalidInput("hierarchical partition needs 1 <= k and 2^k <= N");
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::vector<int>> groups;
  split_recursive(a.matrix(), rows, k, 0, cfg, groups);
  std::vector<SamplingSet> subsets;
  for (auto& g : groups) subsets.emplace_back(std::move(g), n);
  return Partition(std::move(subsets));
}

NeumannCheck neumann_surrogate_check(const SubspaceDictionary& a, const SamplingSet& set) {
  if (set.empty()) throw InvalidInput("Neumann check needs a nonempty set");
  const MatrixXd sa = restrict_rows(a.matrix(), set);
  const MatrixXd b = sa * sa.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b, Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  const double op_norm = ev(ev.size() - 1);
  if (!(ev(0) > static_cast<double>(b.rows()) * std::numeric_limits<double>::epsilon() * op_norm))
    throw NumericalFailure("S^T A A^T S is singular");
  const double alpha = 0.9 / op_norm;
  const auto k = static_cast<double>(b.rows());
  const double tr_b = b.trace();
  NeumannCheck out;
  out.alpha = alpha;
  out.exact = ev.cwiseInverse().sum();
  out.order1 = (2.0 * k - alpha * tr_b) / alpha;
  out.order2 = (3.0 * k - 3.0 * alpha * tr_b + alpha * alpha * b.squaredNorm()) / alpha;
  out.series1 = alpha * alpha * out.order1;
  out.series2 = alpha * alpha * out.order2;
  return out;
}

}  // namespace gnp
