#include "gnp/dict_learn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "gnp/error.hpp"

namespace gnp {

void ConfidenceWeights::validate(int n_nodes, int n_columns) const {
  if (columns.rows() != n_nodes || columns.cols() != n_columns)
    throw InvalidInput("confidence weights must be N x D and match the data");
  if ((columns.array() < 0.0).any() || (columns.array() > 1.0).any() || !columns.allFinite())
    throw InvalidInput("confidence weights must lie in [0, 1]");
}

void DictLearnConfig::validate() const {
  if (!(budget > 0.0)) throw InvalidInput("dictionary learning budget K must be positive");
  if (step_d < 0.0 || step_a < 0.0) throw InvalidInput("dictionary learning steps must be nonnegative");
  if (max_outer < 1 || max_inner < 1) throw InvalidInput("dictionary learning iteration limits must be positive");
  if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidInput("dictionary learning tolerances must be positive");
}

VectorXd psi_grad_col(const VectorXd& x, const MatrixXd& a, const VectorXd& d, const VectorXd& w) {
  const VectorXd w2 = w.cwiseAbs2();
  return -2.0 * a.transpose() * w2.cwiseProduct(x - a * d);
}

double weighted_objective(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w) {
  return w.cwiseProduct(x - a * d).squaredNorm();
}

MatrixXd psi_grad(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w) {
  const MatrixXd r = w.cwiseAbs2().cwiseProduct(x - a * d);
  return -2.0 * a.transpose() * r;
}

MatrixXd dictionary_grad(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w) {
  const MatrixXd r = w.cwiseAbs2().cwiseProduct(a * d - x);
  return 2.0 * r * d.transpose();
}

namespace {

// Shift zeta >= 0 with sum_j max(0, |y_j| - zeta) = budget, given sum |y_j| > budget.
double water_level(const Eigen::Ref<const Eigen::RowVectorXd>& row, double budget) {
  std::vector<double> mags(static_cast<std::size_t>(row.size()));
  for (Eigen::Index j = 0; j < row.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(row(j));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double zeta = 0.0;
  for (std::size_t r = 0; r < mags.size(); ++r) {
    cumulative += mags[r];
    const double candidate = (cumulative - budget) / static_cast<double>(r + 1);
    if (mags[r] > candidate) zeta = candidate;
  }
  return std::max(zeta, 0.0);
}

bool row_feasible(const Eigen::Ref<const Eigen::RowVectorXd>& row, double budget) {
  return row.cwiseAbs().sum() <= budget * (1.0 + 1e-12);
}

double gram_lambda_max(const MatrixXd& m) {
  const MatrixXd gram = m.rows() < m.cols() ? MatrixXd(m * m.transpose()) : MatrixXd(m.transpose() * m);
  if (gram.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

double relative_change(const MatrixXd& next, const MatrixXd& prev) {
  const double diff = (next - prev).norm();
  const double base = prev.norm();
  return base > 0.0 ? diff / base : diff;
}

void check_finite(const MatrixXd& m, const char* what, int iter) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << what << " became non-finite at iteration " << iter;
    throw NumericalFailure(msg.str());
  }
}

}  // namespace

MatrixXd prox_linf_rows(const MatrixXd& y, double row_budget) {
  if (!(row_budget > 0.0)) throw InvalidInput("l1 budget must be positive");
  MatrixXd out = MatrixXd::Zero(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (row_feasible(y.row(i), row_budget)) continue;
    const double zeta = water_level(y.row(i), row_budget);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double v = y(i, j);
      out(i, j) = std::copysign(std::min(std::abs(v), zeta), v);
    }
  }
  return out;
}

MatrixXd prox_l1_budget(const MatrixXd& y, double row_budget) { return y - prox_linf_rows(y, row_budget); }

CoefficientUpdate update_coefficients(const MatrixXd& x, const SubspaceDictionary& a, const ConfidenceWeights& w,
                                      const DictLearnConfig& cfg, const MatrixXd& d0) {
  cfg.validate();
  const MatrixXd& am = a.matrix();
  if (x.rows() != am.rows()) throw InvalidInput("data rows must match the dictionary rows");
  if (d0.rows() != am.cols() || d0.cols() != x.cols()) throw InvalidInput("initial coefficients have the wrong shape");
  w.validate(static_cast<int>(x.rows()), static_cast<int>(x.cols()));

  CoefficientUpdate out;
  out.coefficients = d0;
  const double w_inf = w.columns.size() ? w.columns.cwiseAbs().maxCoeff() : 0.0;
  const double curvature = gram_lambda_max(am) * w_inf * w_inf;
  if (curvature == 0.0) {
    out.coefficients = prox_l1_budget(d0, cfg.budget / static_cast<double>(x.rows()));
    out.objective_trace.push_back(weighted_objective(x, am, out.coefficients, w.columns));
    return out;
  }
  const double step = cfg.step_d > 0.0 ? cfg.step_d : 0.9 / curvature;
  const double row_budget = cfg.budget / static_cast<double>(x.rows());

  MatrixXd& d = out.coefficients;
  for (int it = 1; it <= cfg.max_inner; ++it) {
    MatrixXd next = prox_l1_budget(d - step * psi_grad(x, am, d, w.columns), row_budget);
    check_finite(next, "coefficient update", it);
    const double change = relative_change(next, d);
    d = std::move(next);
    out.objective_trace.push_back(weighted_objective(x, am, d, w.columns));
    out.iterations = it;
    if (change <= cfg.inner_tol) break;
  }
  return out;
}

SubspaceDictionary update_dictionary(const MatrixXd& x, const MatrixXd& d, const ConfidenceWeights& w,
                                     const DictLearnConfig& cfg, const SubspaceDictionary& a0) {
  cfg.validate();
  if (x.rows() != a0.n_nodes() || d.rows() != a0.n_atoms() || d.cols() != x.cols())
    throw InvalidInput("dictionary update dimensions are inconsistent");
  w.validate(static_cast<int>(x.rows()), static_cast<int>(x.cols()));

  const double w_inf = w.columns.size() ? w.columns.cwiseAbs().maxCoeff() : 0.0;
  const double curvature = gram_lambda_max(d) * w_inf * w_inf;
  if (curvature == 0.0) return a0;
  const double step = cfg.step_a > 0.0 ? cfg.step_a : 0.9 / curvature;

  MatrixXd a = a0.matrix();
  for (int it = 1; it <= cfg.max_inner; ++it) {
    MatrixXd next = a - step * dictionary_grad(x, a, d, w.columns);
    check_finite(next, "dictionary update", it);
    const double change = relative_change(next, a);
    a = std::move(next);
    if (change <= cfg.inner_tol) break;
  }
  return SubspaceDictionary(std::move(a));
}

LearnResult learn(const MatrixXd& x, const ConfidenceWeights& w, const SubspaceDictionary& a_init,
                  const DictLearnConfig& cfg) {
  cfg.validate();
  if (x.rows() != a_init.n_nodes()) throw InvalidInput("data rows must match the dictionary rows");
  w.validate(static_cast<int>(x.rows()), static_cast<int>(x.cols()));

  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    if (w.columns.col(c).cwiseAbs().maxCoeff() > 0.0) active.push_back(c);

  LearnResult result{a_init, MatrixXd::Zero(a_init.n_atoms(), x.cols()), {}, 0};
  if (active.empty()) return result;

  const MatrixXd xa = x(Eigen::all, active);
  const ConfidenceWeights wa{w.columns(Eigen::all, active)};
  MatrixXd d = MatrixXd::Ones(a_init.n_atoms(), static_cast<Eigen::Index>(active.size()));
  SubspaceDictionary a = a_init;
  const double energy = wa.columns.cwiseProduct(xa).squaredNorm();
  double previous = std::numeric_limits<double>::infinity();
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    d = update_coefficients(xa, a, wa, cfg, d).coefficients;
    a = update_dictionary(xa, d, wa, cfg, a);
    const double obj = weighted_objective(xa, a.matrix(), d, wa.columns);
    result.objective_trace.push_back(obj);
    result.outer_iterations = outer;
    const bool done = std::abs(previous - obj) <= cfg.outer_tol * std::max(energy, 1e-300) || obj == 0.0;
    previous = obj;
    if (done) break;
  }
  result.dictionary = std::move(a);
  for (std::size_t k = 0; k < active.size(); ++k) result.coefficients.col(active[k]) = d.col(static_cast<Eigen::Index>(k));
  return result;
}

}  // namespace gnp
