#pragma once

#include <vector>

#include "gnp/signal_models.hpp"

namespace gnp {

/// Per-column confidence vectors, packed as an N x D matrix (column i = w_i).
struct ConfidenceWeights {
  MatrixXd columns;
  void validate(int n_nodes, int n_columns) const;
};

struct DictLearnConfig {
  double budget = 300.0;   // K; each coefficient row gets K / N
  double step_d = 0.0;     // 0 selects 0.9 / (lambda_max(A^T A) max ||w_i||_inf^2)
  double step_a = 0.0;     // 0 selects 0.9 / (lambda_max(D D^T) max ||w_i||_inf^2)
  int max_outer = 50;
  int max_inner = 200;
  double outer_tol = 1e-5;  // relative to the weighted data energy sum_i ||W_i x_i||^2
  double inner_tol = 1e-6;

  void validate() const;
};

/// -2 A^T W^T W (x - A d) for one column.
VectorXd psi_grad_col(const VectorXd& x, const MatrixXd& a, const VectorXd& d, const VectorXd& w);

/// Weighted data term sum_i ||W_i (x_i - A d_i)||^2.
double weighted_objective(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w);

/// Gradient of the weighted data term with respect to the coefficients (M x D).
MatrixXd psi_grad(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w);

/// 2 sum_i W_i^2 (A d_i - x_i) d_i^T.
MatrixXd dictionary_grad(const MatrixXd& x, const MatrixXd& a, const MatrixXd& d, const MatrixXd& w);

/// Row-wise prox of the l_inf norm: sign(Y_ij) min(|Y_ij|, zeta_i), where
/// zeta_i solves sum_j max(0, |Y_ij| - zeta_i) = row_budget. Rows already
/// inside the l1 ball map to zero.
MatrixXd prox_linf_rows(const MatrixXd& y, double row_budget);

/// Projection of every row onto the l1 ball of radius row_budget, computed
/// through the Moreau identity Y - prox_linf_rows(Y). Rows whose l1 norm is
/// within a relative 1e-12 of the budget count as feasible and are returned
/// untouched, which makes the map exactly idempotent.
MatrixXd prox_l1_budget(const MatrixXd& y, double row_budget);

struct CoefficientUpdate {
  MatrixXd coefficients;
  std::vector<double> objective_trace;
  int iterations = 0;
};

/// Proximal gradient on the coefficients with the A fixed, started from d0.
CoefficientUpdate update_coefficients(const MatrixXd& x, const SubspaceDictionary& a, const ConfidenceWeights& w,
                                      const DictLearnConfig& cfg, const MatrixXd& d0);

/// Gradient descent on the dictionary with the coefficients fixed.
SubspaceDictionary update_dictionary(const MatrixXd& x, const MatrixXd& d, const ConfidenceWeights& w,
                                     const DictLearnConfig& cfg, const SubspaceDictionary& a0);

struct LearnResult {
  SubspaceDictionary dictionary;
  MatrixXd coefficients;
  std::vector<double> objective_trace;  // after every outer iteration
  int outer_iterations = 0;
};

/// Alternating minimization from A_init and D = 1 1^T. Columns with an all-zero
/// confidence vector are dropped before optimizing: they do not enter the
/// objective and their coefficients stay at zero.
LearnResult learn(const MatrixXd& x, const ConfidenceWeights& w, const SubspaceDictionary& a_init,
                  const DictLearnConfig& cfg);

}  // namespace gnp
