#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcsa/dataset.hpp"

namespace qcsa {

struct SolverOptions {
  double tol = 1e-8;        // relative duality gap at which the interior-point solver stops
  int max_iter = 100;       // interior-point iteration cap
  double ridge_eps = 1e-10; // diagonal added to the normal equations (relative to their scale)
  bool vertex_polish = true;  // refine unpenalized fits to an exact basic solution

  void validate() const;
};

/// Coefficients of one quantile regression together with solver diagnostics.
struct QuantileFit {
  Eigen::VectorXd theta;
  double tau = 0.5;
  double objective = 0.0;  // mean check loss over the rows used, plus the penalty if any
  int iterations = 0;
  bool converged = false;
  bool ridge_stabilized = false;  // design was numerically rank deficient
  std::vector<int> basis;         // rows interpolated exactly; empty unless a basic solution
};

struct SignCounts {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;
};

/// rho_tau(u) = u * (tau - 1{u <= 0}).
double check_loss(double u, double tau);

/// psi_tau(u) = tau - 1{u < 0}, the subgradient of rho_tau picked at u = 0 from the right.
double check_loss_subgradient(double u, double tau);

double mean_check_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double tau);

/// Scale-aware threshold below which a residual counts as zero.
double zero_tolerance(const Eigen::Ref<const Eigen::VectorXd>& y);

/// Copies the listed columns of data.X; validates the index list.
Eigen::MatrixXd select_columns(const Dataset& data, std::span<const int> cols);

QuantileFit fit_qr(const Dataset& data, std::span<const int> cols, double tau, const SolverOptions& opts = {});

/// Minimizes mean check loss + (lambda / n) * sum |theta_j|; the intercept column is not penalized.
QuantileFit fit_qr_l1(const Dataset& data, std::span<const int> cols, double tau, double lambda,
                      const SolverOptions& opts = {});

/// Minimizes mean check loss + (lambda / n) * sum theta_j^2; the intercept column is not penalized.
QuantileFit fit_qr_l2(const Dataset& data, std::span<const int> cols, double tau, double lambda,
                      const SolverOptions& opts = {});

// Matrix-level entry points used by the averaging code, where the same column
// slice is refit many times.
QuantileFit fit_qr_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                          const SolverOptions& opts = {});

/// Refits after removing `dropped` rows, starting from the basic solution of `full`.
/// Falls back to a cold interior-point fit if `full` carries no basis or the
/// vertex walk cannot proceed. Objective is averaged over the remaining rows.
QuantileFit refit_without(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, const QuantileFit& full,
                          std::span<const int> dropped, const SolverOptions& opts = {});

/// Simulated tuning level for l1-penalized quantile regression: the `confidence`
/// quantile over `n_sim` draws of max_j |sum_i (tau - 1{U_i <= tau}) x_ij| with
/// U_i ~ U(0,1) and columns rescaled to unit mean square. Pass only the
/// penalized columns. The result is on the scale used by fit_qr_l1 for the
/// rescaled columns.
double belloni_lambda(const Eigen::MatrixXd& X, double tau, double confidence = 0.9, int n_sim = 1000,
                      std::uint64_t seed = 0);

double predict(const QuantileFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x);

SignCounts residual_sign_counts(const QuantileFit& fit, const Dataset& data, std::span<const int> cols);

}  // namespace qcsa
