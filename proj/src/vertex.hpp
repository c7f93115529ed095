#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace qcsa::detail {

struct VertexResult {
  Eigen::VectorXd theta;
  std::vector<int> basis;
  int pivots = 0;
};

// Exact descent along the edges of the weighted check-loss polyhedron
//
//   F(theta) = sum_i w_i rho_tau(y_i - x_i' theta),
//
// starting at the basic solution that interpolates the rows in `basis`.
// Basis rows with zero weight are treated as free positions and are replaced
// first. Each regular pivot strictly decreases F, so the walk terminates.
// Returns nullopt when the basis is singular or the walk exceeds its budget.
std::optional<VertexResult> vertex_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& w, double tau, std::vector<int> basis);

// Picks p linearly independent rows with positive weight, smallest |residual| first.
std::optional<std::vector<int>> basis_from_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& residual,
                                                     const Eigen::VectorXd& w);

}  // namespace qcsa::detail
