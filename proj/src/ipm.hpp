#pragma once

#include <Eigen/Dense>

#include "qcsa/qr.hpp"

namespace qcsa::detail {

struct IpmResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
  bool ridge_used = false;
};

// Primal-dual interior point (Mehrotra predictor-corrector) for
//
//   min  tau 1'u + (1 - tau) 1'v + 0.5 theta' diag(h) theta
//   s.t. X theta + u - v = y,  u, v >= 0.
//
// With h empty this is the linear program of unpenalized quantile regression.
// The Newton system is reduced to (diag(h) + X' D X) dtheta = rhs.
IpmResult solve_quantile_ipm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                             const Eigen::VectorXd& h, const SolverOptions& opts);

}  // namespace qcsa::detail
