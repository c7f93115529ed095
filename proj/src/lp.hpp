#pragma once

#include <Eigen/Dense>

namespace qcsa::detail {

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dense standard-form linear program  min c'x  s.t.  A x = b,  x >= 0,
// solved by a Mehrotra predictor-corrector interior point on the normal
// equations A D A'. Intended for small problems (a few hundred rows).
LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           double tol = 1e-10, int max_iter = 200);

}  // namespace qcsa::detail
