#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcsa::detail {
namespace {

double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double step = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) step = std::min(step, -x[i] / dx[i]);
  }
  return step;
}

}  // namespace

LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double tol,
                           int max_iter) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();

  // Mehrotra's starting point.
  Eigen::MatrixXd AAt = A * A.transpose();
  AAt.diagonal().array() += 1e-12 * std::max(1.0, AAt.diagonal().maxCoeff());
  Eigen::LDLT<Eigen::MatrixXd> ldlt0(AAt);
  Eigen::VectorXd x = A.transpose() * ldlt0.solve(b);
  Eigen::VectorXd y = ldlt0.solve(A * c);
  Eigen::VectorXd s = c - A.transpose() * y;
  double dx0 = std::max(-1.5 * x.minCoeff(), 0.0);
  double ds0 = std::max(-1.5 * s.minCoeff(), 0.0);
  x.array() += dx0;
  s.array() += ds0;
  const double xs = x.dot(s);
  x.array() += 0.5 * xs / std::max(s.sum(), 1e-300);
  s.array() += 0.5 * xs / std::max(x.sum(), 1e-300);
  if (!(x.minCoeff() > 0.0)) x.array() += 1.0;
  if (!(s.minCoeff() > 0.0)) s.array() += 1.0;

  const double b_norm = 1.0 + b.cwiseAbs().maxCoeff();
  const double c_norm = 1.0 + c.cwiseAbs().maxCoeff();

  LpResult out;
  Eigen::VectorXd rp(m), rd(n), dx(n), dy(m), ds(n), rc(n), d(n);
  Eigen::MatrixXd M(m, m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  auto solve_dir = [&](const Eigen::VectorXd& comp) {
    // A D A' dy = rp + A D (rd - comp / x)
    const Eigen::VectorXd t = rd - comp.cwiseQuotient(x);
    dy = ldlt.solve(rp + A * d.cwiseProduct(t));
    ds = rd - A.transpose() * dy;
    dx = (comp - x.cwiseProduct(ds)).cwiseQuotient(s);
  };

  for (int it = 0; it < max_iter; ++it) {
    rp = b - A * x;
    rd = c - A.transpose() * y - s;
    const double primal = c.dot(x);
    const double dual = b.dot(y);
    out.iterations = it;
    if (rp.cwiseAbs().maxCoeff() <= tol * b_norm && rd.cwiseAbs().maxCoeff() <= tol * c_norm &&
        std::abs(primal - dual) <= tol * (1.0 + std::abs(primal))) {
      out.converged = true;
      break;
    }
    const double mu = x.dot(s) / static_cast<double>(n);
    d = x.cwiseQuotient(s);
    M.noalias() = A * d.asDiagonal() * A.transpose();
    M.diagonal().array() += 1e-14 * std::max(1.0, M.diagonal().maxCoeff());
    ldlt.compute(M);
    if (ldlt.info() != Eigen::Success) break;

    rc = -x.cwiseProduct(s);
    solve_dir(rc);
    double ap = std::min(1.0, max_step(x, dx));
    double ad = std::min(1.0, max_step(s, ds));
    const double mu_aff = (x + ap * dx).dot(s + ad * ds) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3);

    rc = (sigma * mu) - x.array() * s.array() - dx.array() * ds.array();
    solve_dir(rc);
    constexpr double kEta = 0.99995;
    ap = std::min(1.0, kEta * max_step(x, dx));
    ad = std::min(1.0, kEta * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
    if (!x.allFinite() || !y.allFinite()) break;
    out.iterations = it + 1;
  }
  out.x = x;
  out.objective = c.dot(x);
  return out;
}

}  // namespace qcsa::detail
