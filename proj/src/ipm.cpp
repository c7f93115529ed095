#include "ipm.hpp"

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

IpmResult solve_quantile_ipm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                             const Eigen::VectorXd& h, const SolverOptions& opts) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const bool quadratic = h.size() == p && h.maxCoeff() > 0.0;

  IpmResult out;

  Eigen::MatrixXd XtX = X.transpose() * X;
  const double scale = std::max(1.0, XtX.diagonal().maxCoeff());
  const double ridge = opts.ridge_eps * scale;

  // Start from the (ridge) least-squares fit.
  {
    Eigen::MatrixXd M = XtX;
    if (quadratic) M.diagonal() += h;
    M.diagonal().array() += ridge;
    out.theta = M.ldlt().solve(X.transpose() * y);
    if (!out.theta.allFinite()) out.theta.setZero(p);
  }
  Eigen::VectorXd theta = out.theta;
  Eigen::VectorXd r = y - X * theta;
  const double r_scale = 1.0 + r.cwiseAbs().mean();
  Eigen::VectorXd u = r.cwiseMax(0.0).array() + 0.1 * r_scale;
  Eigen::VectorXd v = (-r).cwiseMax(0.0).array() + 0.1 * r_scale;
  Eigen::VectorXd z = Eigen::VectorXd::Constant(n, tau - 0.5);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, 0.5);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 0.5);

  const double y_norm = 1.0 + y.cwiseAbs().maxCoeff();
  const double x_norm = 1.0 + X.cwiseAbs().maxCoeff();

  Eigen::VectorXd rp(n), rd(p), rs(n), rw(n), rcu(n), rcv(n), q(n), D(n);
  Eigen::VectorXd dtheta(p), dz(n), ds(n), dw(n), du(n), dv(n);
  Eigen::MatrixXd M(p, p);
  Eigen::LLT<Eigen::MatrixXd> llt;

  auto direction = [&](const Eigen::VectorXd& cu, const Eigen::VectorXd& cv) {
    q = rp.array() - (cu.array() - u.array() * rs.array()) / s.array() +
        (cv.array() - v.array() * rw.array()) / w.array();
    Eigen::VectorXd rhs = X.transpose() * D.cwiseProduct(q) - rd;
    dtheta = llt.solve(rhs);
    dz = D.cwiseProduct(q - X * dtheta);
    ds = rs - dz;
    dw = rw + dz;
    du = (cu.array() - u.array() * ds.array()) / s.array();
    dv = (cv.array() - v.array() * dw.array()) / w.array();
  };

  for (int it = 0; it < opts.max_iter; ++it) {
    rp = y - X * theta - u + v;
    rd = -(X.transpose() * z);
    if (quadratic) rd += h.cwiseProduct(theta);
    rs = Eigen::VectorXd::Constant(n, tau) - z - s;
    rw = Eigen::VectorXd::Constant(n, 1.0 - tau) + z - w;

    const double comp = u.dot(s) + v.dot(w);
    const double mu = comp / (2.0 * static_cast<double>(n));
    double primal = tau * u.sum() + (1.0 - tau) * v.sum();
    double dual = y.dot(z);
    if (quadratic) {
      const double quad = 0.5 * theta.dot(h.cwiseProduct(theta));
      primal += quad;
      dual -= quad;
    }
    out.iterations = it;
    const bool feasible = rp.cwiseAbs().maxCoeff() <= opts.tol * y_norm &&
                          rd.cwiseAbs().maxCoeff() <= opts.tol * x_norm * static_cast<double>(n);
    if (feasible && std::abs(primal - dual) <= opts.tol * (1.0 + std::abs(primal)) && comp <= opts.tol * (1.0 + std::abs(primal))) {
      out.converged = true;
      break;
    }

    D = (u.array() / s.array() + v.array() / w.array()).inverse();
    M.noalias() = X.transpose() * D.asDiagonal() * X;
    if (quadratic) M.diagonal() += h;
    M.diagonal().array() += ridge;
    llt.compute(M);
    if (llt.info() != Eigen::Success) {
      M.diagonal().array() += std::max(ridge, 1e-12) * 1e4;
      llt.compute(M);
      out.ridge_used = true;
      if (llt.info() != Eigen::Success) break;
    }

    // Predictor.
    rcu = -u.cwiseProduct(s);
    rcv = -v.cwiseProduct(w);
    direction(rcu, rcv);
    double ap = std::min(1.0, max_step(u, du));
    ap = std::min(ap, max_step(v, dv));
    double ad = std::min(1.0, max_step(s, ds));
    ad = std::min(ad, max_step(w, dw));
    if (quadratic) ap = ad = std::min(ap, ad);
    const double mu_aff = ((u + ap * du).dot(s + ad * ds) + (v + ap * dv).dot(w + ad * dw)) /
                          (2.0 * static_cast<double>(n));
    const double sigma = std::pow(mu_aff / mu, 3);

    // Corrector.
    rcu = (sigma * mu) - u.array() * s.array() - du.array() * ds.array();
    rcv = (sigma * mu) - v.array() * w.array() - dv.array() * dw.array();
    direction(rcu, rcv);
    constexpr double kEta = 0.99995;
    ap = std::min(1.0, kEta * std::min(max_step(u, du), max_step(v, dv)));
    ad = std::min(1.0, kEta * std::min(max_step(s, ds), max_step(w, dw)));
    if (quadratic) ap = ad = std::min(ap, ad);

    theta += ap * dtheta;
    u += ap * du;
    v += ap * dv;
    z += ad * dz;
    s += ad * ds;
    w += ad * dw;
    if (!theta.allFinite()) break;
    out.iterations = it + 1;
  }
  if (theta.allFinite()) out.theta = theta;
  return out;
}

}  // namespace qcsa::detail
