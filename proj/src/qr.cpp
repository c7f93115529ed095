#include "qcsa/qr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ipm.hpp"
#include "qcsa/error.hpp"
#include "vertex.hpp"

namespace qcsa {
namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("quantile level must lie in (0,1), got " + std::to_string(tau));
}

double weighted_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& theta, double tau) {
  const Eigen::VectorXd r = y - X * theta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (w[i] > 0.0) s += w[i] * check_loss(r[i], tau);
  }
  return s;
}

bool rank_deficient(const Eigen::MatrixXd& X) {
  if (X.rows() < X.cols()) return true;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  return qr.rank() < X.cols();
}

std::vector<int> penalized_positions(const Dataset& data, std::span<const int> cols) {
  std::vector<int> out;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (!data.intercept_col || cols[j] != *data.intercept_col) out.push_back(static_cast<int>(j));
  }
  return out;
}

// IPM fit of the (possibly augmented) unpenalized problem, refined to a vertex when possible.
QuantileFit solve_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, const SolverOptions& opts,
                         bool polish) {
  const detail::IpmResult ipm = detail::solve_quantile_ipm(X, y, tau, Eigen::VectorXd(), opts);
  QuantileFit fit;
  fit.tau = tau;
  fit.theta = ipm.theta;
  fit.iterations = ipm.iterations;
  fit.converged = ipm.converged;
  fit.ridge_stabilized = ipm.ridge_used || rank_deficient(X);
  if (!polish || fit.ridge_stabilized) return fit;

  const Eigen::VectorXd w = Eigen::VectorXd::Ones(X.rows());
  const Eigen::VectorXd r = y - X * ipm.theta;
  auto basis = detail::basis_from_residuals(X, r, w);
  if (!basis) return fit;
  auto vertex = detail::vertex_descent(X, y, w, tau, std::move(*basis));
  if (!vertex) return fit;
  const double f_ipm = weighted_loss(X, y, w, ipm.theta, tau);
  const double f_vtx = weighted_loss(X, y, w, vertex->theta, tau);
  if (f_vtx <= f_ipm + 1e-9 * (1.0 + std::abs(f_ipm))) {
    fit.theta = vertex->theta;
    fit.basis = std::move(vertex->basis);
    fit.iterations += vertex->pivots;
    fit.converged = true;
  }
  return fit;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw InvalidParameter("solver tol must be positive");
  if (max_iter < 1) throw InvalidParameter("solver max_iter must be at least 1");
  if (!(ridge_eps >= 0.0)) throw InvalidParameter("solver ridge_eps must be nonnegative");
}

double check_loss(double u, double tau) {
  check_tau(tau);
  return u * (tau - (u <= 0.0 ? 1.0 : 0.0));
}

double check_loss_subgradient(double u, double tau) {
  check_tau(tau);
  return tau - (u < 0.0 ? 1.0 : 0.0);
}

double mean_check_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double tau) {
  check_tau(tau);
  if (residuals.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) s += check_loss(residuals[i], tau);
  return s / static_cast<double>(residuals.size());
}

double zero_tolerance(const Eigen::Ref<const Eigen::VectorXd>& y) {
  return 1e-7 * (1.0 + (y.size() ? y.cwiseAbs().maxCoeff() : 0.0));
}

Eigen::MatrixXd select_columns(const Dataset& data, std::span<const int> cols) {
  if (cols.empty()) throw InvalidParameter("column list is empty");
  std::vector<int> seen(cols.begin(), cols.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw InvalidParameter("duplicate column index");
  if (seen.front() < 0 || seen.back() >= data.p()) throw InvalidParameter("column index out of range");
  Eigen::MatrixXd out(data.n(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = data.X.col(cols[j]);
  return out;
}

QuantileFit fit_qr_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, const SolverOptions& opts) {
  check_tau(tau);
  opts.validate();
  if (X.rows() != y.size()) throw DimensionMismatch("design and outcome row counts differ");
  if (y.size() < 1) throw DataError("no observations to fit");
  QuantileFit fit = solve_linear(X, y, tau, opts, opts.vertex_polish);
  fit.objective = mean_check_loss(y - X * fit.theta, tau);
  return fit;
}

QuantileFit fit_qr(const Dataset& data, std::span<const int> cols, double tau, const SolverOptions& opts) {
  return fit_qr_matrix(select_columns(data, cols), data.y, tau, opts);
}

QuantileFit refit_without(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, const QuantileFit& full,
                          std::span<const int> dropped, const SolverOptions& opts) {
  check_tau(tau);
  const Eigen::Index n = X.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int i : dropped) {
    if (i < 0 || i >= n) throw InvalidParameter("dropped row out of range");
    w[i] = 0.0;
  }
  const double kept = w.sum();
  if (kept < 1.0) throw DataError("no observations left after holdout");

  if (static_cast<Eigen::Index>(full.basis.size()) == X.cols()) {
    if (auto vertex = detail::vertex_descent(X, y, w, tau, full.basis)) {
      QuantileFit fit;
      fit.tau = tau;
      fit.theta = std::move(vertex->theta);
      fit.basis = std::move(vertex->basis);
      fit.iterations = vertex->pivots;
      fit.converged = true;
      fit.objective = weighted_loss(X, y, w, fit.theta, tau) / kept;
      return fit;
    }
  }

  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(kept));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] > 0.0) keep.push_back(static_cast<int>(i));
  }
  Eigen::MatrixXd Xk(static_cast<Eigen::Index>(keep.size()), X.cols());
  Eigen::VectorXd yk(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    Xk.row(static_cast<Eigen::Index>(r)) = X.row(keep[r]);
    yk[static_cast<Eigen::Index>(r)] = y[keep[r]];
  }
  QuantileFit fit = fit_qr_matrix(Xk, yk, tau, opts);
  // Basis rows refer to the reduced matrix; map back to the caller's numbering.
  for (int& b : fit.basis) b = keep[static_cast<std::size_t>(b)];
  return fit;
}

QuantileFit fit_qr_l1(const Dataset& data, std::span<const int> cols, double tau, double lambda,
                      const SolverOptions& opts) {
  check_tau(tau);
  opts.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be a finite nonnegative number");
  const Eigen::MatrixXd X = select_columns(data, cols);
  if (lambda == 0.0) return fit_qr_matrix(X, data.y, tau, opts);

  // lambda * |theta_j| = rho(lambda * theta_j) + rho(-lambda * theta_j): two pseudo-rows per penalized column.
  const std::vector<int> pen = penalized_positions(data, cols);
  const Eigen::Index n = X.rows();
  const auto q = static_cast<Eigen::Index>(pen.size());
  Eigen::MatrixXd Xa = Eigen::MatrixXd::Zero(n + 2 * q, X.cols());
  Eigen::VectorXd ya = Eigen::VectorXd::Zero(n + 2 * q);
  Xa.topRows(n) = X;
  ya.head(n) = data.y;
  for (Eigen::Index k = 0; k < q; ++k) {
    Xa(n + 2 * k, pen[static_cast<std::size_t>(k)]) = lambda;
    Xa(n + 2 * k + 1, pen[static_cast<std::size_t>(k)]) = -lambda;
  }
  QuantileFit fit = solve_linear(Xa, ya, tau, opts, opts.vertex_polish);
  fit.basis.clear();  // pseudo-rows make the basis meaningless to callers
  double penalty = 0.0;
  for (int j : pen) penalty += std::abs(fit.theta[j]);
  fit.objective = mean_check_loss(data.y - X * fit.theta, tau) + lambda * penalty / static_cast<double>(n);
  return fit;
}

QuantileFit fit_qr_l2(const Dataset& data, std::span<const int> cols, double tau, double lambda,
                      const SolverOptions& opts) {
  check_tau(tau);
  opts.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be a finite nonnegative number");
  const Eigen::MatrixXd X = select_columns(data, cols);
  if (lambda == 0.0) return fit_qr_matrix(X, data.y, tau, opts);

  const std::vector<int> pen = penalized_positions(data, cols);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(X.cols());
  for (int j : pen) h[j] = 2.0 * lambda;
  const detail::IpmResult ipm = detail::solve_quantile_ipm(X, data.y, tau, h, opts);
  QuantileFit fit;
  fit.tau = tau;
  fit.theta = ipm.theta;
  fit.iterations = ipm.iterations;
  fit.converged = ipm.converged;
  fit.ridge_stabilized = ipm.ridge_used;
  double penalty = 0.0;
  for (int j : pen) penalty += fit.theta[j] * fit.theta[j];
  fit.objective = mean_check_loss(data.y - X * fit.theta, tau) + lambda * penalty / static_cast<double>(X.rows());
  return fit;
}

double belloni_lambda(const Eigen::MatrixXd& X, double tau, double confidence, int n_sim, std::uint64_t seed) {
  check_tau(tau);
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidParameter("confidence must lie in (0,1)");
  if (n_sim < 100) throw InvalidParameter("n_sim must be at least 100");
  if (X.rows() < 1 || X.cols() < 1) throw InvalidParameter("belloni_lambda needs a nonempty matrix");
  const Eigen::Index n = X.rows();

  Eigen::MatrixXd Xs = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ms = X.col(j).squaredNorm() / static_cast<double>(n);
    if (!(ms > 0.0)) throw InvalidParameter("column " + std::to_string(j) + " is identically zero");
    Xs.col(j) /= std::sqrt(ms);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd score(n);
  std::vector<double> sims(static_cast<std::size_t>(n_sim));
  for (int s = 0; s < n_sim; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) score[i] = tau - (unif(rng) <= tau ? 1.0 : 0.0);
    sims[static_cast<std::size_t>(s)] = (Xs.transpose() * score).cwiseAbs().maxCoeff();
  }
  std::sort(sims.begin(), sims.end());
  const auto idx = static_cast<std::size_t>(std::ceil(confidence * n_sim - 1e-9)) - 1;
  return sims[std::min(idx, sims.size() - 1)];
}

double predict(const QuantileFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != fit.theta.size()) {
    throw DimensionMismatch("predict: expected " + std::to_string(fit.theta.size()) + " regressors, got " +
                            std::to_string(x.size()));
  }
  return x.dot(fit.theta);
}

SignCounts residual_sign_counts(const QuantileFit& fit, const Dataset& data, std::span<const int> cols) {
  const Eigen::MatrixXd X = select_columns(data, cols);
  if (X.cols() != fit.theta.size()) throw DimensionMismatch("fit and column list disagree");
  const Eigen::VectorXd r = data.y - X * fit.theta;
  const double tz = zero_tolerance(data.y);
  SignCounts c;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r[i] < -tz) {
      ++c.n_neg;
    } else if (r[i] > tz) {
      ++c.n_pos;
    } else {
      ++c.n_zero;
    }
  }
  return c;
}

}  // namespace qcsa
