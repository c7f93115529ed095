#include "vertex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qcsa::detail {
namespace {

struct Crossing {
  double t;
  double slope_gain;
  int row;
};

}  // namespace

std::optional<std::vector<int>> basis_from_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& residual,
                                                     const Eigen::VectorXd& w) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (w[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(residual[a]) < std::abs(residual[b]); });

  // Gram-Schmidt on the candidate rows.
  Eigen::MatrixXd Q(p, p);
  std::vector<int> chosen;
  for (int i : order) {
    Eigen::VectorXd q = X.row(i).transpose();
    const double norm0 = q.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < chosen.size(); ++c) q -= Q.col(static_cast<Eigen::Index>(c)).dot(q) * Q.col(static_cast<Eigen::Index>(c));
    }
    const double norm = q.norm();
    if (norm <= 1e-8 * norm0) continue;
    Q.col(static_cast<Eigen::Index>(chosen.size())) = q / norm;
    chosen.push_back(i);
    if (static_cast<Eigen::Index>(chosen.size()) == p) return chosen;
  }
  return std::nullopt;
}

std::optional<VertexResult> vertex_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& w, double tau, std::vector<int> basis) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (static_cast<Eigen::Index>(basis.size()) != p) return std::nullopt;

  const double eps = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
  const int budget = 50 * static_cast<int>(n + p) + 100;

  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (int b : basis) in_basis[static_cast<std::size_t>(b)] = 1;

  VertexResult out;
  Eigen::MatrixXd Xh(p, p);
  Eigen::VectorXd yh(p), theta(p), r(n), g(p), u(p), d(p), Xd(n), coef(n), bcol(p);
  Eigen::RowVectorXd v(p);
  Eigen::MatrixXd B(p, p);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(p);
  std::vector<int> zero_rows;
  std::vector<Crossing> crossings;

  // Refactorizes the basis; between refreshes B, theta and r are updated in O(np).
  auto refresh = [&]() {
    for (Eigen::Index j = 0; j < p; ++j) {
      Xh.row(j) = X.row(basis[static_cast<std::size_t>(j)]);
      yh[j] = y[basis[static_cast<std::size_t>(j)]];
    }
    lu.compute(Xh);
    if (!(lu.rcond() > 1e-13)) return false;
    B = lu.inverse();
    theta = lu.solve(yh);
    if (!theta.allFinite() || !B.allFinite()) return false;
    r.noalias() = y - X * theta;
    return true;
  };

  if (!refresh()) return std::nullopt;
  int since_refresh = 0;
  for (int pivot = 0; pivot <= budget;) {
    for (int b : basis) r[b] = 0.0;
    // Residuals within eps of zero are taken as nonnegative: psi = tau.
    zero_rows.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || w[i] <= 0.0) {
        coef[i] = 0.0;
        continue;
      }
      if (std::abs(r[i]) <= eps) {
        r[i] = 0.0;
        zero_rows.push_back(static_cast<int>(i));
      }
      coef[i] = w[i] * (r[i] >= 0.0 ? tau : tau - 1.0);
    }
    g.noalias() = X.transpose() * coef;
    u.noalias() = B.transpose() * g;

    // Directional derivative along sigma * B.col(j) including the one-sided
    // kinks of zero-residual nonbasic rows.
    auto kink_term = [&](Eigen::Index j, double sigma) {
      double extra = 0.0;
      for (int i : zero_rows) {
        const double a = sigma * X.row(i).dot(B.col(j));
        if (a > 0.0) extra += w[i] * a;
      }
      return extra;
    };

    Eigen::Index leave = -1;
    double sigma = 1.0;
    double base_slope = 0.0;  // slope before the zero-row kinks at t = 0

    for (Eigen::Index j = 0; j < p && leave < 0; ++j) {
      if (w[basis[static_cast<std::size_t>(j)]] <= 0.0) {
        const double dplus = -u[j] + kink_term(j, 1.0);
        const double dminus = u[j] + kink_term(j, -1.0);
        leave = j;
        sigma = dplus <= dminus ? 1.0 : -1.0;
        base_slope = -sigma * u[j];
      }
    }
    if (leave < 0) {
      const double tol_d = 1e-11 * (1.0 + u.cwiseAbs().maxCoeff());
      double best = -tol_d;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double wj = w[basis[static_cast<std::size_t>(j)]];
        for (double sg : {1.0, -1.0}) {
          const double own = sg > 0.0 ? wj * (1.0 - tau) : wj * tau;
          const double lin = -sg * u[j] + own;
          if (lin >= best) continue;  // kinks only add
          const double exact = lin + kink_term(j, sg);
          if (exact < best) {
            best = exact;
            leave = j;
            sigma = sg;
            base_slope = lin;
          }
        }
      }
      if (leave < 0) {
        if (since_refresh > 0) {
          // Confirm optimality on a freshly factorized basis.
          if (!refresh()) return std::nullopt;
          since_refresh = 0;
          continue;
        }
        out.theta = theta;
        out.basis = basis;
        out.pivots = pivot;
        return out;
      }
    }

    // Ratio test: walk the sorted kinks of F along the edge until the slope turns nonnegative.
    d = sigma * B.col(leave);
    Xd.noalias() = X * d;
    crossings.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || w[i] <= 0.0) continue;
      const double di = Xd[i];
      if (di == 0.0) continue;
      const double ri = r[i];
      if ((ri >= 0.0 && di > 0.0) || (ri < 0.0 && di < 0.0)) {
        crossings.push_back({ri / di, w[i] * std::abs(di), static_cast<int>(i)});
      }
    }
    if (crossings.empty()) return std::nullopt;
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
      return a.t < b.t || (a.t == b.t && a.row < b.row);
    });
    double slope = base_slope;
    const Crossing* enter = nullptr;
    for (const Crossing& c : crossings) {
      slope += c.slope_gain;
      if (slope >= 0.0) {
        enter = &c;
        break;
      }
    }
    if (enter == nullptr) return std::nullopt;  // unbounded edge: rank deficient design
    const int e = enter->row;
    const double step = enter->t;

    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(leave)])] = 0;
    basis[static_cast<std::size_t>(leave)] = e;
    in_basis[static_cast<std::size_t>(e)] = 1;
    ++pivot;

    // Basis exchange: row `leave` of X_h becomes x_e. Sherman-Morrison on B.
    const double a = sigma * Xd[e];  // x_e' B e_leave
    bcol = B.col(leave);
    if (++since_refresh >= 24 || std::abs(a) < 1e-9 * X.row(e).norm() * bcol.norm()) {
      if (!refresh()) return std::nullopt;
      since_refresh = 0;
      continue;
    }
    v.noalias() = X.row(e) * B;
    v[leave] -= 1.0;
    B.noalias() -= (bcol / a) * v;
    theta += step * d;
    r -= step * Xd;
    r[e] = 0.0;
  }
  return std::nullopt;
}

}  // namespace qcsa::detail
