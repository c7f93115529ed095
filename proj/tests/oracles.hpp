#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

// Reference implementations used only by the tests. They share no code with the library.
namespace oracle {

inline double rho(double u, double tau) { return u * (tau - (u <= 0.0 ? 1.0 : 0.0)); }

inline double sum_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& theta, double tau) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += rho(y[i] - X.row(i).dot(theta), tau);
  return s;
}

struct Basic {
  Eigen::VectorXd theta;
  double sum_loss = std::numeric_limits<double>::infinity();
};

// Enumerates every p-row interpolating solution and keeps the cheapest one.
inline Basic best_basic_solution(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  Basic best;
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == p) {
      Eigen::MatrixXd A(p, p);
      Eigen::VectorXd b(p);
      for (int r = 0; r < p; ++r) {
        A.row(r) = X.row(idx[static_cast<std::size_t>(r)]);
        b[r] = y[idx[static_cast<std::size_t>(r)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < p) return;
      const Eigen::VectorXd theta = lu.solve(b);
      const double f = sum_loss(X, y, theta, tau);
      if (f < best.sum_loss) {
        best.sum_loss = f;
        best.theta = theta;
      }
      return;
    }
    for (int i = start; i <= n - (p - depth); ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// All size-k subsets of {0..K-1} in lexicographic order.
inline std::vector<std::vector<int>> all_subsets(int K, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int j = start; j < K; ++j) {
      cur.push_back(j);
      rec(j + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Leave-one-out CV of the equal-weight average over every size-k subset,
// each refit solved by enumeration.
inline double naive_loo_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, int k) {
  const int n = static_cast<int>(X.rows());
  const auto subsets = all_subsets(static_cast<int>(X.cols()), k);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double pred = 0.0;
    for (const auto& s : subsets) {
      Eigen::MatrixXd Xs(n - 1, k);
      Eigen::VectorXd ys(n - 1);
      int r = 0;
      for (int row = 0; row < n; ++row) {
        if (row == i) continue;
        for (int j = 0; j < k; ++j) Xs(r, j) = X(row, s[static_cast<std::size_t>(j)]);
        ys[r] = y[row];
        ++r;
      }
      const Basic b = best_basic_solution(Xs, ys, tau);
      for (int j = 0; j < k; ++j) pred += X(i, s[static_cast<std::size_t>(j)]) * b.theta[j];
    }
    pred /= static_cast<double>(subsets.size());
    total += rho(y[i] - pred, tau);
  }
  return total / n;
}

// Golden-section minimizer of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

struct Instance {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Intercept in column 0 plus standard normal columns; heavy-ish tailed noise.
inline Instance random_instance(std::mt19937_64& rng, int n, int p) {
  std::normal_distribution<double> normal;
  std::student_t_distribution<double> t3(3.0);
  Instance inst{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    inst.X(i, 0) = 1.0;
    double signal = 0.5;
    for (int j = 1; j < p; ++j) {
      inst.X(i, j) = normal(rng);
      signal += inst.X(i, j) / j;
    }
    inst.y[i] = signal + t3(rng);
  }
  return inst;
}

}  // namespace oracle
