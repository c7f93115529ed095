#include "qcsa/competitors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lp.hpp"
#include "qcsa/csa.hpp"
#include "qcsa/error.hpp"
#include "qcsa/parallel.hpp"
#include "qcsa/seed.hpp"

namespace qcsa {
namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("quantile level must lie in (0,1)");
}

std::vector<int> all_columns(const Dataset& data) {
  std::vector<int> cols(static_cast<std::size_t>(data.p()));
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

double dot_cols(const std::vector<int>& cols, const Eigen::VectorXd& theta, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double v = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) v += x[cols[j]] * theta[static_cast<Eigen::Index>(j)];
  return v;
}

}  // namespace

std::vector<std::vector<int>> nested_models(std::span<const int> order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  for (int c : order) {
    cur.push_back(c);
    out.push_back(cur);
  }
  return out;
}

Eigen::MatrixXd jackknife_predictions(const Dataset& data, double tau, const std::vector<std::vector<int>>& models,
                                      const SolverOptions& opts, std::vector<QuantileFit>* full_fits) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd P(n, static_cast<Eigen::Index>(models.size()));
  if (full_fits) full_fits->assign(models.size(), QuantileFit{});
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (models[m].empty()) throw InvalidParameter("JMA model " + std::to_string(m) + " has no columns");
    const auto width = static_cast<Eigen::Index>(models[m].size());
    if (n < width + 2) {
      throw DataError("JMA model " + std::to_string(m) + " with " + std::to_string(width) +
                      " regressors needs at least " + std::to_string(width + 2) + " observations");
    }
    const Eigen::MatrixXd Xm = select_columns(data, models[m]);
    QuantileFit full = fit_qr_matrix(Xm, data.y, tau, opts);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int drop = static_cast<int>(i);
      const QuantileFit f = refit_without(Xm, data.y, tau, full, std::span<const int>(&drop, 1), opts);
      P(i, static_cast<Eigen::Index>(m)) = Xm.row(i).dot(f.theta);
    }
    if (full_fits) (*full_fits)[m] = std::move(full);
  }
  return P;
}

Eigen::VectorXd simplex_quantile_weights(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, double tau) {
  check_tau(tau);
  const Eigen::Index n = P.rows();
  const Eigen::Index M = P.cols();
  if (M == 1) return Eigen::VectorXd::Ones(1);

  // Epigraph split of rho_tau: variables [w; u; v] >= 0 with P w + u - v = y and 1'w = 1.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, M + 2 * n);
  A.topLeftCorner(n, M) = P;
  A.block(0, M, n, n).setIdentity();
  A.block(0, M + n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  A.block(n, 0, 1, M).setOnes();
  Eigen::VectorXd b(n + 1);
  b.head(n) = y;
  b[n] = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(M + 2 * n);
  c.segment(M, n).setConstant(tau / static_cast<double>(n));
  c.segment(M + n, n).setConstant((1.0 - tau) / static_cast<double>(n));

  const detail::LpResult lp = detail::solve_standard_lp(A, b, c);
  if (!lp.x.allFinite()) throw InternalError("JMA weight program failed");
  Eigen::VectorXd w = lp.x.head(M).cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) throw InternalError("JMA weight program returned a zero weight vector");
  return w / s;
}

JmaPredictor fit_jma(const Dataset& data, double tau, const std::vector<std::vector<int>>& models,
                     const SolverOptions& opts) {
  check_tau(tau);
  data.validate();
  if (models.empty()) throw InvalidParameter("JMA needs at least one model");
  JmaPredictor out;
  out.tau = tau;
  out.p = static_cast<int>(data.p());
  out.models = models;
  const Eigen::MatrixXd P = jackknife_predictions(data, tau, models, opts, &out.fits);
  out.weights = simplex_quantile_weights(P, data.y, tau);
  out.cv_objective = mean_check_loss(data.y - P * out.weights, tau);
  return out;
}

double jma_predict(const JmaPredictor& jma, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != jma.p) {
    throw DimensionMismatch("jma_predict: expected " + std::to_string(jma.p) + " regressors, got " +
                            std::to_string(x.size()));
  }
  double s = 0.0;
  for (std::size_t m = 0; m < jma.models.size(); ++m) {
    s += jma.weights[static_cast<Eigen::Index>(m)] * dot_cols(jma.models[m], jma.fits[m].theta, x);
  }
  return s;
}

BagPredictor fit_bag_resamples(const Dataset& data, double tau, const std::vector<std::vector<int>>& resamples,
                               const SolverOptions& opts, int threads) {
  check_tau(tau);
  data.validate();
  if (resamples.empty()) throw InvalidParameter("bagging needs at least one resample");
  BagPredictor out;
  out.tau = tau;
  out.p = static_cast<int>(data.p());
  out.B = static_cast<int>(resamples.size());
  out.columns = all_columns(data);
  out.fits.resize(resamples.size());
  // Interior-point answers only; no vertex polish on resamples.
  SolverOptions bag_opts = opts;
  bag_opts.vertex_polish = false;
  parallel_for(resamples.size(), threads, [&](std::size_t b) {
    const Dataset rs = data.rows(resamples[b]);
    out.fits[b] = fit_qr_matrix(rs.X, rs.y, tau, bag_opts);
  });
  for (const auto& f : out.fits) out.ridge_count += f.ridge_stabilized ? 1 : 0;
  return out;
}

BagPredictor fit_bag(const Dataset& data, double tau, int B, std::uint64_t seed, const SolverOptions& opts,
                     int threads) {
  if (B < 1) throw InvalidParameter("bootstrap size B must be at least 1");
  const Eigen::Index n = data.n();
  const std::uint64_t base = derive_seed(seed, stream::kBootstrap);
  std::vector<std::vector<int>> resamples(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    std::mt19937_64 rng(derive_seed(base, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
    auto& rs = resamples[static_cast<std::size_t>(b)];
    rs.resize(static_cast<std::size_t>(n));
    for (auto& i : rs) i = pick(rng);
  }
  BagPredictor out = fit_bag_resamples(data, tau, resamples, opts, threads);
  out.seed = seed;
  return out;
}

double bag_predict(const BagPredictor& bag, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != bag.p) {
    throw DimensionMismatch("bag_predict: expected " + std::to_string(bag.p) + " regressors, got " +
                            std::to_string(x.size()));
  }
  double s = 0.0;
  for (const auto& f : bag.fits) s += dot_cols(bag.columns, f.theta, x);
  return s / static_cast<double>(bag.fits.size());
}

TunedFit fit_l1qr(const Dataset& data, double tau, const SolverOptions& opts, double confidence, int n_sim,
                  std::uint64_t seed) {
  check_tau(tau);
  data.validate();
  const Eigen::Index n = data.n();

  // Penalized columns with nonzero mean square, rescaled; all-zero columns get 0.
  std::vector<int> kept;
  std::vector<double> scale;
  std::vector<int> penalized;
  for (int j = 0; j < data.p(); ++j) {
    const bool is_intercept = data.intercept_col && j == *data.intercept_col;
    const double ms = data.X.col(j).squaredNorm() / static_cast<double>(n);
    if (!is_intercept && !(ms > 0.0)) continue;
    kept.push_back(j);
    scale.push_back(is_intercept ? 1.0 : std::sqrt(ms));
    if (!is_intercept) penalized.push_back(static_cast<int>(kept.size()) - 1);
  }

  Dataset scaled;
  scaled.y = data.y;
  scaled.X.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    scaled.X.col(static_cast<Eigen::Index>(j)) = data.X.col(kept[j]) / scale[j];
  }
  if (data.intercept_col) {
    scaled.intercept_col = static_cast<int>(std::find(kept.begin(), kept.end(), *data.intercept_col) - kept.begin());
  }

  TunedFit out;
  if (!penalized.empty()) {
    Eigen::MatrixXd Xp(n, static_cast<Eigen::Index>(penalized.size()));
    for (std::size_t j = 0; j < penalized.size(); ++j) Xp.col(static_cast<Eigen::Index>(j)) = scaled.X.col(penalized[j]);
    out.lambda = belloni_lambda(Xp, tau, confidence, n_sim, derive_seed(seed, stream::kLambda));
  }
  std::vector<int> cols(kept.size());
  std::iota(cols.begin(), cols.end(), 0);
  QuantileFit f = fit_qr_l1(scaled, cols, tau, out.lambda, opts);

  out.fit = f;
  out.fit.theta = Eigen::VectorXd::Zero(data.p());
  for (std::size_t j = 0; j < kept.size(); ++j) out.fit.theta[kept[j]] = f.theta[static_cast<Eigen::Index>(j)] / scale[j];
  out.fit.basis.clear();
  return out;
}

TunedFit fit_l2qr_cv(const Dataset& data, double tau, std::span<const double> grid, int folds, std::uint64_t seed,
                     const SolverOptions& opts) {
  check_tau(tau);
  data.validate();
  if (grid.empty()) throw InvalidParameter("L2QR grid is empty");
  for (double g : grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidParameter("L2QR grid values must be finite and nonnegative");
  }
  const Eigen::Index n = data.n();
  if (folds < 2 || folds > n) throw InvalidParameter("L2QR needs 2 <= folds <= n");
  const std::vector<int> fold_of = assign_folds(n, folds, derive_seed(seed, stream::kFolds));
  const std::vector<int> cols = all_columns(data);

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::vector<int>> train(static_cast<std::size_t>(folds)), test(static_cast<std::size_t>(folds));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train)[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
    }
  }

  std::vector<double> losses;
  for (double lambda : sorted) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      const Dataset tr = data.rows(train[static_cast<std::size_t>(f)]);
      const QuantileFit fit = fit_qr_l2(tr, cols, tau, lambda, opts);
      for (int i : test[static_cast<std::size_t>(f)]) {
        total += check_loss(data.y[i] - data.X.row(i).dot(fit.theta), tau);
      }
    }
    losses.push_back(total / static_cast<double>(n));
  }
  const auto best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());

  TunedFit out;
  out.lambda = sorted[best];
  out.cv_losses = losses;
  out.fit = fit_qr_l2(data, cols, tau, out.lambda, opts);
  return out;
}

}  // namespace qcsa
