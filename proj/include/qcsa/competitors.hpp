#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcsa/dataset.hpp"
#include "qcsa/qr.hpp"

namespace qcsa {

/// Jackknife model averaging over a caller-ordered list of models.
struct JmaPredictor {
  double tau = 0.5;
  int p = 0;
  std::vector<std::vector<int>> models;  // dataset columns of each candidate
  Eigen::VectorXd weights;               // on the simplex
  std::vector<QuantileFit> fits;         // full-sample fit of each model
  double cv_objective = 0.0;             // leave-one-out mean check loss at `weights`
};

struct BagPredictor {
  double tau = 0.5;
  int p = 0;
  int B = 0;
  std::uint64_t seed = 0;
  std::vector<int> columns;
  std::vector<QuantileFit> fits;
  int ridge_count = 0;  // resamples that needed the ridge path
};

/// A penalized fit together with the tuning value that produced it. theta is
/// expressed on the original columns (all p of them).
struct TunedFit {
  QuantileFit fit;
  double lambda = 0.0;
  std::vector<double> cv_losses;  // per grid value, when chosen by cross-validation
};

/// Nested prefixes {c0}, {c0,c1}, ..., {c0,...,c_{m-1}} of `order`.
std::vector<std::vector<int>> nested_models(std::span<const int> order);

/// Weights minimize the leave-one-out check loss of the weighted prediction over
/// the simplex; solved exactly as a linear program.
JmaPredictor fit_jma(const Dataset& data, double tau, const std::vector<std::vector<int>>& models,
                     const SolverOptions& opts = {});

/// Leave-one-out predictions of each model: column m holds x_i' theta_{-i}(m).
Eigen::MatrixXd jackknife_predictions(const Dataset& data, double tau, const std::vector<std::vector<int>>& models,
                                      const SolverOptions& opts = {}, std::vector<QuantileFit>* full_fits = nullptr);

/// argmin over the simplex of mean_i rho_tau(y_i - P_i' w).
Eigen::VectorXd simplex_quantile_weights(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, double tau);

double jma_predict(const JmaPredictor& jma, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Bootstrap aggregation of the full-column quantile regression.
BagPredictor fit_bag(const Dataset& data, double tau, int B, std::uint64_t seed, const SolverOptions& opts = {},
                     int threads = 1);

/// Bagging over explicitly supplied resamples (row index lists).
BagPredictor fit_bag_resamples(const Dataset& data, double tau, const std::vector<std::vector<int>>& resamples,
                               const SolverOptions& opts = {}, int threads = 1);

double bag_predict(const BagPredictor& bag, const Eigen::Ref<const Eigen::VectorXd>& x);

/// l1-penalized fit on columns rescaled to unit mean square, lambda from belloni_lambda.
TunedFit fit_l1qr(const Dataset& data, double tau, const SolverOptions& opts = {}, double confidence = 0.9,
                  int n_sim = 1000, std::uint64_t seed = 0);

/// Squared-l2 penalty picked by seeded `folds`-fold CV over `grid` (smallest lambda on ties), then refit.
TunedFit fit_l2qr_cv(const Dataset& data, double tau, std::span<const double> grid, int folds, std::uint64_t seed,
                     const SolverOptions& opts = {});

}  // namespace qcsa
