#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "qcsa/dataset.hpp"
#include "qcsa/methods.hpp"

namespace qcsa {

/// Reads `outcome` and `regressors` (empty: every other column, in file order).
/// With `add_intercept` an all-ones column named "const" is prepended.
/// Throws MissingColumn, NonNumericCell (naming row and column) or EmptyData.
Dataset load_csv(const std::string& path, const std::string& outcome, const std::vector<std::string>& regressors,
                 bool add_intercept);

/// Lower minimizer of the mean check loss: the ceil(n*tau)-th order statistic.
double unconditional_quantile(const Eigen::Ref<const Eigen::VectorXd>& y, double tau);

/// 1 - method_loss / benchmark_loss; unset when the benchmark loss is zero.
std::optional<double> oos_r2(double method_loss, double benchmark_loss);

struct KHatStats {
  std::optional<double> mean;
  std::optional<double> median;
};
KHatStats k_hat_stats(const std::vector<std::optional<int>>& k_hats);

struct RollingSpec {
  int T1 = 60;
  double tau = 0.5;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 0;

  void validate(Eigen::Index T) const;
};

struct ForecastSeries {
  std::string label;
  std::vector<double> forecast;
  std::vector<double> loss;
  std::vector<std::optional<int>> k_hat;
  std::optional<double> r2;
  KHatStats k_stats;
};

struct RollingResult {
  std::vector<int> origin;  // 1-based index t of the last window row; the target is row t + 1
  std::vector<double> realized;
  ForecastSeries benchmark;  // unconditional quantile of each window
  std::vector<ForecastSeries> methods;
};

/// One-step-ahead forecasts from windows of T1 consecutive rows. Rows must be
/// in time order and pre-aligned: row t holds the outcome for t and the
/// regressors known when forecasting it.
RollingResult rolling_forecast(const Dataset& data, const RollingSpec& spec, int threads = 1);

struct SplitSpec {
  int n1 = 50;
  int reps = 200;
  double tau = 0.5;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 0;

  void validate(Eigen::Index n) const;
};

/// Rows of split `s`: the first n1 entries are the estimation sample (ascending),
/// the rest the evaluation sample (ascending).
std::vector<int> split_rows(Eigen::Index n, int n1, std::uint64_t seed, int s);

struct SplitSeries {
  std::string label;
  std::vector<std::optional<double>> r2;  // per split
  std::vector<std::optional<int>> k_hat;
  std::optional<double> mean_r2;
  std::optional<double> sd_r2;
  KHatStats k_stats;
};

struct SplitResult {
  std::vector<SplitSeries> methods;
};

SplitResult random_split_eval(const Dataset& data, const SplitSpec& spec, int threads = 1);

/// Per-origin CSV: schema_version,t,method,forecast,realized,loss (benchmark rows labelled BENCHMARK).
void write_forecasts_csv(const std::string& path, const RollingResult& result);
nlohmann::json rolling_summary_json(const RollingResult& result, const RollingSpec& spec);

/// Per-split CSV: schema_version,split,method,r2,k_hat.
void write_splits_csv(const std::string& path, const SplitResult& result);
nlohmann::json split_summary_json(const SplitResult& result, const SplitSpec& spec);

}  // namespace qcsa
