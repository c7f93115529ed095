#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcsa {

/// Outcome vector plus regressor matrix; the common input of every estimator.
///
/// `intercept_col`, when set, names a column that is exactly all ones. Penalized
/// fits leave that column unpenalized and CSA can force it into every subset.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  std::optional<int> intercept_col;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  /// Throws DataError / DimensionMismatch when the invariants do not hold.
  void validate() const;

  /// Row subset, preserving names and intercept column.
  Dataset rows(std::span<const int> idx) const;
};

/// Builds a dataset with generated names x1..xp; validates it.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::optional<int> intercept_col = std::nullopt);

}  // namespace qcsa
