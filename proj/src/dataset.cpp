#include "qcsa/dataset.hpp"

#include <string>

#include "qcsa/error.hpp"

namespace qcsa {

void Dataset::validate() const {
  if (y.size() < 1) throw DataError("dataset has no rows");
  if (X.cols() < 1) throw DataError("dataset has no regressors");
  if (X.rows() != y.size()) {
    throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
  }
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != X.cols()) {
    throw DimensionMismatch("expected " + std::to_string(X.cols()) + " column names, got " +
                            std::to_string(names.size()));
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw DataError("non-finite outcome at row " + std::to_string(i));
  }
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (!std::isfinite(X(i, j))) {
        throw DataError("non-finite regressor at row " + std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
  if (intercept_col) {
    const int c = *intercept_col;
    if (c < 0 || c >= X.cols()) throw InvalidParameter("intercept column out of range");
    if (!(X.col(c).array() == 1.0).all()) {
      throw DataError("intercept column " + std::to_string(c) + " is not all ones");
    }
  }
}

Dataset Dataset::rows(std::span<const int> idx) const {
  Dataset out;
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    out.y[rr] = y[idx[r]];
    out.X.row(rr) = X.row(idx[r]);
  }
  out.names = names;
  out.intercept_col = intercept_col;
  return out;
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::optional<int> intercept_col) {
  Dataset d;
  d.y = std::move(y);
  d.X = std::move(X);
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) d.names.push_back("x" + std::to_string(j + 1));
  d.intercept_col = intercept_col;
  d.validate();
  return d;
}

}  // namespace qcsa
