#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcsa/dataset.hpp"
#include "qcsa/qr.hpp"
#include "qcsa/subsets.hpp"

namespace qcsa {

/// Holdout scheme for the cross-validation criterion.
struct CvMode {
  enum class Kind { LeaveOneOut, BFold };
  Kind kind = Kind::LeaveOneOut;
  int folds = 0;

  static CvMode loo() { return {}; }
  static CvMode bfold(int b) { return {Kind::BFold, b}; }
  /// 10-fold for n >= 150, leave-one-out below.
  static CvMode automatic(Eigen::Index n) { return n >= 150 ? bfold(10) : loo(); }

  std::string label() const;
  static CvMode parse(const std::string& text);  // "loo" or "bfold:<b>"

  friend bool operator==(const CvMode&, const CvMode&) = default;
};

/// Full-sample fits of every subset in the plan for one subset size.
struct CsaFitForK {
  int k = 0;
  double tau = 0.5;
  int p = 0;  // width of the dataset the fits index into
  SubsetPlan plan;
  std::vector<std::vector<int>> columns;  // dataset columns of each subset, forced intercept first
  std::vector<QuantileFit> fits;
};

struct CvCurve {
  std::vector<double> values;  // values[k - 1] = CV_n(k)
  int k_hat = 0;
  CvMode mode;
};

struct CsaConfig {
  int K_use = 0;  // largest subset size tried; 0 means all available columns
  std::size_t cap = 100;
  std::uint64_t seed = 0;
  std::optional<CvMode> mode;  // unset: CvMode::automatic(n)
  bool force_intercept = false;
  SolverOptions opts;
  int threads = 1;
};

/// Selected subset size, its full-sample fits and the CV curve it came from.
struct CsaPredictor {
  CvCurve curve;
  CsaFitForK final;
  std::uint64_t seed = 0;
  std::size_t cap = 0;
  bool force_intercept = false;
  std::vector<std::string> names;
};

/// Number of columns subsets are drawn from (p, or p - 1 with a forced intercept).
int available_columns(const Dataset& data, bool force_intercept);

/// Fits every subset of the size-k plan on the full sample.
CsaFitForK fit_csa_for_k(const Dataset& data, double tau, int k, std::size_t cap, std::uint64_t seed,
                         const SolverOptions& opts = {}, bool force_intercept = false, int threads = 1);

/// Equal-weight average of the subset predictions, summed in plan order.
double csa_predict(const CsaFitForK& fit, const Eigen::Ref<const Eigen::VectorXd>& x);
double csa_predict(const CsaPredictor& predictor, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Cross-validated mean check loss of the size-k CSA predictor. One subset plan
/// per k is shared by all holdout refits; refits start from the full-sample
/// basic solution.
double cv_value(const Dataset& data, double tau, int k, std::size_t cap, std::uint64_t seed, CvMode mode,
                const SolverOptions& opts = {}, bool force_intercept = false, int threads = 1);

/// CV_n(k) for k = 1..K_use and the smallest minimizer.
CvCurve select_k(const Dataset& data, double tau, int K_use, std::size_t cap, std::uint64_t seed, CvMode mode,
                 const SolverOptions& opts = {}, bool force_intercept = false, int threads = 1);

/// select_k followed by the full-sample fit at k_hat (same plan as in CV).
CsaPredictor fit_csa(const Dataset& data, double tau, const CsaConfig& config);

/// Holdout fold of every row: seeded, sizes differ by at most one.
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed);

}  // namespace qcsa
