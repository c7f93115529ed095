#include "qcsa/csa.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "qcsa/error.hpp"
#include "qcsa/parallel.hpp"
#include "qcsa/seed.hpp"

namespace qcsa {
namespace {

std::vector<int> column_pool(const Dataset& data, bool force_intercept) {
  std::vector<int> pool;
  if (force_intercept && !data.intercept_col) {
    throw InvalidParameter("force_intercept requires a dataset with an intercept column");
  }
  for (int j = 0; j < data.p(); ++j) {
    if (force_intercept && j == *data.intercept_col) continue;
    pool.push_back(j);
  }
  return pool;
}

std::string describe(const std::vector<int>& cols) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '}';
  return os.str();
}

struct KEvaluation {
  CsaFitForK full;
  double cv = 0.0;
};

// Full-sample fits of the size-k plan and, when `mode` is set, the holdout
// CSA predictions scored by mean check loss.
KEvaluation evaluate_k(const Dataset& data, double tau, int k, std::size_t cap, std::uint64_t seed,
                       std::optional<CvMode> mode, const SolverOptions& opts, bool force_intercept, int threads) {
  data.validate();
  opts.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("quantile level must lie in (0,1)");
  const std::vector<int> pool = column_pool(data, force_intercept);
  const int K = static_cast<int>(pool.size());
  if (k < 1 || k > K) {
    throw InvalidParameter("subset size k=" + std::to_string(k) + " outside [1, " + std::to_string(K) + "]");
  }
  const Eigen::Index n = data.n();
  const int width = k + (force_intercept ? 1 : 0);

  std::vector<int> folds;
  if (mode) {
    if (mode->kind == CvMode::Kind::LeaveOneOut) {
      if (n < width + 2) {
        throw DataError("leave-one-out CV with " + std::to_string(width) + " regressors needs at least " +
                        std::to_string(width + 2) + " observations, got " + std::to_string(n));
      }
    } else {
      if (mode->folds < 2 || mode->folds > n) throw InvalidParameter("b-fold CV needs 2 <= b <= n");
      const Eigen::Index largest = (n + mode->folds - 1) / mode->folds;
      if (n - largest < width + 1) {
        throw DataError("b-fold CV leaves " + std::to_string(n - largest) + " estimation rows for " +
                        std::to_string(width) + " regressors");
      }
      folds = assign_folds(n, mode->folds, derive_seed(seed, stream::kFolds));
    }
  }

  KEvaluation ev;
  CsaFitForK& out = ev.full;
  out.k = k;
  out.tau = tau;
  out.p = static_cast<int>(data.p());
  out.plan = sample_subsets(K, k, cap, derive_seed(seed, stream::kSubsets + static_cast<std::uint64_t>(k)));
  const std::size_t M = out.plan.selected.size();
  out.columns.resize(M);
  out.fits.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    auto& cols = out.columns[m];
    if (force_intercept) cols.push_back(*data.intercept_col);
    for (int member : out.plan.selected[m].members) cols.push_back(pool[static_cast<std::size_t>(member)]);
  }

  Eigen::MatrixXd holdout_pred;
  if (mode) holdout_pred.resize(n, static_cast<Eigen::Index>(M));

  parallel_for(M, threads, [&](std::size_t m) {
    const auto& cols = out.columns[m];
    try {
      const Eigen::MatrixXd Xm = select_columns(data, cols);
      out.fits[m] = fit_qr_matrix(Xm, data.y, tau, opts);
      if (!mode) return;
      auto col = holdout_pred.col(static_cast<Eigen::Index>(m));
      if (mode->kind == CvMode::Kind::LeaveOneOut) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const int drop = static_cast<int>(i);
          const QuantileFit f = refit_without(Xm, data.y, tau, out.fits[m], std::span<const int>(&drop, 1), opts);
          col[i] = Xm.row(i).dot(f.theta);
        }
      } else {
        std::vector<int> held;
        for (int f = 0; f < mode->folds; ++f) {
          held.clear();
          for (Eigen::Index i = 0; i < n; ++i) {
            if (folds[static_cast<std::size_t>(i)] == f) held.push_back(static_cast<int>(i));
          }
          const QuantileFit fit = refit_without(Xm, data.y, tau, out.fits[m], held, opts);
          for (int i : held) col[i] = Xm.row(i).dot(fit.theta);
        }
      }
    } catch (const std::exception& e) {
      throw DataError("subset " + describe(cols) + " (k=" + std::to_string(k) + "): " + e.what());
    }
  });

  if (mode) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(M); ++m) s += holdout_pred(i, m);
      loss += check_loss(data.y[i] - s / static_cast<double>(M), tau);
    }
    ev.cv = loss / static_cast<double>(n);
  }
  return ev;
}

int resolve_k_use(const Dataset& data, int K_use, bool force_intercept) {
  const int K = available_columns(data, force_intercept);
  if (K_use == 0) return K;
  if (K_use < 1 || K_use > K) {
    throw InvalidParameter("K_use=" + std::to_string(K_use) + " outside [1, " + std::to_string(K) + "]");
  }
  return K_use;
}

}  // namespace

std::string CvMode::label() const {
  return kind == Kind::LeaveOneOut ? "loo" : "bfold:" + std::to_string(folds);
}

CvMode CvMode::parse(const std::string& text) {
  if (text == "loo") return loo();
  if (text.rfind("bfold:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int b = std::stoi(text.substr(6), &used);
      if (used == text.size() - 6) return bfold(b);
    } catch (const std::exception&) {
    }
  }
  throw InvalidParameter("unknown CV mode '" + text + "' (expected loo or bfold:<b>)");
}

int available_columns(const Dataset& data, bool force_intercept) {
  return static_cast<int>(column_pool(data, force_intercept).size());
}

std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  if (folds < 1 || folds > n) throw InvalidParameter("fold count must lie in [1, n]");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < perm.size(); ++pos) out[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return out;
}

CsaFitForK fit_csa_for_k(const Dataset& data, double tau, int k, std::size_t cap, std::uint64_t seed,
                         const SolverOptions& opts, bool force_intercept, int threads) {
  return evaluate_k(data, tau, k, cap, seed, std::nullopt, opts, force_intercept, threads).full;
}

double csa_predict(const CsaFitForK& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != fit.p) {
    throw DimensionMismatch("csa_predict: expected " + std::to_string(fit.p) + " regressors, got " +
                            std::to_string(x.size()));
  }
  if (fit.fits.empty()) throw InvalidParameter("csa_predict: no fitted subsets");
  double s = 0.0;
  for (std::size_t m = 0; m < fit.fits.size(); ++m) {
    const auto& cols = fit.columns[m];
    const auto& theta = fit.fits[m].theta;
    double v = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) v += x[cols[j]] * theta[static_cast<Eigen::Index>(j)];
    s += v;
  }
  return s / static_cast<double>(fit.fits.size());
}

double csa_predict(const CsaPredictor& predictor, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return csa_predict(predictor.final, x);
}

double cv_value(const Dataset& data, double tau, int k, std::size_t cap, std::uint64_t seed, CvMode mode,
                const SolverOptions& opts, bool force_intercept, int threads) {
  return evaluate_k(data, tau, k, cap, seed, mode, opts, force_intercept, threads).cv;
}

CvCurve select_k(const Dataset& data, double tau, int K_use, std::size_t cap, std::uint64_t seed, CvMode mode,
                 const SolverOptions& opts, bool force_intercept, int threads) {
  const int K = resolve_k_use(data, K_use, force_intercept);
  CvCurve curve;
  curve.mode = mode;
  curve.values.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    curve.values.push_back(cv_value(data, tau, k, cap, seed, mode, opts, force_intercept, threads));
  }
  curve.k_hat = 1 + static_cast<int>(std::min_element(curve.values.begin(), curve.values.end()) - curve.values.begin());
  return curve;
}

CsaPredictor fit_csa(const Dataset& data, double tau, const CsaConfig& config) {
  const int K = resolve_k_use(data, config.K_use, config.force_intercept);
  const CvMode mode = config.mode.value_or(CvMode::automatic(data.n()));
  CsaPredictor pred;
  pred.seed = config.seed;
  pred.cap = config.cap;
  pred.force_intercept = config.force_intercept;
  pred.names = data.names;
  pred.curve.mode = mode;
  double best = 0.0;
  for (int k = 1; k <= K; ++k) {
    KEvaluation ev = evaluate_k(data, tau, k, config.cap, config.seed, mode, config.opts, config.force_intercept,
                                config.threads);
    pred.curve.values.push_back(ev.cv);
    if (k == 1 || ev.cv < best) {  // strict: ties keep the smaller k
      best = ev.cv;
      pred.curve.k_hat = k;
      pred.final = std::move(ev.full);
    }
  }
  return pred;
}

}  // namespace qcsa
