#include "qcsa/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>

#include "qcsa/csv.hpp"
#include "qcsa/error.hpp"
#include "qcsa/parallel.hpp"
#include "qcsa/seed.hpp"

namespace qcsa {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Draws one row of equicorrelated normals into x[first..end) via the one-factor form.
void fill_equicorrelated(std::mt19937_64& rng, double rho, double* x, Eigen::Index count) {
  std::normal_distribution<double> normal;
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  const double z = normal(rng);
  for (Eigen::Index j = 0; j < count; ++j) x[j] = a * z + b * normal(rng);
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string family_name(SimFamily f) { return f == SimFamily::Misspecified ? "misspecified" : "correct"; }

SimFamily parse_family(const std::string& text) {
  if (text == "misspecified") return SimFamily::Misspecified;
  if (text == "correct") return SimFamily::Correct;
  throw InvalidParameter("unknown design family '" + text + "' (expected misspecified or correct)");
}

std::string signal_name(Signal s) {
  switch (s) {
    case Signal::Decreasing: return "decreasing";
    case Signal::Constant: return "constant";
    case Signal::Sparse: return "sparse";
  }
  throw InternalError("unknown signal");
}

Signal parse_signal(const std::string& text) {
  for (Signal s : {Signal::Decreasing, Signal::Constant, Signal::Sparse}) {
    if (text == signal_name(s)) return s;
  }
  throw InvalidParameter("unknown signal '" + text + "' (expected decreasing, constant or sparse)");
}

int SimDesign::observed() const {
  if (K > 0) return K;
  return static_cast<int>(std::floor(4.0 * std::log(static_cast<double>(n))));
}

void SimDesign::validate() const {
  if (n < 2) throw InvalidParameter("design n must be at least 2");
  if (K < 0) throw InvalidParameter("design K must be nonnegative");
  if (observed() < 1) throw InvalidParameter("design observes no columns");
  if (family == SimFamily::Misspecified && observed() > p_latent) {
    throw InvalidParameter("design observes " + std::to_string(observed()) + " columns but has only " +
                           std::to_string(p_latent) + " latent ones");
  }
  if (!(R2 >= 0.0 && R2 < 1.0)) throw InvalidParameter("design R2 must lie in [0,1)");
  if (!(rho_x >= 0.0 && rho_x < 1.0)) throw InvalidParameter("design rho_x must lie in [0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("design tau must lie in (0,1)");
  if (n_test < 1) throw InvalidParameter("design n_test must be at least 1");
  if (R < 1) throw InvalidParameter("design R must be at least 1");
}

Eigen::VectorXd design_coefficients(const SimDesign& design) {
  const int p = design.latent();
  Eigen::VectorXd beta(p);
  if (design.family == SimFamily::Misspecified) {
    for (int j = 0; j < p; ++j) beta[j] = 1.0 / (j + 1.0);
    return beta;
  }
  // Correct family: column 0 is the constant and carries no weight; the
  // signal pattern runs over the stochastic columns 1..p-1.
  beta[0] = 0.0;
  for (int j = 1; j < p; ++j) {
    switch (design.signal) {
      case Signal::Decreasing: beta[j] = 1.0 / j; break;
      case Signal::Constant: beta[j] = 1.0; break;
      case Signal::Sparse: beta[j] = j <= 2 ? 1.0 : 0.0; break;
    }
  }
  return beta;
}

Eigen::MatrixXd gen_equicorrelated_normal(Eigen::Index n, Eigen::Index p, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidParameter("equicorrelation must lie in [0,1)");
  if (n < 0 || p < 0) throw InvalidParameter("matrix dimensions must be nonnegative");
  std::mt19937_64 rng(seed);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) fill_equicorrelated(rng, rho, X.row(i).data(), p);
  return X;
}

double solve_theta_for_r2(const SimDesign& design, const Eigen::VectorXd& coeffs) {
  if (!(design.R2 >= 0.0 && design.R2 < 1.0)) throw InvalidParameter("design R2 must lie in [0,1)");
  if (design.R2 == 0.0) return 0.0;
  if (coeffs.size() < 1) throw InvalidParameter("no coefficients");
  const Eigen::VectorXd stochastic = coeffs.tail(coeffs.size() - 1);
  const double sum = stochastic.sum();
  const double V = (1.0 - design.rho_x) * stochastic.squaredNorm() + design.rho_x * sum * sum;
  if (!(V > 0.0)) throw InvalidParameter("impossible design: the signal has zero variance but R2 > 0");
  return std::sqrt((design.R2 / (1.0 - design.R2)) / V);
}

Replication gen_replication(const SimDesign& design, std::uint64_t rep_seed) {
  design.validate();
  const Eigen::VectorXd beta = design_coefficients(design);
  const double theta = solve_theta_for_r2(design, beta);
  const int p = design.latent();
  const int K = design.observed();
  const int rows = design.n + design.n_test;

  std::mt19937_64 rng(rep_seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(rows, K);
  Eigen::VectorXd y(rows);
  std::vector<double> x(static_cast<std::size_t>(p));
  for (int i = 0; i < rows; ++i) {
    x[0] = 1.0;
    fill_equicorrelated(rng, design.rho_x, x.data() + 1, p - 1);
    double signal = 0.0;
    for (int j = 0; j < p; ++j) signal += beta[j] * x[static_cast<std::size_t>(j)];
    y[i] = theta * signal + normal(rng);
    for (int j = 0; j < K; ++j) X(i, j) = x[static_cast<std::size_t>(j)];
  }

  Replication rep;
  rep.train = make_dataset(y.head(design.n), X.topRows(design.n), 0);
  rep.test = make_dataset(y.tail(design.n_test), X.bottomRows(design.n_test), 0);
  return rep;
}

double fpe_of(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y, double tau) {
  if (predictions.size() != y.size()) throw DimensionMismatch("fpe: prediction and outcome lengths differ");
  if (y.size() == 0) throw DataError("fpe: empty test set");
  return mean_check_loss(y - predictions, tau);
}

double fpe_of(const FittedMethod& method, const Dataset& test, double tau) {
  Eigen::VectorXd pred(test.n());
  for (Eigen::Index i = 0; i < test.n(); ++i) pred[i] = method.predict(test.X.row(i).transpose());
  return fpe_of(pred, test.y, tau);
}

std::vector<MethodSummary> summarize_fpe(const std::vector<std::string>& labels, const Eigen::MatrixXd& fpe,
                                         std::optional<int> csa_index, int* complete) {
  const Eigen::Index R = fpe.rows();
  const Eigen::Index M = fpe.cols();
  std::vector<MethodSummary> out(static_cast<std::size_t>(M));

  std::vector<double> wins(static_cast<std::size_t>(M), 0.0);
  int n_complete = 0;
  for (Eigen::Index r = 0; r < R; ++r) {
    if (fpe.row(r).hasNaN()) continue;
    ++n_complete;
    Eigen::Index best = 0;
    const double lo = fpe.row(r).minCoeff(&best);
    int ties = 0;
    for (Eigen::Index m = 0; m < M; ++m) ties += fpe(r, m) == lo ? 1 : 0;
    if (ties == 1) wins[static_cast<std::size_t>(best)] += 1.0;
  }
  if (complete) *complete = n_complete;

  for (Eigen::Index m = 0; m < M; ++m) {
    auto& s = out[static_cast<std::size_t>(m)];
    s.label = labels[static_cast<std::size_t>(m)];
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index r = 0; r < R; ++r) {
      if (std::isnan(fpe(r, m))) {
        ++s.failures;
      } else {
        sum += fpe(r, m);
        ++count;
      }
    }
    if (count > 0) {
      const double mean = sum / count;
      double ss = 0.0;
      for (Eigen::Index r = 0; r < R; ++r) {
        if (!std::isnan(fpe(r, m))) ss += (fpe(r, m) - mean) * (fpe(r, m) - mean);
      }
      s.avg_fpe = mean;
      s.sd_fpe = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    }
    if (n_complete > 0) s.winning_ratio = wins[static_cast<std::size_t>(m)] / n_complete;
    if (csa_index && *csa_index != m) {
      int pairs = 0;
      int losses = 0;
      for (Eigen::Index r = 0; r < R; ++r) {
        const double c = fpe(r, *csa_index);
        const double v = fpe(r, m);
        if (std::isnan(c) || std::isnan(v)) continue;
        ++pairs;
        losses += c < v ? 1 : 0;
      }
      if (pairs > 0) s.loss_to_csa = static_cast<double>(losses) / pairs;
    }
  }
  return out;
}

StudyResult run_study(const SimDesign& design, const std::vector<MethodSpec>& methods, std::uint64_t master_seed,
                      int threads, const ProgressFn& progress) {
  design.validate();
  if (methods.empty()) throw InvalidParameter("study needs at least one method");
  const auto M = static_cast<Eigen::Index>(methods.size());
  std::optional<int> csa_index;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (methods[m].kind == MethodKind::Csa) {
      csa_index = static_cast<int>(m);
      break;
    }
  }

  StudyResult result;
  result.csa_index = csa_index;
  for (const auto& spec : methods) result.methods.push_back(spec.display());
  result.fpe = Eigen::MatrixXd::Constant(design.R, M, kNaN);
  result.k_hat.assign(static_cast<std::size_t>(design.R), std::nullopt);
  std::vector<std::vector<std::string>> errors(static_cast<std::size_t>(design.R));

  std::atomic<int> done{0};
  std::mutex progress_mu;
  parallel_for(static_cast<std::size_t>(design.R), threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(master_seed, stream::kReplication + r);
    const Replication rep = gen_replication(design, rep_seed);
    for (Eigen::Index m = 0; m < M; ++m) {
      const auto& spec = methods[static_cast<std::size_t>(m)];
      try {
        const FittedMethod fitted = fit_method(spec, rep.train, design.tau, rep_seed, {}, 1);
        result.fpe(static_cast<Eigen::Index>(r), m) = fpe_of(fitted, rep.test, design.tau);
        if (csa_index && m == *csa_index) result.k_hat[r] = fitted.k_hat();
      } catch (const std::exception& e) {
        errors[r].push_back("rep " + std::to_string(r) + ", " + spec.display() + ": " + e.what());
      }
    }
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mu);
      progress(++done, design.R);
    }
  });

  for (auto& e : errors) {
    for (auto& msg : e) result.failure_messages.push_back(std::move(msg));
  }
  result.summary = summarize_fpe(result.methods, result.fpe, csa_index, &result.complete);
  return result;
}

nlohmann::json design_json(const SimDesign& d) {
  nlohmann::json j = {{"family", family_name(d.family)}, {"n", d.n},       {"K", d.observed()},
                      {"R2", d.R2},                      {"tau", d.tau},   {"rho_x", d.rho_x},
                      {"n_test", d.n_test},              {"R", d.R}};
  if (d.family == SimFamily::Misspecified) {
    j["p_latent"] = d.p_latent;
  } else {
    j["signal"] = signal_name(d.signal);
  }
  return j;
}

void write_study_csv(const std::string& path, const SimDesign& d, const StudyResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << csv_line({"schema_version", "family", "signal", "n", "K", "R2", "tau", "rho_x", "n_test", "method",
                   "replication", "fpe", "k_hat"});
  const std::string signal = d.family == SimFamily::Correct ? signal_name(d.signal) : "";
  for (Eigen::Index r = 0; r < result.fpe.rows(); ++r) {
    for (Eigen::Index m = 0; m < result.fpe.cols(); ++m) {
      const auto& k = result.k_hat[static_cast<std::size_t>(r)];
      const bool is_csa = result.csa_index && *result.csa_index == m;
      out << csv_line({"1", family_name(d.family), signal, std::to_string(d.n), std::to_string(d.observed()),
                       format_number(d.R2), format_number(d.tau), format_number(d.rho_x), std::to_string(d.n_test),
                       result.methods[static_cast<std::size_t>(m)], std::to_string(r),
                       format_number(result.fpe(r, m)), is_csa && k ? std::to_string(*k) : ""});
    }
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

nlohmann::json study_summary_json(const SimDesign& d, const StudyResult& result, std::uint64_t master_seed) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& s : result.summary) {
    methods.push_back({{"label", s.label},
                       {"avg_fpe", opt_json(s.avg_fpe)},
                       {"sd_fpe", opt_json(s.sd_fpe)},
                       {"winning_ratio", opt_json(s.winning_ratio)},
                       {"loss_to_csa", opt_json(s.loss_to_csa)},
                       {"failures", s.failures}});
  }
  std::vector<double> ks;
  for (const auto& k : result.k_hat) {
    if (k) ks.push_back(*k);
  }
  std::optional<double> mean_k;
  if (!ks.empty()) {
    double s = 0.0;
    for (double v : ks) s += v;
    mean_k = s / static_cast<double>(ks.size());
  }
  return {{"schema_version", 1},
          {"design", design_json(d)},
          {"master_seed", master_seed},
          {"complete_replications", result.complete},
          {"mean_k_hat", opt_json(mean_k)},
          {"methods", methods},
          {"failures", result.failure_messages}};
}

}  // namespace qcsa
