#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "qcsa/dataset.hpp"
#include "qcsa/methods.hpp"

namespace qcsa {

enum class SimFamily { Misspecified, Correct };
enum class Signal { Decreasing, Constant, Sparse };

std::string family_name(SimFamily f);
SimFamily parse_family(const std::string& text);
std::string signal_name(Signal s);
Signal parse_signal(const std::string& text);

/// One Monte Carlo design. Column 1 of every design is the constant; the
/// remaining columns are equicorrelated standard normals.
struct SimDesign {
  SimFamily family = SimFamily::Misspecified;
  Signal signal = Signal::Decreasing;  // correct family only
  int n = 50;
  int p_latent = 1000;  // misspecified family only
  int K = 0;            // observed columns; 0 means floor(4 ln n)
  double R2 = 0.5;
  double tau = 0.5;
  double rho_x = 0.9;
  int n_test = 100;
  int R = 1000;

  int observed() const;
  int latent() const { return family == SimFamily::Misspecified ? p_latent : observed(); }
  void validate() const;
};

/// Coefficients on the latent columns. Index 0 is the constant; in the correct
/// family it has weight 0 and the signal pattern starts at column 1.
Eigen::VectorXd design_coefficients(const SimDesign& design);

/// Rows i.i.d. N(0, Sigma) with unit variances and common correlation rho.
Eigen::MatrixXd gen_equicorrelated_normal(Eigen::Index n, Eigen::Index p, double rho, std::uint64_t seed);

/// Signal scale giving population R2 with unit-variance noise; the constant column is excluded.
double solve_theta_for_r2(const SimDesign& design, const Eigen::VectorXd& coeffs);

struct Replication {
  Dataset train;
  Dataset test;
};

Replication gen_replication(const SimDesign& design, std::uint64_t rep_seed);

/// Mean check loss of `method` on `test`.
double fpe_of(const FittedMethod& method, const Dataset& test, double tau);
double fpe_of(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y, double tau);

struct MethodSummary {
  std::string label;
  std::optional<double> avg_fpe;
  std::optional<double> sd_fpe;
  std::optional<double> winning_ratio;
  std::optional<double> loss_to_csa;  // unset for the reference CSA entry
  int failures = 0;
};

struct StudyResult {
  std::vector<std::string> methods;
  Eigen::MatrixXd fpe;  // R x methods, NaN where the fit failed
  std::optional<int> csa_index;  // first CSA entry, the reference for loss_to_csa and k_hat
  std::vector<std::optional<int>> k_hat;  // per replication
  std::vector<MethodSummary> summary;
  int complete = 0;  // replications in which every method succeeded
  std::vector<std::string> failure_messages;  // "rep r, METHOD: what"
};

using ProgressFn = std::function<void(int done, int total)>;

/// Runs design.R replications. Replication r draws its data from
/// derive_seed(master_seed, kReplication + r); results do not depend on `threads`.
StudyResult run_study(const SimDesign& design, const std::vector<MethodSpec>& methods, std::uint64_t master_seed,
                      int threads = 1, const ProgressFn& progress = {});

/// Recomputes the summary block from an FPE matrix (NaN entries are failures).
std::vector<MethodSummary> summarize_fpe(const std::vector<std::string>& labels, const Eigen::MatrixXd& fpe,
                                         std::optional<int> csa_index, int* complete = nullptr);

nlohmann::json design_json(const SimDesign& design);

/// Long format: one row per (replication, method).
void write_study_csv(const std::string& path, const SimDesign& design, const StudyResult& result);
nlohmann::json study_summary_json(const SimDesign& design, const StudyResult& result, std::uint64_t master_seed);

}  // namespace qcsa
