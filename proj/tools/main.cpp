#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "config.hpp"
#include "qcsa/csa.hpp"
#include "qcsa/csv.hpp"
#include "qcsa/empirical.hpp"
#include "qcsa/error.hpp"
#include "qcsa/serialize.hpp"
#include "qcsa/simulate.hpp"

#ifndef QCSA_VERSION
#define QCSA_VERSION "unknown"
#endif

namespace {

using nlohmann::json;
using namespace qcsa;
using cli::ConfigError;

// Command-line values that override the config file.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<double> tau;
  std::optional<std::size_t> mmax;
  bool force_intercept = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--tau", o.tau, "Quantile level");
  cmd->add_option("--mmax", o.mmax, "Cap on subsets per size for CSA")->check(CLI::PositiveNumber);
  cmd->add_flag("--force-intercept", o.force_intercept, "Keep the intercept in every CSA subset");
}

void apply(cli::Common& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.out_dir) c.out_dir = *o.out_dir;
}

void apply(std::vector<MethodSpec>& methods, const Overrides& o) {
  for (auto& m : methods) {
    if (m.kind != MethodKind::Csa) continue;
    if (o.mmax) m.cap = *o.mmax;
    if (o.force_intercept) m.force_intercept = true;
  }
}

json methods_json(const std::vector<MethodSpec>& methods) {
  json arr = json::array();
  for (const auto& m : methods) arr.push_back(cli::method_json(m));
  return arr;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& config,
                    const cli::Common& common, double seconds, const std::vector<std::string>& outputs) {
  write_json(dir / "manifest.json", {{"schema_version", 1},
                                     {"command", command},
                                     {"code_version", QCSA_VERSION},
                                     {"seed", common.seed},
                                     {"threads", common.threads},
                                     {"wall_time_seconds", seconds},
                                     {"config", config},
                                     {"outputs", outputs}});
}

Dataset load(const cli::DataSource& src) {
  if (src.path.empty()) throw ConfigError("no data file given");
  return load_csv(src.path, src.outcome, src.regressors, src.intercept);
}

json data_json(const cli::DataSource& d) {
  return {{"path", d.path}, {"outcome", d.outcome}, {"regressors", d.regressors}, {"intercept", d.intercept}};
}

std::string opt_text(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int cmd_simulate(const Overrides& o) {
  const auto t0 = Clock::now();
  if (o.config.empty()) throw ConfigError("simulate requires --config");
  cli::SimulateConfig cfg = cli::parse_simulate(cli::read_config_file(o.config));
  apply(cfg.common, o);
  if (o.tau) {
    cfg.design.tau = *o.tau;
    cfg.design.validate();
  }
  apply(cfg.methods, o);

  std::cerr << "simulate: " << cfg.design.R << " replications, " << cfg.methods.size() << " methods, "
            << cfg.common.threads << " threads\n";
  int last_pct = -1;
  const StudyResult result = run_study(cfg.design, cfg.methods, cfg.common.seed, cfg.common.threads,
                                       [&](int done, int total) {
                                         const int pct = 100 * done / total;
                                         if (pct / 10 != last_pct / 10 || done == total) {
                                           last_pct = pct;
                                           std::cerr << "  " << done << "/" << total << " replications\n";
                                         }
                                       });

  const auto dir = prepare_dir(cfg.common.out_dir);
  write_study_csv((dir / "study.csv").string(), cfg.design, result);
  const json summary = study_summary_json(cfg.design, result, cfg.common.seed);
  write_json(dir / "summary.json", summary);
  const json echo = {{"seed", cfg.common.seed},
                     {"threads", cfg.common.threads},
                     {"out_dir", cfg.common.out_dir},
                     {"design", design_json(cfg.design)},
                     {"methods", methods_json(cfg.methods)}};
  write_manifest(dir, "simulate", echo, cfg.common, since(t0), {"study.csv", "summary.json"});

  std::cout << "method,avg_fpe,sd_fpe,winning_ratio,loss_to_csa,failures\n";
  for (const auto& s : result.summary) {
    std::cout << s.label << ',' << opt_text(s.avg_fpe) << ',' << opt_text(s.sd_fpe) << ','
              << opt_text(s.winning_ratio) << ',' << opt_text(s.loss_to_csa) << ',' << s.failures << '\n';
  }
  for (const auto& msg : result.failure_messages) std::cerr << "  failed: " << msg << '\n';
  return 0;
}

int cmd_select_k(const Overrides& o, const std::string& data_path, const std::string& outcome,
                 const std::vector<std::string>& regressors, bool no_intercept, const std::string& cv, int K_use) {
  const auto t0 = Clock::now();
  cli::SelectKConfig cfg = o.config.empty() ? cli::SelectKConfig{} : cli::parse_select_k(cli::read_config_file(o.config));
  apply(cfg.common, o);
  if (!data_path.empty()) cfg.data.path = data_path;
  if (!outcome.empty()) cfg.data.outcome = outcome;
  if (!regressors.empty()) cfg.data.regressors = regressors;
  if (no_intercept) cfg.data.intercept = false;
  if (!cv.empty()) cfg.cv = CvMode::parse(cv);
  if (K_use > 0) cfg.K_use = K_use;
  if (o.tau) cfg.tau = *o.tau;
  if (o.mmax) cfg.cap = *o.mmax;
  if (o.force_intercept) cfg.force_intercept = true;

  const Dataset data = load(cfg.data);
  std::cerr << "select-k: n=" << data.n() << ", p=" << data.p() << "\n";
  CsaConfig csa;
  csa.K_use = cfg.K_use;
  csa.cap = cfg.cap;
  csa.seed = cfg.common.seed;
  csa.mode = cfg.cv;
  csa.force_intercept = cfg.force_intercept;
  csa.threads = cfg.common.threads;
  CsaPredictor predictor = fit_csa(data, cfg.tau, csa);
  predictor.names = data.names;

  const auto dir = prepare_dir(cfg.common.out_dir);
  write_json(dir / "csa_predictor.json", to_json(predictor));
  {
    std::ofstream out(dir / "cv_curve.csv", std::ios::binary);
    out << csv_line({"schema_version", "k", "cv"});
    for (std::size_t k = 0; k < predictor.curve.values.size(); ++k) {
      out << csv_line({"1", std::to_string(k + 1), format_number(predictor.curve.values[k])});
    }
  }
  const json echo = {{"seed", cfg.common.seed},       {"threads", cfg.common.threads},
                     {"out_dir", cfg.common.out_dir}, {"data", data_json(cfg.data)},
                     {"tau", cfg.tau},                {"cap", cfg.cap},
                     {"cv", predictor.curve.mode.label()}, {"K_use", cfg.K_use},
                     {"force_intercept", cfg.force_intercept}};
  write_manifest(dir, "select-k", echo, cfg.common, since(t0), {"csa_predictor.json", "cv_curve.csv"});

  std::cout << "k,cv\n";
  for (std::size_t k = 0; k < predictor.curve.values.size(); ++k) {
    std::cout << k + 1 << ',' << format_number(predictor.curve.values[k]) << '\n';
  }
  std::cout << "k_hat," << predictor.curve.k_hat << '\n';
  return 0;
}

int cmd_forecast_rolling(const Overrides& o, const std::string& data_path) {
  const auto t0 = Clock::now();
  if (o.config.empty()) throw ConfigError("forecast-rolling requires --config");
  cli::RollingConfig cfg = cli::parse_rolling(cli::read_config_file(o.config));
  apply(cfg.common, o);
  if (!data_path.empty()) cfg.data.path = data_path;
  if (o.tau) cfg.spec.tau = *o.tau;
  apply(cfg.spec.methods, o);
  cfg.spec.seed = cfg.common.seed;

  const Dataset data = load(cfg.data);
  std::cerr << "forecast-rolling: T=" << data.n() << ", T1=" << cfg.spec.T1 << ", "
            << data.n() - cfg.spec.T1 << " forecasts\n";
  const RollingResult result = rolling_forecast(data, cfg.spec, cfg.common.threads);

  const auto dir = prepare_dir(cfg.common.out_dir);
  write_forecasts_csv((dir / "forecasts.csv").string(), result);
  write_json(dir / "summary.json", rolling_summary_json(result, cfg.spec));
  const json echo = {{"seed", cfg.common.seed},       {"threads", cfg.common.threads},
                     {"out_dir", cfg.common.out_dir}, {"data", data_json(cfg.data)},
                     {"T1", cfg.spec.T1},             {"tau", cfg.spec.tau},
                     {"methods", methods_json(cfg.spec.methods)}};
  write_manifest(dir, "forecast-rolling", echo, cfg.common, since(t0), {"forecasts.csv", "summary.json"});

  std::cout << "method,oos_r2,mean_k_hat,median_k_hat\n";
  for (const auto& s : result.methods) {
    std::cout << s.label << ',' << opt_text(s.r2) << ',' << opt_text(s.k_stats.mean) << ','
              << opt_text(s.k_stats.median) << '\n';
  }
  return 0;
}

int cmd_eval_split(const Overrides& o, const std::string& data_path) {
  const auto t0 = Clock::now();
  if (o.config.empty()) throw ConfigError("eval-split requires --config");
  cli::SplitConfig cfg = cli::parse_split(cli::read_config_file(o.config));
  apply(cfg.common, o);
  if (!data_path.empty()) cfg.data.path = data_path;
  if (o.tau) cfg.spec.tau = *o.tau;
  apply(cfg.spec.methods, o);
  cfg.spec.seed = cfg.common.seed;

  const Dataset data = load(cfg.data);
  std::cerr << "eval-split: n=" << data.n() << ", n1=" << cfg.spec.n1 << ", " << cfg.spec.reps << " splits\n";
  const SplitResult result = random_split_eval(data, cfg.spec, cfg.common.threads);

  const auto dir = prepare_dir(cfg.common.out_dir);
  write_splits_csv((dir / "splits.csv").string(), result);
  write_json(dir / "summary.json", split_summary_json(result, cfg.spec));
  const json echo = {{"seed", cfg.common.seed},       {"threads", cfg.common.threads},
                     {"out_dir", cfg.common.out_dir}, {"data", data_json(cfg.data)},
                     {"n1", cfg.spec.n1},             {"reps", cfg.spec.reps},
                     {"tau", cfg.spec.tau},           {"methods", methods_json(cfg.spec.methods)}};
  write_manifest(dir, "eval-split", echo, cfg.common, since(t0), {"splits.csv", "summary.json"});

  std::cout << "method,mean_oos_r2,sd_oos_r2,mean_k_hat,median_k_hat\n";
  for (const auto& s : result.methods) {
    std::cout << s.label << ',' << opt_text(s.mean_r2) << ',' << opt_text(s.sd_r2) << ','
              << opt_text(s.k_stats.mean) << ',' << opt_text(s.k_stats.median) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complete subset averaging for quantile regression"};
  app.require_subcommand(1);

  Overrides o;

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  sim->add_option("--config", o.config, "JSON study config")->required();
  add_common_flags(sim, o);

  std::string sk_data, sk_outcome, sk_cv;
  std::vector<std::string> sk_regressors;
  bool sk_no_intercept = false;
  int sk_K_use = 0;
  auto* sk = app.add_subcommand("select-k", "Cross-validate the CSA subset size on a CSV file");
  sk->add_option("data", sk_data, "CSV file");
  sk->add_option("--config", o.config, "JSON config");
  sk->add_option("--outcome", sk_outcome, "Outcome column (default y)");
  sk->add_option("--regressors", sk_regressors, "Regressor columns (default: all others)")->delimiter(',');
  sk->add_flag("--no-intercept", sk_no_intercept, "Do not prepend a constant column");
  sk->add_option("--cv", sk_cv, "loo or bfold:<b> (default: 10-fold for n >= 150, else loo)");
  sk->add_option("--K-use", sk_K_use, "Largest subset size tried");
  add_common_flags(sk, o);

  std::string fr_data;
  auto* fr = app.add_subcommand("forecast-rolling", "Rolling-window one-step-ahead quantile forecasts");
  fr->add_option("data", fr_data, "CSV file (overrides data.path)");
  fr->add_option("--config", o.config, "JSON config")->required();
  add_common_flags(fr, o);

  std::string es_data;
  auto* es = app.add_subcommand("eval-split", "Repeated random-split out-of-sample evaluation");
  es->add_option("data", es_data, "CSV file (overrides data.path)");
  es->add_option("--config", o.config, "JSON config")->required();
  add_common_flags(es, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(o);
    if (*sk) return cmd_select_k(o, sk_data, sk_outcome, sk_regressors, sk_no_intercept, sk_cv, sk_K_use);
    if (*fr) return cmd_forecast_rolling(o, fr_data);
    if (*es) return cmd_eval_split(o, es_data);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
