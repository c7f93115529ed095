// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--cli PATH] [--data-dir DIR] [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "qcsa/csa.hpp"
#include "qcsa/empirical.hpp"
#include "qcsa/seed.hpp"
#include "qcsa/simulate.hpp"
#include "qcsa/subsets.hpp"

namespace fs = std::filesystem;
using namespace qcsa;

namespace {

struct Outcome {
  enum class Status { Pass, Fail, Skip } status = Status::Fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Status::Skip, std::move(d)}; }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

struct SolverInstance {
  Dataset data;
  std::vector<int> cols;
  double tau;
};

std::vector<SolverInstance> solver_instances() {
  std::vector<SolverInstance> out;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> n_pick(5, 25);
  std::uniform_int_distribution<int> k_pick(1, 3);
  const double taus[] = {0.1, 0.5, 0.9};
  for (int i = 0; i < 200; ++i) {
    const int k = k_pick(rng);
    const int n = std::max(n_pick(rng), k + 1);
    const auto inst = oracle::random_instance(rng, n, k);
    std::vector<int> cols(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cols[static_cast<std::size_t>(j)] = j;
    out.push_back({make_dataset(inst.y, inst.X, 0), cols, taus[i % 3]});
  }
  return out;
}

Outcome criterion_solver_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  double worst = -1e300;
  for (const auto& s : solver_instances()) {
    const QuantileFit fit = fit_qr(s.data, s.cols, s.tau);
    const Eigen::MatrixXd X = s.data.X.leftCols(static_cast<Eigen::Index>(s.cols.size()));
    const double ref = oracle::best_basic_solution(X, s.data.y, s.tau).sum_loss;
    const double gap = fit.objective * static_cast<double>(s.data.n()) - ref;
    worst = std::max(worst, gap);
    if (gap > 1e-6) ++bad;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string d = "200 instances, worst objective gap " + std::to_string(worst) + ", " + fmt(secs, 1) + "s";
  return bad == 0 && secs < 60.0 ? pass(d) : fail(d + ", " + std::to_string(bad) + " above 1e-6");
}

Outcome criterion_sign_counts() {
  int checked = 0;
  int bad = 0;
  auto check = [&](const Dataset& d, const std::vector<int>& cols, double tau) {
    const QuantileFit fit = fit_qr(d, cols, tau);
    const SignCounts c = residual_sign_counts(fit, d, cols);
    const double nt = static_cast<double>(d.n()) * tau;
    ++checked;
    if (!(c.n_neg <= nt + 1e-9 && nt <= c.n_neg + c.n_zero + 1e-9)) ++bad;
  };
  for (const auto& s : solver_instances()) check(s.data, s.cols, s.tau);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    const auto inst = oracle::random_instance(rng, 60 + 4 * i, 1 + i % 8);
    std::vector<int> cols(static_cast<std::size_t>(inst.X.cols()));
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
    check(make_dataset(inst.y, inst.X, 0), cols, std::array{0.05, 0.25, 0.5, 0.75, 0.95}[static_cast<std::size_t>(i % 5)]);
  }
  const std::string d = std::to_string(checked) + " fits, " + std::to_string(bad) + " violations";
  return bad == 0 ? pass(d) : fail(d);
}

MethodSpec spec_of(MethodKind k) {
  MethodSpec m;
  m.kind = k;
  m.cap = 100;
  return m;
}

StudyResult study(const SimDesign& d, std::uint64_t seed) {
  std::fprintf(stderr, "  running %d replications on %d threads\n", d.R, worker_count());
  return run_study(d, {spec_of(MethodKind::Csa), spec_of(MethodKind::Jma)}, seed, worker_count());
}

Outcome criterion_reference_cell() {
  SimDesign d;
  d.n = 50;
  d.K = 15;
  d.R2 = 0.5;
  d.tau = 0.5;
  d.rho_x = 0.9;
  d.R = 200;
  const StudyResult r = study(d, 2024);
  const double csa = *r.summary[0].avg_fpe;
  const double jma = *r.summary[1].avg_fpe;
  const double loss = r.summary[1].loss_to_csa.value_or(0.0);
  const bool ok = std::abs(csa - 0.422) <= 0.015 && std::abs(jma - 0.445) <= 0.015 && csa < jma && loss > 0.70;
  const std::string detail = "CSA " + fmt(csa) + " (0.422), JMA " + fmt(jma) + " (0.445), JMA loss to CSA " +
                             fmt(100 * loss, 1) + "% (80.7%), failures " +
                             std::to_string(r.summary[0].failures + r.summary[1].failures);
  return ok ? pass(detail) : fail(detail);
}

Outcome criterion_independent() {
  SimDesign d;
  d.n = 50;
  d.R2 = 0.5;
  d.tau = 0.5;
  d.rho_x = 0.0;
  d.R = 200;
  const StudyResult r = study(d, 2024);
  const double csa = *r.summary[0].avg_fpe;
  const double jma = *r.summary[1].avg_fpe;
  const std::string detail = "JMA " + fmt(jma) + " vs CSA " + fmt(csa) + " (reference 0.488 vs 0.493)";
  return jma <= csa + 0.01 ? pass(detail) : fail(detail);
}

Outcome criterion_sparse() {
  SimDesign d;
  d.family = SimFamily::Correct;
  d.signal = Signal::Sparse;
  d.n = 50;
  d.K = 15;
  d.R2 = 0.5;
  d.tau = 0.5;
  d.rho_x = 0.9;
  d.R = 200;
  const StudyResult r = study(d, 2024);
  const double loss = r.summary[1].loss_to_csa.value_or(1.0);
  const std::string detail = "JMA loss to CSA " + fmt(100 * loss, 1) + "% (reference 52.3%), CSA " +
                             fmt(*r.summary[0].avg_fpe) + ", JMA " + fmt(*r.summary[1].avg_fpe);
  return loss < 0.60 ? pass(detail) : fail(detail);
}

Outcome criterion_subsets() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad_bijection = 0;
  for (int K = 1; K <= 12; ++K) {
    for (int k = 1; k <= K; ++k) {
      const auto total = count_combinations(K, k).convert_to<long>();
      std::vector<std::vector<int>> seen;
      for (long r = 0; r < total; ++r) {
        const SubsetModel s = unrank_combination(K, k, r);
        if (rank_combination(s) != r) ++bad_bijection;
        seen.push_back(s.members);
      }
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) ++bad_bijection;
    }
  }

  std::map<std::vector<int>, long> counts;
  const int seeds = 50000;
  for (int s = 0; s < seeds; ++s) {
    for (const auto& m : sample_subsets(8, 4, 10, derive_seed(4242, static_cast<std::uint64_t>(s))).selected) {
      ++counts[m.members];
    }
  }
  const double expected = seeds * 10.0 / 70.0;
  double stat = 0.0;
  for (const auto& [m, c] : counts) stat += (c - expected) * (c - expected) / expected;
  const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(69.0), 0.001));

  int bad_pascal = 0;
  for (int K = 1; K <= 30; ++K) {
    for (int k = 1; k < K; ++k) {
      if (count_combinations(K, k) != count_combinations(K - 1, k - 1) + count_combinations(K - 1, k)) ++bad_pascal;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = bad_bijection == 0 && counts.size() == 70 && stat < crit && bad_pascal == 0 && secs < 60.0;
  const std::string detail = "bijection errors " + std::to_string(bad_bijection) + ", chi-square " + fmt(stat, 2) +
                             " < " + fmt(crit, 2) + " on 69 df, Pascal errors " + std::to_string(bad_pascal) + ", " +
                             fmt(secs, 1) + "s";
  return ok ? pass(detail) : fail(detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return fail("CLI binary not found: '" + cli + "'");
  const fs::path dir = fs::temp_directory_path() / "qcsa_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"seed": 99,
    "design": {"family": "misspecified", "n": 30, "K": 6, "R2": 0.5, "tau": 0.5, "rho_x": 0.9, "n_test": 25, "R": 8},
    "methods": [{"name": "CSA", "cap": 10}, "JMA", {"name": "L1QR", "n_sim": 200}, {"name": "BAG", "B": 20},
                {"name": "L2QR", "folds": 5}]})";
  std::vector<std::string> files;
  const std::vector<std::pair<std::string, int>> runs{{"run1_t1", 1}, {"run2_t1", 1}, {"run3_t8", 8}, {"run4_t8", 8}};
  for (const auto& [name, threads] : runs) {
    const std::string cmd = "\"" + cli + "\" simulate --config \"" + (dir / "cfg.json").string() + "\" --threads " +
                            std::to_string(threads) + " --out-dir \"" + (dir / name).string() + "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return fail("CLI run '" + name + "' failed");
    files.push_back(slurp(dir / name / "study.csv"));
  }
  const bool same = std::all_of(files.begin(), files.end(), [&](const std::string& f) { return f == files[0]; });
  const std::string detail = "4 runs (threads 1,1,8,8), study.csv " + std::to_string(files[0].size()) + " bytes";
  return same && !files[0].empty() ? pass(detail + ", identical") : fail(detail + ", differ");
}

Outcome criterion_cv_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    const auto inst = oracle::random_instance(rng, 12, 4);
    const Dataset d = make_dataset(inst.y, inst.X, 0);
    for (int k = 1; k <= 4; ++k) {
      const double lib = cv_value(d, 0.5, k, 100, seed, CvMode::loo());
      const double ref = oracle::naive_loo_cv(d.X, d.y, 0.5, k);
      worst = std::max(worst, std::abs(lib - ref));
    }
  }
  const std::string detail = "3 datasets x k=1..4, max |difference| " + std::to_string(worst);
  return worst <= 1e-8 ? pass(detail) : fail(detail);
}

Outcome criterion_empirical(const std::string& data_dir) {
  const fs::path wage = fs::path(data_dir) / "wage.csv";
  const fs::path stock = fs::path(data_dir) / "stock.csv";
  if (!fs::exists(wage) && !fs::exists(stock)) return skip("no wage.csv or stock.csv in '" + data_dir + "'");
  std::string detail;
  bool ok = true;
  MethodSpec csa = spec_of(MethodKind::Csa);
  if (fs::exists(wage)) {
    const Dataset d = load_csv(wage.string(), "lwage",
                               {"profocc", "educ", "tenure", "female", "servocc", "married", "trade", "smsa",
                                "services", "clerocc"},
                               true);
    SplitSpec spec;
    spec.n1 = 50;
    spec.reps = 200;
    spec.tau = 0.5;
    spec.seed = 2024;
    spec.methods = {csa};
    const SplitResult r = random_split_eval(d, spec, worker_count());
    const double v = r.methods[0].mean_r2.value_or(-1e9);
    ok = ok && std::abs(v - 0.252) <= 0.02;
    detail += "wage CSA R2 " + fmt(v, 3) + " (0.252)";
  }
  if (fs::exists(stock)) {
    const Dataset d = load_csv(stock.string(), "excess_return", {}, true);
    RollingSpec spec;
    spec.T1 = 120;
    spec.tau = 0.05;
    spec.seed = 2024;
    spec.methods = {csa};
    const RollingResult r = rolling_forecast(d, spec, worker_count());
    const double v = r.methods[0].r2.value_or(-1e9);
    ok = ok && std::abs(v - 0.104) <= 0.02;
    detail += std::string(detail.empty() ? "" : "; ") + "stock CSA R2 " + fmt(v, 3) + " (0.104)";
  }
  return ok ? pass(detail) : fail(detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::string data_dir = "data";
  if (const char* env = std::getenv("QCSA_DATA_DIR")) data_dir = env;
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (a == "--data-dir" && i + 1 < argc) {
      data_dir = argv[++i];
    } else {
      wanted.push_back(std::stoi(a));
    }
  }
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"solver oracle equivalence", criterion_solver_oracle}},
      {2, {"residual sign counts", criterion_sign_counts}},
      {3, {"reference cell n=50 R2=0.5 tau=0.5 rho=0.9", criterion_reference_cell}},
      {4, {"independent regressors rho=0", criterion_independent}},
      {5, {"sparse signal n=50 K=15", criterion_sparse}},
      {6, {"subset machinery", criterion_subsets}},
      {7, {"CLI determinism", [&] { return criterion_determinism(cli); }}},
      {8, {"CV oracle", criterion_cv_oracle}},
      {9, {"empirical reproduction (optional data)", [&] { return criterion_empirical(data_dir); }}},
  };

  int failures = 0;
  for (int c : wanted) {
    const auto it = criteria.find(c);
    if (it == criteria.end()) {
      std::printf("criterion %d [PRIMARY] FAIL: unknown criterion\n", c);
      ++failures;
      continue;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* label = o.status == Outcome::Status::Pass ? "PASS" : o.status == Outcome::Status::Skip ? "SKIP" : "FAIL";
    std::printf("criterion %d [PRIMARY] %s: %s: %s\n", c, label, it->second.first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (o.status == Outcome::Status::Fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
