#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "qcsa/csa.hpp"
#include "qcsa/csv.hpp"
#include "qcsa/empirical.hpp"

namespace fs = std::filesystem;
using namespace qcsa;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "qcsa_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + QCSA_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  int code = status;
#ifdef WEXITSTATUS
  code = WEXITSTATUS(status);
#endif
  return {code, slurp(out), slurp(err)};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string tiny_simulation() {
  return R"({"seed": 11, "design": {"family": "misspecified", "n": 30, "K": 5, "R2": 0.5, "tau": 0.5,
             "rho_x": 0.9, "n_test": 20, "R": 3},
             "methods": [{"name": "CSA", "cap": 5}, "JMA", "UNCOND"]})";
}

fs::path write_series(const fs::path& dir, int n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::string text = "y,a,b,c\n";
  for (int i = 0; i < n; ++i) {
    const double a = normal(rng), b = normal(rng), c = normal(rng);
    text += csv_line({format_number(0.5 * a - 0.3 * b + normal(rng)), format_number(a), format_number(b),
                      format_number(c)});
  }
  const fs::path p = dir / "data.csv";
  write(p, text);
  return p;
}

}  // namespace

TEST_CASE("simulate writes its artifacts") {
  const fs::path dir = scratch("sim");
  write(dir / "cfg.json", tiny_simulation());
  const Run r = run(dir, "simulate --config " + (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("CSA,") != std::string::npos);
  const CsvTable t = read_csv((dir / "out" / "study.csv").string());
  CHECK(t.header.front() == "schema_version");
  CHECK(t.rows.size() == 9);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("schema_version") == 1);
  CHECK(summary.at("methods").size() == 3);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  for (const char* key : {"config", "seed", "code_version", "wall_time_seconds"}) CHECK(manifest.contains(key));
  CHECK(manifest.at("seed") == 11);
}

TEST_CASE("simulate output is reproducible") {
  const fs::path dir = scratch("sim_repeat");
  write(dir / "cfg.json", tiny_simulation());
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run(dir, "simulate --config " + cfg + " --out-dir " + (dir / "a").string()).code == 0);
  REQUIRE(run(dir, "simulate --config " + cfg + " --threads 3 --out-dir " + (dir / "b").string()).code == 0);
  CHECK(slurp(dir / "a" / "study.csv") == slurp(dir / "b" / "study.csv"));
  REQUIRE(run(dir, "simulate --config " + cfg + " --seed 12 --out-dir " + (dir / "c").string()).code == 0);
  CHECK(slurp(dir / "a" / "study.csv") != slurp(dir / "c" / "study.csv"));
}

TEST_CASE("malformed configs are rejected with the offending key") {
  const fs::path dir = scratch("bad");
  write(dir / "unknown.json", R"({"design": {"n": 30, "R": 2, "colour": 1}})");
  Run r = run(dir, "simulate --config " + (dir / "unknown.json").string() + " --out-dir " + (dir / "o").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("design.colour") != std::string::npos);

  write(dir / "top.json", R"({"design": {"n": 30, "R": 2}, "replications": 5})");
  r = run(dir, "simulate --config " + (dir / "top.json").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("replications") != std::string::npos);

  write(dir / "type.json", R"({"design": {"n": "fifty"}})");
  r = run(dir, "simulate --config " + (dir / "type.json").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("design.n") != std::string::npos);

  write(dir / "method.json", R"({"design": {"n": 30, "R": 2}, "methods": [{"name": "CSA", "capp": 3}]})");
  r = run(dir, "simulate --config " + (dir / "method.json").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("methods[0].capp") != std::string::npos);

  write(dir / "range.json", R"({"design": {"n": 30, "R2": 1.5}})");
  r = run(dir, "simulate --config " + (dir / "range.json").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("R2") != std::string::npos);

  write(dir / "broken.json", "{\"design\": ");
  CHECK(run(dir, "simulate --config " + (dir / "broken.json").string()).code != 0);
  CHECK(run(dir, "simulate").code != 0);
}

TEST_CASE("select-k agrees with the library") {
  const fs::path dir = scratch("selectk");
  const fs::path data = write_series(dir, 40);
  const Run r = run(dir, "select-k " + data.string() + " --tau 0.4 --seed 5 --mmax 10 --out-dir " + (dir / "o").string());
  REQUIRE(r.code == 0);
  const auto pj = nlohmann::json::parse(slurp(dir / "o" / "csa_predictor.json"));
  const int k_hat = pj.at("cv").at("k_hat");
  CHECK(r.out.find("k_hat," + std::to_string(k_hat)) != std::string::npos);
  CHECK(pj.at("cv").at("values").size() == 4);

  const Dataset d = load_csv(data.string(), "y", {}, true);
  const CvCurve curve = select_k(d, 0.4, 0, 10, 5, CvMode::automatic(d.n()));
  CHECK(curve.k_hat == k_hat);
  CHECK(pj.at("cv").at("values").get<std::vector<double>>() == curve.values);

  CHECK(run(dir, "select-k " + data.string() + " --outcome nope").code != 0);
}

TEST_CASE("forecast-rolling and eval-split agree with the library") {
  const fs::path dir = scratch("empirical");
  const fs::path data = write_series(dir, 36);
  write(dir / "roll.json", R"({"seed": 2, "T1": 24, "tau": 0.5, "methods": [{"name": "CSA", "cap": 5}, "L1QR"]})");
  Run r = run(dir, "forecast-rolling " + data.string() + " --config " + (dir / "roll.json").string() + " --out-dir " +
                       (dir / "roll").string());
  REQUIRE(r.code == 0);
  const auto rs = nlohmann::json::parse(slurp(dir / "roll" / "summary.json"));
  const Dataset d = load_csv(data.string(), "y", {}, true);
  RollingSpec spec;
  spec.T1 = 24;
  spec.seed = 2;
  MethodSpec csa;
  csa.cap = 5;
  MethodSpec l1;
  l1.kind = MethodKind::L1qr;
  spec.methods = {csa, l1};
  const RollingResult lib = rolling_forecast(d, spec);
  CHECK(rs.at("methods")[0].at("oos_r2").get<double>() == *lib.methods[0].r2);
  CHECK(rs.at("methods")[1].at("oos_r2").get<double>() == *lib.methods[1].r2);
  CHECK(read_csv((dir / "roll" / "forecasts.csv").string()).rows.size() == 3 * 12);

  write(dir / "split.json", R"({"seed": 2, "n1": 20, "reps": 3, "tau": 0.5, "methods": ["UNCOND", "L2QR"]})");
  r = run(dir, "eval-split " + data.string() + " --config " + (dir / "split.json").string() + " --out-dir " +
                   (dir / "split").string());
  REQUIRE(r.code == 0);
  const auto ss = nlohmann::json::parse(slurp(dir / "split" / "summary.json"));
  CHECK(ss.at("methods")[0].at("mean_oos_r2").get<double>() == 0.0);
  CHECK(fs::exists(dir / "split" / "manifest.json"));

  write(dir / "bad_roll.json", R"({"T1": 5})");
  r = run(dir, "forecast-rolling " + data.string() + " --config " + (dir / "bad_roll.json").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("T1") != std::string::npos);
}
