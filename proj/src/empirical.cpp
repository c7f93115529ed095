#include "qcsa/empirical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "qcsa/csv.hpp"
#include "qcsa/error.hpp"
#include "qcsa/parallel.hpp"
#include "qcsa/seed.hpp"

namespace qcsa {
namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string opt_text(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const std::size_t b = cell.find_first_not_of(" \t");
  const std::size_t e = cell.find_last_not_of(" \t");
  double v = 0.0;
  bool ok = false;
  if (b != std::string::npos) {
    const char* first = cell.data() + b;
    const char* last = cell.data() + e + 1;
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    ok = res.ec == std::errc() && res.ptr == last && std::isfinite(v);
  }
  if (!ok) {
    throw NonNumericCell("row " + std::to_string(row) + ", column '" + column + "': '" + cell +
                         "' is not a finite number");
  }
  return v;
}

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameter("quantile level must lie in (0,1)");
}

void check_methods(const std::vector<MethodSpec>& methods) {
  if (methods.empty()) throw InvalidParameter("at least one method is required");
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& outcome, const std::vector<std::string>& regressors,
                 bool add_intercept) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw EmptyData("'" + path + "' has a header but no data rows");

  auto find = [&](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw MissingColumn("column '" + name + "' not found in '" + path + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t y_col = find(outcome);
  std::vector<std::size_t> x_cols;
  std::vector<std::string> names;
  if (regressors.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == y_col) continue;
      x_cols.push_back(c);
      names.push_back(table.header[c]);
    }
  } else {
    for (const auto& r : regressors) {
      x_cols.push_back(find(r));
      names.push_back(r);
    }
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index offset = add_intercept ? 1 : 0;
  Dataset d;
  d.y.resize(n);
  d.X.resize(n, static_cast<Eigen::Index>(x_cols.size()) + offset);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = table.rows[static_cast<std::size_t>(i)];
    const std::size_t row_no = static_cast<std::size_t>(i) + 1;
    d.y[i] = parse_cell(rec[y_col], row_no, outcome);
    if (add_intercept) d.X(i, 0) = 1.0;
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      d.X(i, static_cast<Eigen::Index>(j) + offset) = parse_cell(rec[x_cols[j]], row_no, table.header[x_cols[j]]);
    }
  }
  if (add_intercept) {
    names.insert(names.begin(), "const");
    d.intercept_col = 0;
  }
  d.names = std::move(names);
  d.validate();
  return d;
}

double unconditional_quantile(const Eigen::Ref<const Eigen::VectorXd>& y, double tau) {
  check_tau(tau);
  if (y.size() == 0) throw DataError("quantile of an empty sample");
  std::vector<double> v(y.data(), y.data() + y.size());
  const double pos = std::ceil(static_cast<double>(v.size()) * tau - 1e-9);
  const auto k = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(v.size()))) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

std::optional<double> oos_r2(double method_loss, double benchmark_loss) {
  if (!(benchmark_loss > 0.0)) return std::nullopt;
  return 1.0 - method_loss / benchmark_loss;
}

KHatStats k_hat_stats(const std::vector<std::optional<int>>& k_hats) {
  std::vector<double> ks;
  for (const auto& k : k_hats) {
    if (k) ks.push_back(*k);
  }
  KHatStats s;
  if (ks.empty()) return s;
  s.mean = std::accumulate(ks.begin(), ks.end(), 0.0) / static_cast<double>(ks.size());
  std::sort(ks.begin(), ks.end());
  const std::size_t m = ks.size() / 2;
  s.median = ks.size() % 2 ? ks[m] : 0.5 * (ks[m - 1] + ks[m]);
  return s;
}

void RollingSpec::validate(Eigen::Index T) const {
  check_tau(tau);
  check_methods(methods);
  if (T1 < 10) throw InvalidParameter("rolling window T1 must be at least 10");
  if (T1 >= T) {
    throw InvalidParameter("rolling window T1=" + std::to_string(T1) + " leaves no forecast target in " +
                           std::to_string(T) + " rows");
  }
}

RollingResult rolling_forecast(const Dataset& data, const RollingSpec& spec, int threads) {
  data.validate();
  spec.validate(data.n());
  const int T = static_cast<int>(data.n());
  const int count = T - spec.T1;
  const std::size_t M = spec.methods.size();

  RollingResult out;
  out.origin.resize(static_cast<std::size_t>(count));
  out.realized.resize(static_cast<std::size_t>(count));
  out.benchmark.label = "BENCHMARK";
  out.benchmark.forecast.resize(static_cast<std::size_t>(count));
  out.benchmark.loss.resize(static_cast<std::size_t>(count));
  out.methods.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    auto& s = out.methods[m];
    s.label = spec.methods[m].display();
    s.forecast.resize(static_cast<std::size_t>(count));
    s.loss.resize(static_cast<std::size_t>(count));
    s.k_hat.resize(static_cast<std::size_t>(count));
  }

  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t u) {
    const int last = spec.T1 - 1 + static_cast<int>(u);  // 0-based final window row
    const int target = last + 1;
    std::vector<int> rows(static_cast<std::size_t>(spec.T1));
    std::iota(rows.begin(), rows.end(), last - spec.T1 + 1);
    const Dataset window = data.rows(rows);
    const double realized = data.y[target];
    const std::uint64_t unit_seed = derive_seed(spec.seed, stream::kSplit + static_cast<std::uint64_t>(target));

    out.origin[u] = last + 1;
    out.realized[u] = realized;
    const double bench = unconditional_quantile(window.y, spec.tau);
    out.benchmark.forecast[u] = bench;
    out.benchmark.loss[u] = check_loss(realized - bench, spec.tau);
    for (std::size_t m = 0; m < M; ++m) {
      const FittedMethod f = fit_method(spec.methods[m], window, spec.tau, unit_seed, {}, 1);
      const double fc = f.predict(data.X.row(target).transpose());
      auto& s = out.methods[m];
      s.forecast[u] = fc;
      s.loss[u] = check_loss(realized - fc, spec.tau);
      s.k_hat[u] = f.k_hat();
    }
  });

  const double bench_total = std::accumulate(out.benchmark.loss.begin(), out.benchmark.loss.end(), 0.0);
  out.benchmark.r2 = oos_r2(bench_total, bench_total);
  for (auto& s : out.methods) {
    s.r2 = oos_r2(std::accumulate(s.loss.begin(), s.loss.end(), 0.0), bench_total);
    s.k_stats = k_hat_stats(s.k_hat);
  }
  return out;
}

void SplitSpec::validate(Eigen::Index n) const {
  check_tau(tau);
  check_methods(methods);
  if (n1 < 1 || n1 >= n) {
    throw InvalidParameter("estimation size n1=" + std::to_string(n1) + " must satisfy 1 <= n1 < n=" +
                           std::to_string(n));
  }
  if (reps < 1) throw InvalidParameter("reps must be at least 1");
}

std::vector<int> split_rows(Eigen::Index n, int n1, std::uint64_t seed, int s) {
  if (n1 < 1 || n1 >= n) throw InvalidParameter("estimation size must satisfy 1 <= n1 < n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, stream::kSplit + static_cast<std::uint64_t>(s)));
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::sort(idx.begin(), idx.begin() + n1);
  std::sort(idx.begin() + n1, idx.end());
  return idx;
}

SplitResult random_split_eval(const Dataset& data, const SplitSpec& spec, int threads) {
  data.validate();
  spec.validate(data.n());
  const std::size_t M = spec.methods.size();
  const auto reps = static_cast<std::size_t>(spec.reps);

  SplitResult out;
  out.methods.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    out.methods[m].label = spec.methods[m].display();
    out.methods[m].r2.resize(reps);
    out.methods[m].k_hat.resize(reps);
  }

  parallel_for(reps, threads, [&](std::size_t s) {
    const std::vector<int> idx = split_rows(data.n(), spec.n1, spec.seed, static_cast<int>(s));
    const std::span<const int> est(idx.data(), static_cast<std::size_t>(spec.n1));
    const std::span<const int> eval(idx.data() + spec.n1, idx.size() - static_cast<std::size_t>(spec.n1));
    const Dataset train = data.rows(est);
    const std::uint64_t unit_seed = derive_seed(spec.seed, stream::kSplit + s);
    const double bench = unconditional_quantile(train.y, spec.tau);
    double bench_loss = 0.0;
    for (int i : eval) bench_loss += check_loss(data.y[i] - bench, spec.tau);
    for (std::size_t m = 0; m < M; ++m) {
      const FittedMethod f = fit_method(spec.methods[m], train, spec.tau, unit_seed, {}, 1);
      double loss = 0.0;
      for (int i : eval) loss += check_loss(data.y[i] - f.predict(data.X.row(i).transpose()), spec.tau);
      out.methods[m].r2[s] = oos_r2(loss, bench_loss);
      out.methods[m].k_hat[s] = f.k_hat();
    }
  });

  for (auto& series : out.methods) {
    std::vector<double> vals;
    for (const auto& r : series.r2) {
      if (r) vals.push_back(*r);
    }
    if (!vals.empty()) {
      const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      series.mean_r2 = mean;
      series.sd_r2 = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    }
    series.k_stats = k_hat_stats(series.k_hat);
  }
  return out;
}

void write_forecasts_csv(const std::string& path, const RollingResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << csv_line({"schema_version", "t", "method", "forecast", "realized", "loss"});
  auto emit = [&](const ForecastSeries& s) {
    for (std::size_t u = 0; u < result.origin.size(); ++u) {
      out << csv_line({"1", std::to_string(result.origin[u]), s.label, format_number(s.forecast[u]),
                       format_number(result.realized[u]), format_number(s.loss[u])});
    }
  };
  emit(result.benchmark);
  for (const auto& s : result.methods) emit(s);
  if (!out) throw DataError("write to '" + path + "' failed");
}

nlohmann::json rolling_summary_json(const RollingResult& result, const RollingSpec& spec) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& s : result.methods) {
    methods.push_back({{"label", s.label},
                       {"oos_r2", opt_json(s.r2)},
                       {"mean_k_hat", opt_json(s.k_stats.mean)},
                       {"median_k_hat", opt_json(s.k_stats.median)},
                       {"total_loss", std::accumulate(s.loss.begin(), s.loss.end(), 0.0)}});
  }
  return {{"schema_version", 1},
          {"protocol", "rolling"},
          {"T1", spec.T1},
          {"tau", spec.tau},
          {"seed", spec.seed},
          {"forecasts", result.origin.size()},
          {"benchmark_loss", std::accumulate(result.benchmark.loss.begin(), result.benchmark.loss.end(), 0.0)},
          {"methods", methods}};
}

void write_splits_csv(const std::string& path, const SplitResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << csv_line({"schema_version", "split", "method", "r2", "k_hat"});
  if (!result.methods.empty()) {
    for (std::size_t s = 0; s < result.methods.front().r2.size(); ++s) {
      for (const auto& m : result.methods) {
        out << csv_line({"1", std::to_string(s), m.label, opt_text(m.r2[s]),
                         m.k_hat[s] ? std::to_string(*m.k_hat[s]) : ""});
      }
    }
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

nlohmann::json split_summary_json(const SplitResult& result, const SplitSpec& spec) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& s : result.methods) {
    int missing = 0;
    for (const auto& r : s.r2) missing += r ? 0 : 1;
    methods.push_back({{"label", s.label},
                       {"mean_oos_r2", opt_json(s.mean_r2)},
                       {"sd_oos_r2", opt_json(s.sd_r2)},
                       {"missing_splits", missing},
                       {"mean_k_hat", opt_json(s.k_stats.mean)},
                       {"median_k_hat", opt_json(s.k_stats.median)}});
  }
  return {{"schema_version", 1}, {"protocol", "split"}, {"n1", spec.n1},        {"reps", spec.reps},
          {"tau", spec.tau},     {"seed", spec.seed},   {"methods", methods}};
}

}  // namespace qcsa
