#include "config.hpp"

#include <fstream>
#include <set>

#include "qcsa/csa.hpp"

namespace qcsa::cli {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects any key that was never asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config " + where() + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config key '" + name(key) + "' has the wrong type (" + v.dump() + ")");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + name(key) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "root" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto checked(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

MethodSpec parse_method_spec(const json& j, const std::string& path) {
  MethodSpec spec;
  if (j.is_string()) {
    spec.kind = checked(path, [&] { return parse_method(j.get<std::string>()); });
    return spec;
  }
  Fields f(j, path);
  if (!f.has("name")) throw ConfigError("config key '" + f.name("name") + "' is required");
  std::string name;
  f.get("name", name);
  spec.kind = checked(f.name("name"), [&] { return parse_method(name); });
  f.get("label", spec.label);
  f.get("cap", spec.cap);
  if (f.has("cv")) {
    std::string cv;
    f.get("cv", cv);
    spec.cv = checked(f.name("cv"), [&] { return CvMode::parse(cv); });
  }
  f.get("force_intercept", spec.force_intercept);
  f.get("K_use", spec.K_use);
  f.get("jma_order", spec.jma_order);
  f.get("confidence", spec.confidence);
  f.get("n_sim", spec.n_sim);
  f.get("B", spec.B);
  f.get("grid", spec.grid);
  f.get("folds", spec.folds);
  f.finish();
  if (spec.cap < 1) throw ConfigError("config key '" + f.name("cap") + "' must be at least 1");
  if (spec.K_use < 0) throw ConfigError("config key '" + f.name("K_use") + "' must be nonnegative");
  if (!(spec.confidence > 0.0 && spec.confidence < 1.0)) {
    throw ConfigError("config key '" + f.name("confidence") + "' must lie in (0,1)");
  }
  if (spec.n_sim < 1) throw ConfigError("config key '" + f.name("n_sim") + "' must be at least 1");
  if (spec.B < 1) throw ConfigError("config key '" + f.name("B") + "' must be at least 1");
  if (spec.grid.empty()) throw ConfigError("config key '" + f.name("grid") + "' must be nonempty");
  for (double g : spec.grid) {
    if (!(g >= 0.0)) throw ConfigError("config key '" + f.name("grid") + "' must hold nonnegative values");
  }
  if (spec.folds < 2) throw ConfigError("config key '" + f.name("folds") + "' must be at least 2");
  return spec;
}

std::vector<MethodSpec> parse_methods(Fields& f) {
  if (!f.has("methods")) return default_methods();
  const json& arr = f.raw("methods");
  if (!arr.is_array() || arr.empty()) throw ConfigError("config key 'methods' must be a nonempty array");
  std::vector<MethodSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_method_spec(arr[i], "methods[" + std::to_string(i) + "]"));
  return out;
}

void parse_common(Fields& f, Common& c) {
  f.get("seed", c.seed);
  f.get("threads", c.threads);
  f.get("out_dir", c.out_dir);
  if (c.threads < 1) throw ConfigError("config key 'threads' must be at least 1");
}

DataSource parse_data(Fields& root) {
  DataSource d;
  if (!root.has("data")) return d;
  Fields f(root.raw("data"), "data");
  f.get("path", d.path);
  f.get("outcome", d.outcome);
  f.get("regressors", d.regressors);
  f.get("intercept", d.intercept);
  f.finish();
  return d;
}

double check_tau(double tau, const std::string& key) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("config key '" + key + "' must lie in (0,1)");
  return tau;
}

}  // namespace

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<MethodSpec> default_methods() {
  std::vector<MethodSpec> out;
  for (MethodKind k : {MethodKind::Csa, MethodKind::Jma, MethodKind::L1qr, MethodKind::Bag, MethodKind::L2qr}) {
    MethodSpec s;
    s.kind = k;
    out.push_back(s);
  }
  return out;
}

json method_json(const MethodSpec& s) {
  json j = {{"name", method_name(s.kind)}, {"label", s.display()}};
  switch (s.kind) {
    case MethodKind::Csa:
      j["cap"] = s.cap;
      j["cv"] = s.cv ? json(s.cv->label()) : json("auto");
      j["force_intercept"] = s.force_intercept;
      j["K_use"] = s.K_use;
      break;
    case MethodKind::Jma:
      j["jma_order"] = s.jma_order;
      break;
    case MethodKind::L1qr:
      j["confidence"] = s.confidence;
      j["n_sim"] = s.n_sim;
      break;
    case MethodKind::Bag:
      j["B"] = s.B;
      j["base_model"] = "full";
      break;
    case MethodKind::L2qr:
      j["grid"] = s.grid;
      j["folds"] = s.folds;
      break;
    case MethodKind::Unconditional:
      break;
  }
  return j;
}

SimulateConfig parse_simulate(const json& j) {
  SimulateConfig c;
  Fields root(j, "");
  parse_common(root, c.common);
  if (!root.has("design")) throw ConfigError("config key 'design' is required");
  {
    Fields f(root.raw("design"), "design");
    if (f.has("family")) {
      std::string fam;
      f.get("family", fam);
      c.design.family = checked("design.family", [&] { return parse_family(fam); });
    }
    if (f.has("signal")) {
      std::string sig;
      f.get("signal", sig);
      c.design.signal = checked("design.signal", [&] { return parse_signal(sig); });
    }
    f.get("n", c.design.n);
    f.get("p_latent", c.design.p_latent);
    f.get("K", c.design.K);
    f.get("R2", c.design.R2);
    f.get("tau", c.design.tau);
    f.get("rho_x", c.design.rho_x);
    f.get("n_test", c.design.n_test);
    f.get("R", c.design.R);
    f.finish();
    checked("design", [&] {
      c.design.validate();
      return 0;
    });
  }
  c.methods = parse_methods(root);
  root.finish();
  return c;
}

RollingConfig parse_rolling(const json& j) {
  RollingConfig c;
  Fields root(j, "");
  parse_common(root, c.common);
  c.data = parse_data(root);
  root.get("T1", c.spec.T1);
  root.get("tau", c.spec.tau);
  check_tau(c.spec.tau, "tau");
  if (c.spec.T1 < 10) throw ConfigError("config key 'T1' must be at least 10");
  c.spec.methods = parse_methods(root);
  root.finish();
  return c;
}

SplitConfig parse_split(const json& j) {
  SplitConfig c;
  Fields root(j, "");
  parse_common(root, c.common);
  c.data = parse_data(root);
  root.get("n1", c.spec.n1);
  root.get("reps", c.spec.reps);
  root.get("tau", c.spec.tau);
  check_tau(c.spec.tau, "tau");
  if (c.spec.n1 < 1) throw ConfigError("config key 'n1' must be at least 1");
  if (c.spec.reps < 1) throw ConfigError("config key 'reps' must be at least 1");
  c.spec.methods = parse_methods(root);
  root.finish();
  return c;
}

SelectKConfig parse_select_k(const json& j) {
  SelectKConfig c;
  Fields root(j, "");
  parse_common(root, c.common);
  c.data = parse_data(root);
  root.get("tau", c.tau);
  check_tau(c.tau, "tau");
  root.get("cap", c.cap);
  if (root.has("cv")) {
    std::string cv;
    root.get("cv", cv);
    c.cv = checked("cv", [&] { return CvMode::parse(cv); });
  }
  root.get("K_use", c.K_use);
  root.get("force_intercept", c.force_intercept);
  root.finish();
  if (c.cap < 1) throw ConfigError("config key 'cap' must be at least 1");
  return c;
}

}  // namespace qcsa::cli
