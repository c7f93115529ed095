#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qcsa/empirical.hpp"
#include "qcsa/methods.hpp"
#include "qcsa/simulate.hpp"

namespace qcsa::cli {

/// Raised for any malformed or inconsistent configuration; the message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSource {
  std::string path;
  std::string outcome = "y";
  std::vector<std::string> regressors;
  bool intercept = true;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

struct SimulateConfig {
  Common common;
  SimDesign design;
  std::vector<MethodSpec> methods;
};

struct RollingConfig {
  Common common;
  DataSource data;
  RollingSpec spec;
};

struct SplitConfig {
  Common common;
  DataSource data;
  SplitSpec spec;
};

nlohmann::json read_config_file(const std::string& path);

SimulateConfig parse_simulate(const nlohmann::json& j);
RollingConfig parse_rolling(const nlohmann::json& j);
SplitConfig parse_split(const nlohmann::json& j);

nlohmann::json method_json(const MethodSpec& spec);
std::vector<MethodSpec> default_methods();

}  // namespace qcsa::cli

namespace qcsa::cli {

struct SelectKConfig {
  Common common;
  DataSource data;
  double tau = 0.5;
  std::size_t cap = 100;
  std::optional<CvMode> cv;
  int K_use = 0;
  bool force_intercept = false;
};

SelectKConfig parse_select_k(const nlohmann::json& j);

}  // namespace qcsa::cli
