#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qcsa/competitors.hpp"
#include "qcsa/csa.hpp"
#include "qcsa/dataset.hpp"
#include "qcsa/qr.hpp"

namespace qcsa {

enum class MethodKind { Csa, Jma, L1qr, Bag, L2qr, Unconditional };

std::string method_name(MethodKind kind);
/// Accepts "CSA", "JMA", "L1QR", "BAG", "L2QR", "UNCOND" (any case).
MethodKind parse_method(const std::string& text);

/// A forecasting method plus the settings it is fitted with. Fields that do not
/// apply to `kind` are ignored.
struct MethodSpec {
  MethodKind kind = MethodKind::Csa;
  std::string label;  // defaults to method_name(kind)

  // CSA
  std::size_t cap = 100;
  std::optional<CvMode> cv;
  bool force_intercept = false;
  int K_use = 0;

  // JMA: candidate models are the nested prefixes of this column order (empty: dataset order)
  std::vector<int> jma_order;

  // L1QR
  double confidence = 0.9;
  int n_sim = 1000;

  // BAG
  int B = 1000;

  // L2QR
  std::vector<double> grid{0.01, 0.05, 0.1, 0.5, 1.0};
  int folds = 10;

  std::string display() const { return label.empty() ? method_name(kind) : label; }
};

/// Intercept-only benchmark.
struct UnconditionalFit {
  double tau = 0.5;
  double value = 0.0;
};

using MethodModel = std::variant<CsaPredictor, JmaPredictor, TunedFit, BagPredictor, UnconditionalFit>;

struct FittedMethod {
  MethodKind kind = MethodKind::Csa;
  MethodModel model;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Selected subset size, CSA only.
  std::optional<int> k_hat() const;
};

FittedMethod fit_method(const MethodSpec& spec, const Dataset& data, double tau, std::uint64_t seed,
                        const SolverOptions& opts = {}, int threads = 1);

}  // namespace qcsa
