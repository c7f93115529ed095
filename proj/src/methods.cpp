#include "qcsa/methods.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "qcsa/empirical.hpp"
#include "qcsa/error.hpp"

namespace qcsa {

std::string method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::Csa: return "CSA";
    case MethodKind::Jma: return "JMA";
    case MethodKind::L1qr: return "L1QR";
    case MethodKind::Bag: return "BAG";
    case MethodKind::L2qr: return "L2QR";
    case MethodKind::Unconditional: return "UNCOND";
  }
  throw InternalError("unknown method kind");
}

MethodKind parse_method(const std::string& text) {
  std::string up = text;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (MethodKind k : {MethodKind::Csa, MethodKind::Jma, MethodKind::L1qr, MethodKind::Bag, MethodKind::L2qr,
                       MethodKind::Unconditional}) {
    if (up == method_name(k)) return k;
  }
  throw InvalidParameter("unknown method '" + text + "' (expected CSA, JMA, L1QR, BAG, L2QR or UNCOND)");
}

double FittedMethod::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  struct Visitor {
    const Eigen::Ref<const Eigen::VectorXd>& x;
    double operator()(const CsaPredictor& m) const { return csa_predict(m, x); }
    double operator()(const JmaPredictor& m) const { return jma_predict(m, x); }
    double operator()(const TunedFit& m) const { return qcsa::predict(m.fit, x); }
    double operator()(const BagPredictor& m) const { return bag_predict(m, x); }
    double operator()(const UnconditionalFit& m) const { return m.value; }
  };
  return std::visit(Visitor{x}, model);
}

std::optional<int> FittedMethod::k_hat() const {
  if (const auto* csa = std::get_if<CsaPredictor>(&model)) return csa->curve.k_hat;
  return std::nullopt;
}

FittedMethod fit_method(const MethodSpec& spec, const Dataset& data, double tau, std::uint64_t seed,
                        const SolverOptions& opts, int threads) {
  FittedMethod out;
  out.kind = spec.kind;
  switch (spec.kind) {
    case MethodKind::Csa: {
      CsaConfig cfg;
      cfg.K_use = spec.K_use;
      cfg.cap = spec.cap;
      cfg.seed = seed;
      cfg.mode = spec.cv;
      cfg.force_intercept = spec.force_intercept;
      cfg.opts = opts;
      cfg.threads = threads;
      out.model = fit_csa(data, tau, cfg);
      break;
    }
    case MethodKind::Jma: {
      std::vector<int> order = spec.jma_order;
      if (order.empty()) {
        order.resize(static_cast<std::size_t>(data.p()));
        std::iota(order.begin(), order.end(), 0);
      }
      out.model = fit_jma(data, tau, nested_models(order), opts);
      break;
    }
    case MethodKind::L1qr:
      out.model = fit_l1qr(data, tau, opts, spec.confidence, spec.n_sim, seed);
      break;
    case MethodKind::Bag:
      out.model = fit_bag(data, tau, spec.B, seed, opts, threads);
      break;
    case MethodKind::L2qr:
      out.model = fit_l2qr_cv(data, tau, spec.grid, spec.folds, seed, opts);
      break;
    case MethodKind::Unconditional:
      out.model = UnconditionalFit{tau, unconditional_quantile(data.y, tau)};
      break;
  }
  return out;
}

}  // namespace qcsa
