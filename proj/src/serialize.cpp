#include "qcsa/serialize.hpp"

#include <string>

#include "qcsa/error.hpp"

namespace qcsa {
namespace {

using nlohmann::json;

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json fits_json(const std::vector<QuantileFit>& fits) {
  json arr = json::array();
  for (const auto& f : fits) arr.push_back(to_json(f));
  return arr;
}

std::vector<QuantileFit> fits_from(const json& j) {
  std::vector<QuantileFit> out;
  for (const auto& f : j) out.push_back(quantile_fit_from_json(f));
  return out;
}

json plan_json(const SubsetPlan& plan) {
  json subsets = json::array();
  for (const auto& s : plan.selected) subsets.push_back(s.members);
  return {{"K", plan.K},           {"k", plan.k},         {"total", plan.total.str()},
          {"capped", plan.capped}, {"seed", plan.seed},   {"subsets", subsets}};
}

SubsetPlan plan_from(const json& j) {
  SubsetPlan plan;
  plan.K = j.at("K").get<int>();
  plan.k = j.at("k").get<int>();
  plan.total = BigInt(j.at("total").get<std::string>());
  plan.capped = j.at("capped").get<bool>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("subsets")) plan.selected.push_back({plan.k, s.get<std::vector<int>>()});
  return plan;
}

json envelope(const std::string& method, double tau) {
  return {{"schema_version", kSchemaVersion}, {"method", method}, {"tau", tau}};
}

void check_envelope(const json& j, const std::string& method) {
  if (!j.is_object() || !j.contains("schema_version") || !j.contains("method")) {
    throw DataError("predictor JSON lacks schema_version/method fields");
  }
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw DataError("unsupported predictor schema_version " + j.at("schema_version").dump());
  }
  if (!method.empty() && j.at("method").get<std::string>() != method) {
    throw DataError("expected a " + method + " predictor, found " + j.at("method").get<std::string>());
  }
}

}  // namespace

json to_json(const QuantileFit& fit) {
  return {{"theta", vec_json(fit.theta)},
          {"tau", fit.tau},
          {"objective", fit.objective},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"ridge_stabilized", fit.ridge_stabilized},
          {"basis", fit.basis}};
}

QuantileFit quantile_fit_from_json(const json& j) {
  QuantileFit f;
  f.theta = vec_from(j.at("theta"));
  f.tau = j.at("tau").get<double>();
  f.objective = j.at("objective").get<double>();
  f.iterations = j.at("iterations").get<int>();
  f.converged = j.at("converged").get<bool>();
  f.ridge_stabilized = j.at("ridge_stabilized").get<bool>();
  f.basis = j.at("basis").get<std::vector<int>>();
  return f;
}

json to_json(const CsaPredictor& predictor) {
  json j = envelope("CSA", predictor.final.tau);
  j["p"] = predictor.final.p;
  j["names"] = predictor.names;
  j["seed"] = predictor.seed;
  j["cap"] = predictor.cap;
  j["force_intercept"] = predictor.force_intercept;
  j["cv"] = {{"mode", predictor.curve.mode.label()}, {"values", predictor.curve.values}, {"k_hat", predictor.curve.k_hat}};
  j["k"] = predictor.final.k;
  j["plan"] = plan_json(predictor.final.plan);
  j["columns"] = predictor.final.columns;
  j["fits"] = fits_json(predictor.final.fits);
  return j;
}

CsaPredictor csa_predictor_from_json(const json& j) {
  check_envelope(j, "CSA");
  CsaPredictor p;
  p.final.tau = j.at("tau").get<double>();
  p.final.p = j.at("p").get<int>();
  p.names = j.at("names").get<std::vector<std::string>>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.cap = j.at("cap").get<std::size_t>();
  p.force_intercept = j.at("force_intercept").get<bool>();
  const json& cv = j.at("cv");
  p.curve.mode = CvMode::parse(cv.at("mode").get<std::string>());
  p.curve.values = cv.at("values").get<std::vector<double>>();
  p.curve.k_hat = cv.at("k_hat").get<int>();
  p.final.k = j.at("k").get<int>();
  p.final.plan = plan_from(j.at("plan"));
  p.final.columns = j.at("columns").get<std::vector<std::vector<int>>>();
  p.final.fits = fits_from(j.at("fits"));
  if (p.final.fits.size() != p.final.columns.size()) throw DataError("CSA predictor JSON: fits/columns length mismatch");
  return p;
}

json to_json(const FittedMethod& method) {
  const std::string tag = method_name(method.kind);
  if (const auto* csa = std::get_if<CsaPredictor>(&method.model)) return to_json(*csa);
  if (const auto* jma = std::get_if<JmaPredictor>(&method.model)) {
    json j = envelope(tag, jma->tau);
    j["p"] = jma->p;
    j["models"] = jma->models;
    j["weights"] = vec_json(jma->weights);
    j["fits"] = fits_json(jma->fits);
    j["cv_objective"] = jma->cv_objective;
    return j;
  }
  if (const auto* bag = std::get_if<BagPredictor>(&method.model)) {
    json j = envelope(tag, bag->tau);
    j["p"] = bag->p;
    j["B"] = bag->B;
    j["seed"] = bag->seed;
    j["base_model"] = "full";
    j["columns"] = bag->columns;
    j["ridge_count"] = bag->ridge_count;
    j["fits"] = fits_json(bag->fits);
    return j;
  }
  if (const auto* tuned = std::get_if<TunedFit>(&method.model)) {
    json j = envelope(tag, tuned->fit.tau);
    j["lambda"] = tuned->lambda;
    j["cv_losses"] = tuned->cv_losses;
    j["fit"] = to_json(tuned->fit);
    return j;
  }
  const auto& unc = std::get<UnconditionalFit>(method.model);
  json j = envelope(tag, unc.tau);
  j["value"] = unc.value;
  return j;
}

FittedMethod fitted_method_from_json(const json& j) {
  check_envelope(j, "");
  FittedMethod out;
  out.kind = parse_method(j.at("method").get<std::string>());
  const double tau = j.at("tau").get<double>();
  switch (out.kind) {
    case MethodKind::Csa:
      out.model = csa_predictor_from_json(j);
      break;
    case MethodKind::Jma: {
      JmaPredictor m;
      m.tau = tau;
      m.p = j.at("p").get<int>();
      m.models = j.at("models").get<std::vector<std::vector<int>>>();
      m.weights = vec_from(j.at("weights"));
      m.fits = fits_from(j.at("fits"));
      m.cv_objective = j.at("cv_objective").get<double>();
      out.model = std::move(m);
      break;
    }
    case MethodKind::Bag: {
      BagPredictor m;
      m.tau = tau;
      m.p = j.at("p").get<int>();
      m.B = j.at("B").get<int>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.columns = j.at("columns").get<std::vector<int>>();
      m.ridge_count = j.at("ridge_count").get<int>();
      m.fits = fits_from(j.at("fits"));
      out.model = std::move(m);
      break;
    }
    case MethodKind::L1qr:
    case MethodKind::L2qr: {
      TunedFit m;
      m.lambda = j.at("lambda").get<double>();
      m.cv_losses = j.at("cv_losses").get<std::vector<double>>();
      m.fit = quantile_fit_from_json(j.at("fit"));
      out.model = std::move(m);
      break;
    }
    case MethodKind::Unconditional:
      out.model = UnconditionalFit{tau, j.at("value").get<double>()};
      break;
  }
  return out;
}

}  // namespace qcsa
