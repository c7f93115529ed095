#pragma once

#include "json.hpp"

#include "qcsa/methods.hpp"

namespace qcsa {

/// Version written to every JSON artifact as `schema_version`.
inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const QuantileFit& fit);
QuantileFit quantile_fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CsaPredictor& predictor);
CsaPredictor csa_predictor_from_json(const nlohmann::json& j);

/// Envelope: {schema_version, method, tau, ...}; the body depends on the method tag.
nlohmann::json to_json(const FittedMethod& method);
FittedMethod fitted_method_from_json(const nlohmann::json& j);

}  // namespace qcsa
