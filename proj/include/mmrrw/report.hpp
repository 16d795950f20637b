#pragma once

#include <json.hpp>

#include "mmrrw/classify.hpp"
#include "mmrrw/simulate.hpp"

namespace mmrrw {

inline constexpr const char* kVersion = "0.1.0";

// Face keys are the 1-based member lists ("1,3"); coordinates in arrays stay
// in model order. Objects are std::map backed, so dumps are sorted and stable.
nlohmann::json to_json(const DriftVector& v);
DriftVector drift_from_json(const nlohmann::json& j, int d);

nlohmann::json to_json(const DriftProfile& p);
DriftProfile profile_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Certificate& c);
// Throws ModelError on malformed input.
Certificate certificate_from_json(const nlohmann::json& j, int d);

nlohmann::json to_json(const CertCheck& c);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const Diagnostic& d);
nlohmann::json to_json(const GEstimate& g);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);

}  // namespace mmrrw
