#pragma once

#include <json.hpp>

#include "ergolab/measures.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

using Json = nlohmann::ordered_json;

Json to_json(const Observable& obs);
/// `path` prefixes error messages (e.g. "$.system.phi").
Observable observable_from_json(const Json& j, const std::string& path);

/// {"variant", "matrix": [[a,b],[c,d]], "phi": [...], "field": {"amplitude"}, "control_rate"}
Json to_json(const SystemSpec& spec);
/// Accepts either a preset name string or a full object; missing fields take
/// the defaults. Throws ConfigError naming the offending path.
SystemSpec system_from_json(const Json& j, const std::string& path);

/// Full enumeration of the family, recorded in every experiment manifest.
Json to_json(const TestFamily& family);

Json to_json(const MeasureVector& mu);

}  // namespace ergolab
