#pragma once

#include <string>

#include <json.hpp>

#include "fpca/analog.hpp"
#include "fpca/surrogate.hpp"

namespace fpca {

/// A fitted surrogate plus the oracle it was fitted against.
struct SurrogateFile {
  SurrogateModel<double> model;
  FitOptions options;
  nlohmann::json oracle;  ///< {"kind": "ideal"|"saturating", ...constants}
};

nlohmann::json oracle_to_json(const DeviceModel& oracle);
/// Rebuilds an ideal or saturating oracle from its JSON description.
DeviceModel oracle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SurrogateFile& file);
SurrogateFile surrogate_from_json(const nlohmann::json& j);

void save_surrogate(const std::string& path, const SurrogateFile& file);
SurrogateFile load_surrogate(const std::string& path);

nlohmann::json to_json(const ErrorReport& report);

}  // namespace fpca
