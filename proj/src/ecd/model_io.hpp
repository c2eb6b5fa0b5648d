#pragma once

// JSON forms of parameters and scenarios, and the built-in scenario set.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ecd/model.hpp"

namespace ecd {

using json = nlohmann::json;

json to_json(const ChoiceModelParams& params);
// Unknown keys and non-numeric values are rejected; keys absent from `j`
// keep their value from `base`.
ChoiceModelParams params_from_json(const json& j, ChoiceModelParams base = {});
ParamOverrides overrides_from_json(const json& j);
json overrides_to_json(const ParamOverrides& overrides);

json to_json(const Scenario& scenario);
Scenario scenario_from_json(const json& j);

// Built-in scenarios: S1..S4 (free shipping on/off, full or 70% express fees)
// and T3 (the option set used to estimate the total-value level).
const std::vector<std::string>& builtin_scenario_names();
Scenario builtin_scenario(std::string_view name);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace ecd
