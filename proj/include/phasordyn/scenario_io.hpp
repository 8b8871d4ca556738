#pragma once

#include "phasordyn/scenario.hpp"

#include <string>

namespace phasordyn {

/// Parse/validation failures carry the JSON path of the offending element.
struct ScenarioError : ConfigError {
  using ConfigError::ConfigError;
};

/// Strict parse: unknown keys are rejected with their location, required
/// keys reported when missing, defaults filled for optional ones.  The
/// returned scenario has already passed validate_scenario.
[[nodiscard]] Scenario parse_scenario_text(const std::string& text);
[[nodiscard]] Scenario load_scenario_file(const std::string& path);

/// Canonical serialization: fixed key order, every default materialized.
/// parse(dump(s)) == s for any valid scenario.
[[nodiscard]] std::string dump_scenario_text(const Scenario& sc);
void save_scenario_file(const Scenario& sc, const std::string& path);

} // namespace phasordyn
