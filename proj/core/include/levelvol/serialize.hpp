#pragma once

#include "levelvol/morse.hpp"
#include "levelvol/probe.hpp"

#include <nlohmann/json.hpp>

namespace levelvol {

/// JSON with a fixed key order. Non-finite numbers become strings
/// ("inf", "-inf", "nan") so output stays valid JSON.
nlohmann::ordered_json to_json(const CriticalPoint& cp);
nlohmann::ordered_json to_json(const NondegeneracyReport& report);
nlohmann::ordered_json to_json(const SingularityReport& report);
nlohmann::ordered_json to_json(const Point& x);

/// Finite doubles as numbers, the rest as strings.
nlohmann::ordered_json json_number(double x);

}  // namespace levelvol
