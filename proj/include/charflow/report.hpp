#pragma once

#include <string>

#include "json.hpp"

#include "charflow/characteristics.hpp"
#include "charflow/lagrangian.hpp"
#include "charflow/scenario.hpp"

namespace charflow::report {

// Versioned report envelope. The timestamp is omitted when `timestamp` is false.
nlohmann::json envelope(const std::string& command, const Scenario& scenario, bool pass,
                        nlohmann::json results, bool timestamp);

nlohmann::json error_object(const std::string& stage, const std::string& message,
                            const std::string& kind);

// CSV dumps carry a "# schema: ..." first line.
std::string curve_csv(const CharacteristicCurve& curve, const SolutionField& field);
std::string param_csv(const LagrangianParam& param, const SolutionField& field);

std::string format_double(double v);
void write_text(const std::string& dir, const std::string& file, const std::string& text);

}  // namespace charflow::report
