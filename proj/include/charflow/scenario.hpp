#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "charflow/solution_field.hpp"
#include "charflow/source.hpp"

namespace charflow {

using Tolerances = std::map<std::string, double>;

Tolerances default_tolerances();

struct Scenario {
  std::string name;
  std::string origin;          // file path or "builtin:<name>"
  nlohmann::json spec;         // normalized JSON form of the scenario file
  std::shared_ptr<const SolutionField> field;
  SourceTerm source;
  bool has_source = false;     // a source was registered (closed form, grid or constant)
  bool continuous = true;
  bool hoelder = false;
  Tolerances tolerances;

  double tol(const std::string& key) const;
  // Command parameter block (empty object when absent).
  nlohmann::json block(const std::string& key) const;
};

std::vector<std::string> builtin_scenario_names();
std::optional<std::string> builtin_scenario_text(const std::string& name);

nlohmann::json toml_to_json(const std::string& text);

// Accepts a path to a .toml/.json file, "builtin:<name>", or a bare builtin name.
Scenario load_scenario(const std::string& path_or_name, const Tolerances& overrides = {});

Scenario scenario_from_json(const nlohmann::json& spec, const std::string& origin,
                            const std::string& base_dir, const Tolerances& overrides = {});

}  // namespace charflow
