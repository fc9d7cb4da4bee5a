#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "charflow/flux_model.hpp"
#include "charflow/solution_field.hpp"
#include "charflow/source.hpp"

namespace charflow {

using BuiltinParams = std::map<std::string, double>;

struct BuiltinCase {
  SolutionField field;
  SourceTerm source;
  bool continuous = true;  // false for contrast fields
  bool hoelder = false;    // only Hoelder continuous (singular line x = 0)
};

std::vector<std::string> builtin_field_names();
bool is_builtin_field(const std::string& name);

// Flux the builtin's closed-form source is written for.
FluxModel builtin_natural_flux(const std::string& name);
Domain builtin_default_domain(const std::string& name);

std::shared_ptr<const FieldEvaluator> builtin_evaluator(const std::string& name,
                                                       const BuiltinParams& params = {});
ScalarFn builtin_source(const std::string& name, const BuiltinParams& params = {});

// Builds the field and its source. Domain and flux default to the builtin's own;
// the source bound is the sup of |g| over a 129x129 probe of the domain.
BuiltinCase make_builtin(const std::string& name, const BuiltinParams& params = {},
                         std::optional<Domain> domain = std::nullopt,
                         std::optional<FluxModel> flux = std::nullopt);

double probe_sup_abs(const ScalarFn& fn, const Domain& domain, int n = 129);

}  // namespace charflow
