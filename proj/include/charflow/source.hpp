#pragma once

#include <optional>
#include <string>
#include <utility>

#include "charflow/solution_field.hpp"

namespace charflow {

// Registered source g(t,x) of the balance law, with an optional sup bound G.
struct SourceTerm {
  ScalarFn g;
  std::optional<double> bound;
  std::string description;

  double operator()(double t, double x) const { return g(t, x); }

  static SourceTerm zero() { return {[](double, double) { return 0.0; }, 0.0, "zero"}; }
};

}  // namespace charflow
