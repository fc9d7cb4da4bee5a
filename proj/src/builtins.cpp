#include "charflow/builtins.hpp"

#include <algorithm>
#include <cmath>

#include "charflow/error.hpp"

namespace charflow {

namespace {

double param(const BuiltinParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

const std::vector<std::string> kNames = {"constant",   "rarefaction", "affine-source",
                                         "manufactured", "cubic-merge", "sqrt-stationary",
                                         "wiggle",     "stationary-shock"};

void require_known(const std::string& name) {
  if (!is_builtin_field(name)) throw Error(ErrorKind::InvalidInput, "unknown builtin field '" + name + "'");
}

}  // namespace

std::vector<std::string> builtin_field_names() { return kNames; }

bool is_builtin_field(const std::string& name) {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

Domain builtin_default_domain(const std::string& name) {
  require_known(name);
  if (name == "rarefaction") return {1.0, 2.0, -1.0, 1.0};
  return {0.0, 1.0, -1.0, 1.0};
}

std::shared_ptr<const FieldEvaluator> builtin_evaluator(const std::string& name,
                                                       const BuiltinParams& p) {
  require_known(name);
  ScalarFn fn;
  if (name == "constant") {
    const double c = param(p, "c", 0.5);
    fn = [c](double, double) { return c; };
  } else if (name == "rarefaction") {
    const double off = param(p, "offset", 0.0);
    fn = [off](double t, double x) { return x / t + off; };
  } else if (name == "affine-source") {
    const double g0 = param(p, "g0", 0.5);
    fn = [g0](double t, double) { return g0 * t; };
  } else if (name == "manufactured") {
    const double off = param(p, "offset", 0.0);
    fn = [off](double t, double x) { return x * t + off; };
  } else if (name == "cubic-merge") {
    fn = [](double, double x) { return std::cbrt(x); };
  } else if (name == "sqrt-stationary") {
    fn = [](double, double x) { return sgn(x) * std::sqrt(std::abs(x)); };
  } else if (name == "wiggle") {
    const double a = param(p, "amplitude", 0.1), k = param(p, "wavenumber", 8.0);
    fn = [a, k](double, double x) { return a * std::sin(k * x); };
  } else {  // stationary-shock
    fn = [](double, double x) { return -sgn(x); };
  }
  return std::make_shared<FunctionEvaluator>(fn, name);
}

ScalarFn builtin_source(const std::string& name, const BuiltinParams& p) {
  require_known(name);
  if (name == "rarefaction") {
    const double off = param(p, "offset", 0.0);
    return [off](double t, double) { return off / t; };
  }
  if (name == "affine-source") {
    const double g0 = param(p, "g0", 0.5);
    return [g0](double, double) { return g0; };
  }
  if (name == "manufactured") {
    const double off = param(p, "offset", 0.0);
    return [off](double t, double x) { return x * (1.0 + t * t) + off * t; };
  }
  if (name == "cubic-merge") return [](double, double) { return 1.0 / 3.0; };
  if (name == "sqrt-stationary") return [](double, double x) { return 0.5 * std::sqrt(std::abs(x)); };
  return [](double, double) { return 0.0; };
}

FluxModel builtin_natural_flux(const std::string& name) {
  require_known(name);
  const Interval unit{-1.0, 1.0};
  if (name == "cubic-merge" || name == "sqrt-stationary") return FluxModel::builtin("cubic", unit);
  if (name == "wiggle") return FluxModel::polynomial({0.0}, unit);
  return FluxModel::builtin("burgers", unit);
}

double probe_sup_abs(const ScalarFn& fn, const Domain& d, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = d.t0 + d.duration() * i / (n - 1);
    for (int j = 0; j < n; ++j) m = std::max(m, std::abs(fn(t, d.x0 + d.width() * j / (n - 1))));
  }
  return m;
}

BuiltinCase make_builtin(const std::string& name, const BuiltinParams& params,
                         std::optional<Domain> domain, std::optional<FluxModel> flux) {
  const Domain dom = domain.value_or(builtin_default_domain(name));
  auto ev = builtin_evaluator(name, params);
  FluxModel fl = flux.value_or(builtin_natural_flux(name));
  if (!flux) {
    // Working interval: probed range of the field with a margin.
    const int n = 129;
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = ev->value(dom.t0 + dom.duration() * i / (n - 1), dom.x0 + dom.width() * j / (n - 1));
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
    const double pad = 0.05 * (1.0 + hi - lo);
    fl = fl.with_interval({lo - pad, hi + pad});
  }
  ScalarFn g = builtin_source(name, params);
  SourceTerm src{g, probe_sup_abs(g, dom), name};
  BuiltinCase out{SolutionField(name, dom, ev, fl), src, name != "stationary-shock",
                  name == "cubic-merge" || name == "sqrt-stationary"};
  return out;
}

}  // namespace charflow
