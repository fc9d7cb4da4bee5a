#include "charflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#define TOML_ENABLE_FORMATTERS 1
#include "toml.hpp"

#include "charflow/builtins.hpp"
#include "charflow/error.hpp"

namespace charflow {

namespace fs = std::filesystem;
using nlohmann::json;

Tolerances default_tolerances() {
  return {
      {"weak_residual", 1e-6},       {"entropy_residual", 1e-5}, {"flux_derived", 1e-6},
      {"lipschitz_factor", 1.1},     {"lipschitz_slack", 1e-6},  {"affine_slack_factor", 0.05},
      {"affine_slack_floor", 1e-9},  {"lagr_source", 1e-2},      {"universal_source", 2e-2},
      {"sv_epsilon", 0.05},          {"sv_sigma", 0.05},         {"max_principle", 1e-9},
      {"bv_monotone", 1e-6},         {"bv_gap_slack", 1e-3},     {"hypothesis_h", 1.0 / 64.0},
      {"monotone_defect", 1e-12},
  };
}

double Scenario::tol(const std::string& key) const {
  auto it = tolerances.find(key);
  if (it == tolerances.end()) throw Error(ErrorKind::InvalidInput, "unknown tolerance key '" + key + "'");
  return it->second;
}

json Scenario::block(const std::string& key) const {
  if (spec.contains(key) && spec[key].is_object()) return spec[key];
  return json::object();
}

namespace {

// Embedded scenarios, one per builtin field plus shifted variants for comparisons.
const std::map<std::string, std::string>& embedded() {
  static const std::map<std::string, std::string> table = {
      {"constant", R"(
name = "constant"
[solution]
kind = "builtin"
name = "constant"
params = { c = 0.5 }
[flux]
kind = "builtin"
name = "burgers"
[tolerances]
weak_residual = 1e-10
[trace]
start = [0.0, -0.5]
[param]
seed_time = 0.0
x_range = [-0.9, 0.4]
)"},
      {"constant-zero", R"(
name = "constant-zero"
[solution]
kind = "builtin"
name = "constant"
params = { c = 0.0 }
[flux]
kind = "builtin"
name = "burgers"
interval = [-1.0, 1.5]
)"},
      {"constant-one", R"(
name = "constant-one"
[solution]
kind = "builtin"
name = "constant"
params = { c = 1.0 }
[flux]
kind = "builtin"
name = "burgers"
interval = [-1.0, 1.5]
)"},
      {"rarefaction", R"(
name = "rarefaction"
[solution]
kind = "builtin"
name = "rarefaction"
[flux]
kind = "builtin"
name = "burgers"
[domain]
t = [1.0, 2.0]
x = [-1.0, 1.0]
[trace]
start = [1.0, 0.5]
[affine]
point = [2.0, 1.0]
k = 64
direction = "backward"
[param]
seed_time = 1.0
x_range = [-0.45, 0.45]
[max_principle]
other = "rarefaction-shifted"
)"},
      {"rarefaction-shifted", R"(
name = "rarefaction-shifted"
[solution]
kind = "builtin"
name = "rarefaction"
params = { offset = 0.1 }
[flux]
kind = "builtin"
name = "burgers"
[domain]
t = [1.0, 2.0]
x = [-1.0, 1.0]
)"},
      {"affine-source", R"(
name = "affine-source"
[solution]
kind = "builtin"
name = "affine-source"
params = { g0 = 0.5 }
[flux]
kind = "builtin"
name = "burgers"
[quadrature]
mesh = 512
[trace]
start = [0.0, 0.0]
[affine]
point = [1.0, 0.2]
k = 64
[param]
seed_time = 0.0
x_range = [-0.5, 0.5]
)"},
      {"manufactured", R"(
name = "manufactured"
[solution]
kind = "builtin"
name = "manufactured"
[flux]
kind = "builtin"
name = "burgers"
[trace]
start = [0.0, 0.3]
[affine]
point = [1.0, 0.5]
k = 64
[param]
seed_time = 0.0
x_range = [-0.5, 0.5]
[max_principle]
other = "manufactured-shifted"
)"},
      {"manufactured-shifted", R"(
name = "manufactured-shifted"
[solution]
kind = "builtin"
name = "manufactured"
params = { offset = 0.5 }
[flux]
kind = "builtin"
name = "burgers"
)"},
      {"cubic-merge", R"(
name = "cubic-merge"
[solution]
kind = "builtin"
name = "cubic-merge"
[flux]
kind = "builtin"
name = "cubic"
[domain]
t = [0.0, 1.0]
x = [-1.0, 1.0]
[source]
kind = "builtin"
bound = 0.3333333333333333
[tolerances]
weak_residual = 1e-4
entropy_residual = 1e-4
flux_derived = 1e-4
[quadrature]
mesh = 512
[trace]
start = [0.0, -0.5]
[affine]
point = [1.0, -0.2]
k = 128
direction = "backward"
[param]
seed_time = 0.5
seeds = [-0.0023703703703703703, -0.001, -0.0002962962962962963, -0.000037037037037037037,
         0.0, 0.000037037037037037037, 0.0002962962962962963, 0.001, 0.0023703703703703703]
nodes = 1001
[tests]
straddle_x0 = true
)"},
      {"sqrt-stationary", R"(
name = "sqrt-stationary"
[solution]
kind = "builtin"
name = "sqrt-stationary"
[flux]
kind = "builtin"
name = "cubic"
[source]
kind = "builtin"
bound = 0.5
[tolerances]
weak_residual = 1e-4
entropy_residual = 1e-4
flux_derived = 1e-4
[quadrature]
mesh = 512
[trace]
start = [0.0, 0.3]
[affine]
point = [1.0, 0.5]
k = 64
[param]
seed_time = 0.0
x_range = [-0.25, 0.25]
[tests]
straddle_x0 = true
)"},
      {"wiggle", R"(
name = "wiggle"
[solution]
kind = "builtin"
name = "wiggle"
params = { amplitude = 0.1, wavenumber = 8.0 }
[flux]
kind = "polynomial"
coeffs = [0.0]
interval = [-0.2, 0.2]
[param]
seed_time = 0.5
x_range = [-1.0, 1.0]
nodes = 65
[bv]
delta = 0.1
)"},
      {"stationary-shock", R"(
name = "stationary-shock"
[solution]
kind = "builtin"
name = "stationary-shock"
[flux]
kind = "builtin"
name = "burgers"
[tests]
functions = [ { center = [0.5, 0.0], radii = [0.25, 0.25], normalize = "time-trace" } ]
)"},
  };
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::InvalidInput, std::string("expected a number for ") + what);
  return j.get<double>();
}

std::pair<double, double> pair_of(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a 2-element array");
  return {num(j[0], what), num(j[1], what)};
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base_dir.empty()) path = fs::path(base_dir) / path;
  return path.string();
}

BuiltinParams params_of(const json& sol) {
  BuiltinParams p;
  if (sol.contains("params")) {
    if (!sol["params"].is_object()) throw Error(ErrorKind::InvalidInput, "solution.params must be a table");
    for (auto& [k, v] : sol["params"].items()) p[k] = num(v, k.c_str());
  }
  return p;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : embedded()) names.push_back(k);
  return names;
}

std::optional<std::string> builtin_scenario_text(const std::string& name) {
  auto it = embedded().find(name);
  if (it == embedded().end()) return std::nullopt;
  return it->second;
}

json toml_to_json(const std::string& text) {
  try {
    toml::table tbl = toml::parse(text);
    std::ostringstream os;
    os << toml::json_formatter{tbl};
    return json::parse(os.str());
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
    throw Error(ErrorKind::InvalidInput, os.str());
  }
}

Scenario load_scenario(const std::string& path_or_name, const Tolerances& overrides) {
  std::string name = path_or_name;
  if (name.rfind("builtin:", 0) == 0) name = name.substr(8);
  const bool is_file = fs::exists(path_or_name);
  if (!is_file) {
    if (auto text = builtin_scenario_text(name))
      return scenario_from_json(toml_to_json(*text), "builtin:" + name, "", overrides);
    throw Error(ErrorKind::InvalidInput, "scenario '" + path_or_name + "' is neither a file nor a builtin scenario");
  }
  const std::string text = read_file(path_or_name);
  json spec;
  if (fs::path(path_or_name).extension() == ".json") {
    try {
      spec = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidInput, std::string("JSON parse error: ") + e.what());
    }
  } else {
    spec = toml_to_json(text);
  }
  return scenario_from_json(spec, path_or_name, fs::path(path_or_name).parent_path().string(), overrides);
}

Scenario scenario_from_json(const json& spec, const std::string& origin, const std::string& base_dir,
                            const Tolerances& overrides) {
  if (!spec.is_object()) throw Error(ErrorKind::InvalidInput, "scenario must be a table/object");
  Scenario sc;
  sc.spec = spec;
  sc.origin = origin;
  sc.name = spec.value("name", fs::path(origin).stem().string());

  // Solution evaluator and domain.
  if (!spec.contains("solution")) throw Error(ErrorKind::InvalidInput, "scenario has no [solution] table");
  const json& sol = spec["solution"];
  const std::string skind = sol.value("kind", "builtin");
  std::shared_ptr<const FieldEvaluator> ev;
  std::optional<double> interp_err;
  Domain dom;
  std::string builtin_name;
  BuiltinParams bparams;
  if (skind == "builtin") {
    builtin_name = sol.value("name", "");
    bparams = params_of(sol);
    ev = builtin_evaluator(builtin_name, bparams);
    dom = builtin_default_domain(builtin_name);
    sc.continuous = builtin_name != "stationary-shock";
    sc.hoelder = builtin_name == "cubic-merge" || builtin_name == "sqrt-stationary";
  } else if (skind == "grid") {
    auto grid = GridEvaluator::from_csv(resolve(base_dir, sol.value("path", "")));
    dom = grid->domain();
    interp_err = grid->interpolation_error_bound();
    ev = grid;
  } else {
    throw Error(ErrorKind::InvalidInput, "solution.kind must be 'builtin' or 'grid'");
  }
  if (spec.contains("domain")) {
    const json& d = spec["domain"];
    if (d.contains("t")) std::tie(dom.t0, dom.t1) = pair_of(d["t"], "domain.t");
    if (d.contains("x")) std::tie(dom.x0, dom.x1) = pair_of(d["x"], "domain.x");
  }
  if (!(dom.t1 > dom.t0) || !(dom.x1 > dom.x0)) throw Error(ErrorKind::InvalidInput, "domain must satisfy t0 < t1 and x0 < x1");

  // Flux; the working interval defaults to the probed field range with a margin.
  const json flux_spec = spec.value("flux", json{{"kind", "builtin"}, {"name", "burgers"}});
  const std::string fkind = flux_spec.value("kind", "builtin");
  std::optional<Interval> interval;
  if (flux_spec.contains("interval")) {
    auto [lo, hi] = pair_of(flux_spec["interval"], "flux.interval");
    interval = Interval{lo, hi};
  }
  auto probed_interval = [&]() {
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < 129; ++i)
      for (int j = 0; j < 129; ++j) {
        const double u = ev->value(dom.t0 + dom.duration() * i / 128.0, dom.x0 + dom.width() * j / 128.0);
        if (!std::isfinite(u)) throw Error(ErrorKind::InvalidInput, "solution is not finite on the domain");
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
    const double pad = 0.05 * (1.0 + hi - lo);
    return Interval{lo - pad, hi + pad};
  };
  FluxModel flux = [&]() {
    if (fkind == "builtin") return FluxModel::builtin(flux_spec.value("name", ""), interval.value_or(probed_interval()));
    if (fkind == "polynomial") {
      if (!flux_spec.contains("coeffs") || !flux_spec["coeffs"].is_array())
        throw Error(ErrorKind::InvalidInput, "polynomial flux needs coeffs");
      std::vector<double> c;
      for (const auto& v : flux_spec["coeffs"]) c.push_back(num(v, "flux.coeffs"));
      return FluxModel::polynomial(c, interval.value_or(probed_interval()));
    }
    if (fkind == "table") {
      FluxModel f = FluxModel::table_csv(resolve(base_dir, flux_spec.value("path", "")));
      return interval ? f.with_interval(*interval) : f;
    }
    throw Error(ErrorKind::InvalidInput, "flux.kind must be builtin, polynomial or table");
  }();

  sc.field = std::make_shared<const SolutionField>(sc.name, dom, ev, flux, interp_err);

  // Source.
  const json src = spec.value("source", json::object());
  const std::string gkind = src.value("kind", skind == "builtin" ? "builtin" : "none");
  if (gkind == "builtin") {
    if (builtin_name.empty()) throw Error(ErrorKind::InvalidInput, "builtin source needs a builtin solution");
    sc.source = {builtin_source(builtin_name, bparams), std::nullopt, "builtin:" + builtin_name};
    sc.has_source = true;
  } else if (gkind == "constant") {
    const double g0 = num(src.value("value", json(0.0)), "source.value");
    sc.source = {[g0](double, double) { return g0; }, std::nullopt, "constant"};
    sc.has_source = true;
  } else if (gkind == "grid") {
    auto grid = GridEvaluator::from_csv(resolve(base_dir, src.value("path", "")), "g");
    sc.source = {[grid](double t, double x) { return grid->value(t, x); }, std::nullopt, "grid"};
    sc.has_source = true;
  } else if (gkind == "none") {
    sc.source = SourceTerm::zero();
    sc.source.description = "none";
  } else {
    throw Error(ErrorKind::InvalidInput, "source.kind must be builtin, constant, grid or none");
  }
  if (src.contains("bound")) {
    const double g = num(src["bound"], "source.bound");
    if (!std::isfinite(g) || g < 0.0) throw Error(ErrorKind::InvalidInput, "source bound must be finite and >= 0");
    sc.source.bound = g;
  } else {
    sc.source.bound = probe_sup_abs(sc.source.g, dom);
  }

  sc.tolerances = default_tolerances();
  if (spec.contains("tolerances")) {
    for (auto& [k, v] : spec["tolerances"].items()) {
      if (!sc.tolerances.count(k)) throw Error(ErrorKind::InvalidInput, "unknown tolerance key '" + k + "'");
      sc.tolerances[k] = num(v, k.c_str());
    }
  }
  for (const auto& [k, v] : overrides) {
    if (!sc.tolerances.count(k)) throw Error(ErrorKind::InvalidInput, "unknown tolerance key '" + k + "'");
    sc.tolerances[k] = v;
  }
  return sc;
}

}  // namespace charflow
