#include "charflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>

#include "CLI11.hpp"

#include "charflow/bv_approx.hpp"
#include "charflow/characteristics.hpp"
#include "charflow/csv.hpp"
#include "charflow/error.hpp"
#include "charflow/eulerian.hpp"
#include "charflow/kernels.hpp"
#include "charflow/lagrangian.hpp"
#include "charflow/low_discrepancy.hpp"
#include "charflow/report.hpp"
#include "charflow/scenario.hpp"

namespace charflow::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string command;
  std::string scenario;
  std::string out_dir;
  int mesh = 0;
  std::vector<std::string> tol_raw;
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  int k = 0;
  int seeds = 0;
  std::string points_file;
  int tests = 0;
  std::string eta;
  std::string other;
  double delta = 0.0;
};

struct Output {
  json results;
  bool pass = true;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

// Raised for failures that belong to a named stage rather than the running command.
struct StageError {
  std::string stage;
  std::string message;
  std::string kind;
};

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  if (n > 1) v.back() = b;
  return v;
}

double jnum(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw Error(ErrorKind::InvalidInput, "expected a number for '" + key + "'");
  return j[key].get<double>();
}

std::pair<double, double> jpair(const json& j, const std::string& key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw Error(ErrorKind::InvalidInput, "'" + key + "' must be a pair of numbers");
  return {a[0].get<double>(), a[1].get<double>()};
}

const SolutionField& F(const Scenario& sc) { return *sc.field; }

double source_bound(const Scenario& sc) { return sc.source.bound.value_or(0.0); }

std::vector<Interval> n_cover(const Scenario& sc) {
  const FluxModel& flux = F(sc).flux();
  return inflection_set(flux, flux.working_interval().length() / 4096.0);
}

double quad_mesh(const Scenario& sc, const Options& o) {
  if (o.mesh > 0) return 1.0 / o.mesh;
  const double n = jnum(sc.block("quadrature"), "mesh", 256.0);
  if (!(n >= 1.0)) throw Error(ErrorKind::InvalidInput, "quadrature.mesh must be >= 1");
  return 1.0 / n;
}

std::vector<TestFunction> test_functions(const Scenario& sc, const Options& o) {
  const json tb = sc.block("tests");
  const Domain& d = F(sc).domain();
  if (tb.contains("functions") && o.tests <= 0) {
    std::vector<TestFunction> out;
    for (const auto& f : tb["functions"]) {
      auto [tc, xc] = jpair(f, "center", {0.5 * (d.t0 + d.t1), 0.5 * (d.x0 + d.x1)});
      auto [rt, rx] = jpair(f, "radii", {0.25 * d.duration(), 0.25 * d.width()});
      TestFunction phi{tc, xc, rt, rx, 1.0};
      if (f.value("normalize", "") == "time-trace") phi.amplitude = TestFunction::unit_time_trace_amplitude(rt);
      if (!phi.support_inside(d)) throw Error(ErrorKind::SupportOutOfDomain, "test function support leaves the domain");
      out.push_back(phi);
    }
    return out;
  }
  const int count = o.tests > 0 ? o.tests : static_cast<int>(jnum(tb, "count", 10));
  return random_test_functions(d, static_cast<std::size_t>(count), o.seed, tb.value("straddle_x0", false));
}

json testfn_json(const TestFunction& p) {
  return {{"center", {p.tc, p.xc}}, {"radii", {p.rt, p.rx}}, {"amplitude", p.amplitude}};
}

json residual_json(const ResidualReport& r) {
  return {{"value", r.value}, {"value_half", r.value_half}, {"ratio", r.ratio},
          {"mesh", r.mesh},   {"tol", r.tol},               {"pass", r.pass}};
}

// Seeds of the Lagrangian parameterization from the [param] block.
std::vector<SeedPoint> param_seeds(const Scenario& sc, int count_override) {
  const json pb = sc.block("param");
  const Domain& d = F(sc).domain();
  const double ts = jnum(pb, "seed_time", d.t0);
  std::vector<SeedPoint> seeds;
  if (pb.contains("seeds") && count_override <= 0) {
    for (const auto& s : pb["seeds"]) {
      if (s.is_number()) seeds.push_back({ts, s.get<double>()});
      else if (s.is_array() && s.size() == 2) seeds.push_back({s[0].get<double>(), s[1].get<double>()});
      else throw Error(ErrorKind::InvalidInput, "param.seeds entries must be x or [t, x]");
    }
  } else {
    const int n = count_override > 0 ? count_override : static_cast<int>(jnum(pb, "count", 9));
    if (n < 2) throw Error(ErrorKind::InvalidInput, "at least 2 seeds are required");
    auto [a, b] = jpair(pb, "x_range", {d.x0 + 0.25 * d.width(), d.x1 - 0.25 * d.width()});
    for (double x : linspace(a, b, n)) seeds.push_back({ts, x});
  }
  for (const auto& s : seeds)
    if (!d.contains(s.t, s.x)) throw Error(ErrorKind::OutOfDomain, "seed outside the domain");
  return seeds;
}

std::vector<double> param_grid(const Scenario& sc, const std::string& block, double fallback_nodes) {
  const Domain& d = F(sc).domain();
  const double n = jnum(sc.block(block), "nodes", fallback_nodes);
  if (n < 3) throw Error(ErrorKind::InvalidInput, block + ".nodes must be >= 3");
  return linspace(d.t0, d.t1, static_cast<std::size_t>(n));
}

LagrangianParam make_param(const Scenario& sc, const Options& o) {
  const auto seeds = param_seeds(sc, o.seeds);
  const auto grid = param_grid(sc, "param", 257);
  return build_parameterization(F(sc), seeds, grid);
}

// ---- commands --------------------------------------------------------------

Output cmd_analyze_flux(const Scenario& sc, const Options&) {
  const FluxModel& flux = F(sc).flux();
  const Interval w = flux.working_interval();
  const double step = w.length() / 1024.0;
  const auto cover = inflection_set(flux, step);
  const double est = hypothesis_h_estimate(flux, step);
  json cov = json::array();
  for (const auto& iv : cover) cov.push_back({iv.lo, iv.hi});
  json samples = json::array();
  for (int i = 1; i < 16; ++i) {
    const double z = w.lo + w.length() * i / 16.0;
    const double r = std::min(w.length() / 64.0, std::min(z - w.lo, w.hi - z));
    const auto c = classify_point(flux, z, r);
    samples.push_back({{"z", z}, {"label", to_string(c.label)}, {"probe_radius", c.probe_radius}});
  }
  const double limit = sc.tol("hypothesis_h") * w.length();
  Output out;
  out.pass = est <= limit;
  out.results = {{"flux", flux.describe()},
                 {"grid_step", step},
                 {"inflection_cover", cov},
                 {"hypothesis_h", {{"estimate", est}, {"limit", limit}, {"holds", out.pass}}},
                 {"classification", samples},
                 {"field_range", {F(sc).range_min(), F(sc).range_max()}},
                 {"speed_bound", F(sc).speed_bound()},
                 {"curvature_bound", F(sc).curvature_bound()}};
  return out;
}

// Lipschitz audit of u along a curve against the registered source bound.
json lipschitz_audit(const Scenario& sc, const CharacteristicCurve& c, bool& pass) {
  const double lip = lipschitz_constant_along(c, F(sc));
  const double G = source_bound(sc);
  const double limit = sc.tol("lipschitz_factor") * G + sc.tol("lipschitz_slack");
  const bool applies = sc.continuous;
  pass = !applies || lip <= limit;
  return {{"lipschitz", lip}, {"source_bound", G}, {"limit", limit}, {"applies", applies}, {"pass", pass}};
}

Output cmd_trace(const Scenario& sc, const Options&) {
  const Domain& d = F(sc).domain();
  const json tb = sc.block("trace");
  auto [t, x] = jpair(tb, "start", {d.t0, 0.5 * (d.x0 + d.x1)});
  if (!d.contains(t, x)) throw Error(ErrorKind::OutOfDomain, "trace start lies outside the domain");
  const double t_end = jnum(tb, "t_end", d.t1);
  const double step = jnum(tb, "step", d.duration() / 1024.0);
  const auto c = integrate_characteristic(F(sc), t, x, t_end, step);
  Output out;
  out.results = {{"start", {t, x}},
                 {"t_end", c.t_end()},
                 {"x_end", c.x.back()},
                 {"nodes", c.size()},
                 {"truncated", c.truncated},
                 {"provenance", c.provenance_label()},
                 {"audit", lipschitz_audit(sc, c, out.pass)}};
  out.files.push_back({"trace.csv", report::curve_csv(c, F(sc))});
  return out;
}

Output cmd_affine_trace(const Scenario& sc, const Options& o) {
  const Domain& d = F(sc).domain();
  const json ab = sc.block("affine");
  auto [t, x] = jpair(ab, "point", {d.t1, 0.5 * (d.x0 + d.x1)});
  const int k = o.k > 0 ? o.k : static_cast<int>(jnum(ab, "k", 64));
  const std::string dir = ab.value("direction", "backward");
  if (dir != "backward" && dir != "forward") throw Error(ErrorKind::InvalidInput, "affine.direction must be backward or forward");
  const Direction direction = dir == "backward" ? Direction::Backward : Direction::Forward;
  const double G = source_bound(sc);
  const auto tr = build_affine_characteristic(F(sc), t, x, k, direction, G);
  const auto& c = tr.curve;
  const double t_other = direction == Direction::Backward ? c.t_begin() : c.t_end();
  const auto oracle = integrate_characteristic(F(sc), t, x, t_other, d.duration() / 8192.0);
  double dist = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (oracle.covers(c.t[i])) dist = std::max(dist, std::abs(c.x[i] - oracle.position_at(c.t[i])));
  const double slack_limit = sc.tol("affine_slack_factor") * G + sc.tol("affine_slack_floor");
  Output out;
  out.pass = tr.achieved_slack <= slack_limit;
  out.results = {{"point", {t, x}},
                 {"k", k},
                 {"direction", dir},
                 {"nodes", c.size()},
                 {"truncated", c.truncated},
                 {"omega_delta", tr.omega_delta},
                 {"source_bound", G},
                 {"achieved_slack", tr.achieved_slack},
                 {"slack_limit", slack_limit},
                 {"max_increment_ratio", tr.max_increment_ratio},
                 {"max_slope_excess", tr.max_slope_excess},
                 {"ode_sup_distance", dist}};
  out.files.push_back({"affine.csv", report::curve_csv(c, F(sc))});
  return out;
}

Output cmd_build_param(const Scenario& sc, const Options& o) {
  const auto p = make_param(sc, o);
  const auto cells = jacobian_positivity(p);
  std::size_t degenerate = 0;
  for (const auto& c : cells) degenerate += c.degenerate ? 1 : 0;
  std::size_t truncated = 0;
  for (const auto& c : p.columns) truncated += c.truncated ? 1 : 0;
  Output out;
  const double defect = p.monotonicity_defect();
  out.pass = defect <= sc.tol("monotone_defect");
  out.results = {{"columns", p.size()},
                 {"time_nodes", p.t_grid.size()},
                 {"labels", p.y},
                 {"monotonicity_defect", defect},
                 {"coverage_radius", p.coverage_radius(F(sc).domain())},
                 {"truncated_columns", truncated},
                 {"jacobian_cells", cells.size()},
                 {"degenerate_cells", degenerate}};
  out.files.push_back({"param.csv", report::param_csv(p, F(sc))});
  return out;
}

Output cmd_lagr_source(const Scenario& sc, const Options& o) {
  const auto p = make_param(sc, o);
  const auto samples = extract_lagrangian_source(p, F(sc));
  const auto cover = n_cover(sc);
  const double tol = sc.tol("lagr_source");
  struct Acc {
    std::size_t count = 0, bad = 0;
    double lo = INFINITY, hi = -INFINITY, sum = 0.0, err = 0.0;
  };
  std::map<std::string, Acc> table;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto& c = p.columns[j];
    const std::size_t n = c.size();
    std::vector<char> on(n);
    for (std::size_t i = 0; i < n; ++i) on[i] = in_cover(cover, F(sc).raw_u(c.t[i], c.x[i]));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i >= 2 ? i - 2 : 0, b = std::min(n - 1, i + 2);
      bool mixed = false;
      for (std::size_t m = a; m <= b; ++m) mixed |= on[m] != on[i];
      const std::string cls = mixed ? "transition" : on[i] ? "on_N" : "off_N";
      auto& acc = table[cls];
      const double v = samples[j][i].value;
      ++acc.count;
      acc.lo = std::min(acc.lo, v);
      acc.hi = std::max(acc.hi, v);
      acc.sum += v;
      if (!mixed) {
        const double expect = on[i] ? 0.0 : sc.source(c.t[i], c.x[i]);
        acc.err = std::max(acc.err, std::abs(v - expect));
        acc.bad += std::abs(v - expect) > tol ? 1 : 0;
      }
    }
  }
  Output out;
  json rows = json::object();
  for (const auto& [cls, acc] : table) {
    json row = {{"count", acc.count}, {"min", acc.lo}, {"max", acc.hi}, {"mean", acc.sum / acc.count}};
    if (cls != "transition") {
      row["max_error"] = acc.err;
      row["failures"] = acc.bad;
      out.pass = out.pass && acc.bad == 0;
    } else {
      row["excluded"] = true;
    }
    rows[cls] = row;
  }
  out.results = {{"columns", p.size()}, {"tol", tol}, {"table", rows},
                 {"reference", "off_N: registered source g(t,x); on_N: 0"}};
  return out;
}

std::vector<SeedPoint> universal_points(const Scenario& sc, const Options& o) {
  std::vector<SeedPoint> pts;
  if (!o.points_file.empty()) {
    const auto table = read_csv(o.points_file);
    const std::size_t ct = table.column("t"), cx = table.column("x");
    for (const auto& row : table.rows) pts.push_back({row[ct], row[cx]});
  } else if (sc.block("universal").contains("points")) {
    for (const auto& p : sc.block("universal")["points"]) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::InvalidInput, "universal.points entries must be [t, x]");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } else {
    const Domain& d = F(sc).domain();
    for (std::size_t i = 1; i <= 16; ++i) {
      const auto h = halton2(i);
      pts.push_back({d.t0 + 0.8 * d.duration() * h[0], d.x0 + d.width() * (0.1 + 0.8 * h[1])});
    }
  }
  for (const auto& p : pts)
    if (!F(sc).domain().contains(p.t, p.x)) throw Error(ErrorKind::OutOfDomain, "universal source point outside the domain");
  return pts;
}

Output cmd_universal_source(const Scenario& sc, const Options& o) {
  const auto pts = universal_points(sc, o);
  const auto samples = universal_source_sample(F(sc), pts, source_bound(sc));
  const double tol = sc.tol("universal_source");
  Output out;
  json rows = json::array();
  for (const auto& s : samples) {
    const double expect = s.n_rule ? 0.0 : sc.source(s.t, s.x);
    const bool ok = s.converged && std::abs(s.value - expect) <= tol;
    out.pass = out.pass && ok;
    rows.push_back({{"t", s.t}, {"x", s.x}, {"value", s.value}, {"reference", expect}, {"terms", s.terms},
                    {"converged", s.converged}, {"n_rule", s.n_rule}, {"pass", ok}});
  }
  out.results = {{"tol", tol}, {"samples", rows}};
  return out;
}

Output cmd_single_valued(const Scenario& sc, const Options& o) {
  const auto p = make_param(sc, o);
  const auto r = check_source_single_valued(p, F(sc), sc.tol("sv_epsilon"), sc.tol("sv_sigma"));
  json viol = json::array();
  for (const auto& v : r.violations)
    viol.push_back({{"pair", {v.lower, v.upper}},
                    {"time", {v.time_a, v.time_b}},
                    {"values", {{v.values_a[0], v.values_a[1]}, {v.values_b[0], v.values_b[1]}}},
                    {"gap", v.gap}});
  Output out;
  out.pass = r.ok();
  out.results = {{"epsilon", r.epsilon}, {"sigma", r.sigma}, {"columns", p.size()},
                 {"discrepancies", r.discrepancies.size()}, {"violations", viol}};
  return out;
}

Output residual_command(const Scenario& sc, const Options& o, const std::string& tol_key,
                        const std::function<ResidualReport(const TestFunction&, double, double)>& fn) {
  const auto phis = test_functions(sc, o);
  const double h = quad_mesh(sc, o), tol = sc.tol(tol_key);
  std::vector<ResidualReport> reps(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) reps[i] = fn(phis[i], h, tol);
  Output out;
  json rows = json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    json row = residual_json(reps[i]);
    row["testfn"] = testfn_json(phis[i]);
    rows.push_back(row);
    worst = std::max(worst, std::abs(reps[i].value));
    out.pass = out.pass && reps[i].pass;
  }
  out.results = {{"mesh", h}, {"tol", tol}, {"max_abs", worst}, {"residuals", rows}};
  return out;
}

Output cmd_weak_residual(const Scenario& sc, const Options& o) {
  return residual_command(sc, o, "weak_residual", [&](const TestFunction& phi, double h, double tol) {
    return weak_residual(F(sc), sc.source, phi, h, tol);
  });
}

std::vector<EntropySpec> entropy_list(const Scenario& sc, const Options& o) {
  std::vector<std::string> names;
  if (!o.eta.empty()) {
    names.push_back(o.eta);
  } else if (sc.block("entropy").contains("eta")) {
    for (const auto& e : sc.block("entropy")["eta"]) names.push_back(e.get<std::string>());
  } else {
    names.push_back("quadratic");
    const double lo = F(sc).range_min(), hi = F(sc).range_max();
    for (int k = 1; k <= 5; ++k) names.push_back("kruzkov:" + report::format_double(lo + (hi - lo) * k / 6.0));
  }
  std::vector<EntropySpec> out;
  for (const auto& n : names) out.push_back(EntropySpec::parse(n));
  return out;
}

Output cmd_entropy_check(const Scenario& sc, const Options& o) {
  Output out;
  json per = json::array();
  for (const auto& spec : entropy_list(sc, o)) {
    auto sub = residual_command(sc, o, "entropy_residual", [&](const TestFunction& phi, double h, double tol) {
      return entropy_residual(F(sc), sc.source, spec, phi, h, tol);
    });
    sub.results["eta"] = spec.label();
    sub.results["pass"] = sub.pass;
    per.push_back(sub.results);
    out.pass = out.pass && sub.pass;
  }
  out.results = {{"entropies", per}};
  return out;
}

Output cmd_flux_derived(const Scenario& sc, const Options& o) {
  auto out = residual_command(sc, o, "flux_derived", [&](const TestFunction& phi, double h, double tol) {
    return flux_derivative_solution_check(F(sc), sc.source, phi, h, tol);
  });
  out.results["derived_flux"] = "burgers";
  return out;
}

Output cmd_max_principle(const Scenario& sc, const Options& o) {
  const std::string other = !o.other.empty() ? o.other : sc.block("max_principle").value("other", "");
  if (other.empty()) throw Error(ErrorKind::InvalidInput, "max-principle needs --other or max_principle.other");
  Scenario v;
  try {
    v = load_scenario(other);
  } catch (const Error& e) {
    throw StageError{"scenario", e.what(), to_string(e.kind())};
  }
  const auto r = maximum_principle_check(F(sc), *v.field, sc.source, v.source, 64, sc.tol("max_principle"));
  json viol = json::array();
  for (const auto& p : r.violations) viol.push_back({{"t", p.t}, {"x", p.x}, {"u", p.u}, {"v", p.v}});
  Output out;
  out.pass = r.ok();
  out.results = {{"other", v.name},
                 {"probes", r.probes},
                 {"initial_order_ok", r.initial_order_ok},
                 {"source_order_ok", r.source_order_ok},
                 {"violations", viol}};
  return out;
}

Output cmd_bv_approx(const Scenario& sc, const Options& o) {
  const json bb = sc.block("bv");
  const double delta = o.delta > 0.0 ? o.delta : jnum(bb, "delta", 0.1);
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorKind::InvalidInput, "delta must lie in (0, 1]");
  const auto dense = static_cast<std::size_t>(jnum(bb, "dense_seq_len", 64));
  const auto grid = param_grid(sc, "bv", 129);
  const auto param_grid_nodes = param_grid(sc, "param", 129);

  int n = static_cast<int>(std::ceil(1.0 / delta)) + 1;
  LagrangianParam p;
  double spacing = INFINITY;
  for (int attempt = 0; attempt < 8; ++attempt, n *= 2) {
    p = build_parameterization(F(sc), param_seeds(sc, n), param_grid_nodes);
    spacing = 0.0;
    for (std::size_t j = 1; j < p.y.size(); ++j) spacing = std::max(spacing, p.y[j] - p.y[j - 1]);
    if (spacing <= delta) break;
  }
  MonotoneOptions mo;
  mo.seed = o.seed;
  mo.monotone_tol = sc.tol("bv_monotone");
  const auto res = monotone_approximation(F(sc), p, delta, dense, grid, mo);
  json certs = json::array();
  for (const auto& c : res.certificates)
    certs.push_back({{"strip", c.strip},
                     {"y", {c.y_lo, c.y_hi}},
                     {"omega_delta", c.omega_delta},
                     {"achieved_sup_gap", c.achieved_sup_gap},
                     {"monotone_ok", c.monotone_ok},
                     {"monotone_defect", c.monotone_defect},
                     {"boundary_order_changes", c.boundary_order_changes},
                     {"cuts", c.cuts},
                     {"degenerate", c.degenerate}});
  const double bound = res.omega_delta + sc.tol("bv_gap_slack");
  Output out;
  out.pass = res.monotone_ok() && res.max_gap() <= bound;
  out.results = {{"delta", delta},
                 {"columns", p.size()},
                 {"label_spacing", spacing},
                 {"omega_delta", res.omega_delta},
                 {"max_gap", res.max_gap()},
                 {"gap_bound", bound},
                 {"monotone_ok", res.monotone_ok()},
                 {"certificates", certs}};
  return out;
}

using Command = Output (*)(const Scenario&, const Options&);

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table = {
      {"analyze-flux", cmd_analyze_flux},
      {"trace", cmd_trace},
      {"affine-trace", cmd_affine_trace},
      {"build-param", cmd_build_param},
      {"lagr-source", cmd_lagr_source},
      {"universal-source", cmd_universal_source},
      {"single-valued-check", cmd_single_valued},
      {"weak-residual", cmd_weak_residual},
      {"entropy-check", cmd_entropy_check},
      {"flux-derived-check", cmd_flux_derived},
      {"max-principle", cmd_max_principle},
      {"bv-approx", cmd_bv_approx},
  };
  return table;
}

Output dispatch(const std::string& name, const Scenario& sc, const Options& o) {
  for (const auto& [n, fn] : commands())
    if (n == name) {
      try {
        return fn(sc, o);
      } catch (const Error& e) {
        throw StageError{name, e.what(), to_string(e.kind())};
      } catch (const std::exception& e) {
        throw StageError{name, e.what(), "Internal"};
      }
    }
  throw StageError{"flags", "unknown command " + name, "InvalidInput"};
}

bool applicable(const std::string& name, const Scenario& sc) {
  if (name == "max-principle") return sc.block("max_principle").contains("other");
  if (name == "bv-approx") return sc.spec.contains("bv");
  if (name == "flux-derived-check" || name == "trace" || name == "affine-trace") return sc.continuous;
  if (name == "build-param" || name == "lagr-source" || name == "universal-source" || name == "single-valued-check")
    return sc.continuous && sc.has_source;
  return true;
}

// Runs every applicable command concurrently; assembly follows the declared order.
Output cmd_report(const Scenario& sc, const Options& o) {
  std::vector<std::pair<std::string, std::future<Output>>> jobs;
  for (const auto& [name, fn] : commands()) {
    if (!applicable(name, sc)) continue;
    jobs.emplace_back(name, std::async(std::launch::async, [&sc, &o, n = name] { return dispatch(n, sc, o); }));
  }
  Output out;
  json parts = json::object(), order = json::array(), failed = json::array();
  std::optional<StageError> first_error;
  for (auto& [name, fut] : jobs) {
    try {
      Output part = fut.get();
      parts[name] = {{"verdict", part.pass ? "pass" : "fail"}, {"results", part.results}};
      order.push_back(name);
      if (!part.pass) failed.push_back(name);
      out.pass = out.pass && part.pass;
      for (auto& f : part.files) out.files.push_back(std::move(f));
    } catch (const StageError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;
  out.results = {{"commands", order}, {"failed", failed}, {"sections", parts}};
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, fn] : commands()) v.push_back(n);
    v.push_back("report");
    return v;
  }();
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out) {
  kernels::configure_threads_from_env();
  Options o;
  CLI::App app{"charflow: characteristic analysis of scalar balance laws"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--scenario", o.scenario, "scenario file (TOML or JSON) or builtin scenario name")->required();
  app.add_option("--out", o.out_dir, "directory for report files");
  app.add_option("--mesh", o.mesh, "quadrature mesh N (spacing 1/N)")->check(CLI::PositiveNumber);
  app.add_option("--tol-override", o.tol_raw, "KEY=VAL tolerance override (repeatable)");
  app.add_option("--seed", o.seed, "seed for random test functions and low-discrepancy offsets");
  app.add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp from reports");

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : command_names()) subs[name] = app.add_subcommand(name);
  subs["affine-trace"]->add_option("--k", o.k, "number of affine segments")->check(CLI::PositiveNumber);
  subs["build-param"]->add_option("--seeds", o.seeds, "number of seeds")->check(CLI::Range(2, 1 << 20));
  subs["universal-source"]->add_option("--points", o.points_file, "CSV file with t,x columns");
  subs["weak-residual"]->add_option("--tests", o.tests, "number of random test functions")->check(CLI::PositiveNumber);
  subs["entropy-check"]->add_option("--eta", o.eta, "linear | quadratic | kruzkov:C[:W]");
  subs["entropy-check"]->add_option("--tests", o.tests, "number of random test functions")->check(CLI::PositiveNumber);
  subs["flux-derived-check"]->add_option("--tests", o.tests, "number of random test functions")->check(CLI::PositiveNumber);
  subs["max-principle"]->add_option("--other", o.other, "scenario of the upper solution");
  subs["bv-approx"]->add_option("--delta", o.delta, "label strip width")->check(CLI::PositiveNumber);

  auto fail = [&](const std::string& stage, const std::string& msg, const std::string& kind) {
    out << report::error_object(stage, msg, kind).dump(2) << '\n';
    return kExitInputError;
  };

  std::vector<std::string> store{"charflow"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    return fail("flags", e.what(), "InvalidInput");
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) o.command = name;

  Tolerances overrides;
  for (const auto& kv : o.tol_raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) return fail("flags", "--tol-override expects KEY=VAL, got " + kv, "InvalidInput");
    if (!default_tolerances().count(kv.substr(0, eq)))
      return fail("flags", "unknown tolerance key '" + kv.substr(0, eq) + "'", "InvalidInput");
    try {
      std::size_t used = 0;
      const std::string val = kv.substr(eq + 1);
      overrides[kv.substr(0, eq)] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      return fail("flags", "bad tolerance value in " + kv, "InvalidInput");
    }
  }

  Scenario sc;
  try {
    sc = load_scenario(o.scenario, overrides);
  } catch (const Error& e) {
    return fail("scenario", e.what(), to_string(e.kind()));
  } catch (const std::exception& e) {
    return fail("scenario", e.what(), "InvalidInput");
  }

  try {
    Output res = o.command == "report" ? cmd_report(sc, o) : dispatch(o.command, sc, o);
    const json rep = report::envelope(o.command, sc, res.pass, res.results, !o.no_timestamp);
    const std::string text = rep.dump(2) + "\n";
    if (!o.out_dir.empty()) {
      report::write_text(o.out_dir, o.command + ".json", text);
      for (const auto& [file, body] : res.files) report::write_text(o.out_dir, file, body);
    }
    out << text;
    return res.pass ? kExitPass : kExitVerdictFailure;
  } catch (const StageError& e) {
    return fail(e.stage, e.message, e.kind);
  } catch (const Error& e) {
    return fail("output", e.what(), to_string(e.kind()));
  }
}

}  // namespace charflow::cli
