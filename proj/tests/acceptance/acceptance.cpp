// Acceptance gate: one line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "charflow/builtins.hpp"
#include "charflow/bv_approx.hpp"
#include "charflow/characteristics.hpp"
#include "charflow/eulerian.hpp"
#include "charflow/flux_model.hpp"
#include "charflow/lagrangian.hpp"
#include "charflow/low_discrepancy.hpp"
#include "charflow/scenario.hpp"

using namespace charflow;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED{" << what << "}";
    }
  }
};

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

std::vector<SeedPoint> cubic_merge_seeds() {
  std::vector<SeedPoint> s{{0.5, 0.0}};
  for (double d : {0.1, 0.2, 0.3, 0.4}) {
    const double x = std::pow(d / 3.0, 3.0);
    s.push_back({0.5, x});
    s.push_back({0.5, -x});
  }
  return s;
}

// ---- 1 ---------------------------------------------------------------------
void weak_form(Outcome& o) {
  double worst_smooth = 0.0;
  for (const char* name : {"constant", "rarefaction", "affine-source", "manufactured"}) {
    const auto b = make_builtin(name);
    double m = 0.0;
    for (const auto& phi : random_test_functions(b.field.domain(), 10, 1))
      m = std::max(m, std::abs(weak_residual_value(b.field, b.source, phi, 1.0 / 256)));
    o.require(m <= 1e-6, std::string(name));
    worst_smooth = std::max(worst_smooth, m);
  }
  o.detail << "smooth max " << worst_smooth << " <= 1e-6;";
  for (const char* name : {"sqrt-stationary", "cubic-merge"}) {
    const auto b = make_builtin(name);
    double m = 0.0, mh = 0.0;
    for (const auto& phi : random_test_functions(b.field.domain(), 10, 1, true)) {
      const auto r = weak_residual(b.field, b.source, phi, 1.0 / 512, 1e-4);
      m = std::max(m, std::abs(r.value));
      mh = std::max(mh, std::abs(r.value_half));
    }
    const double ratio = mh / m;
    o.require(m <= 1e-4, std::string(name) + " residual");
    o.require(ratio <= 0.6, std::string(name) + " ratio");
    o.detail << " " << name << " max " << m << " ratio " << ratio << ";";
  }
}

// ---- 2 ---------------------------------------------------------------------
void lipschitz(Outcome& o) {
  struct Case {
    const char* name;
    double g;
    std::vector<SeedPoint> seeds;
  };
  std::vector<SeedPoint> sqrt_fan;
  for (double x : linspace(-0.25, 0.25, 9)) sqrt_fan.push_back({0.0, x});
  const Case cases[] = {{"sqrt-stationary", 0.5, sqrt_fan}, {"cubic-merge", 1.0 / 3.0, cubic_merge_seeds()}};
  for (const auto& c : cases) {
    const auto b = make_builtin(c.name);
    const Domain& d = b.field.domain();
    double worst = 0.0;
    std::size_t curves = 0;
    for (const auto& s : c.seeds)
      for (double end : {d.t0, d.t1}) {
        if (end == s.t) continue;
        const auto curve = integrate_characteristic(b.field, s.t, s.x, end, 1.0 / 1024);
        if (curve.size() < 2) continue;
        worst = std::max(worst, lipschitz_constant_along(curve, b.field));
        ++curves;
      }
    o.require(worst <= 1.1 * c.g, c.name);
    o.detail << " " << c.name << " " << curves << " curves max " << worst << " <= " << 1.1 * c.g << ";";
  }
  // context only: cubic-merge paths from t0 that never reach x = 0
  const auto cm = make_builtin("cubic-merge");
  double fan0 = 0.0;
  for (double x : linspace(-0.25, 0.25, 9))
    fan0 = std::max(fan0, lipschitz_constant_along(integrate_characteristic(cm.field, 0.0, x, 1.0, 1.0 / 1024), cm.field));
  o.detail << " (cubic-merge t0 fan without crossings: " << fan0 << ")";
}

// ---- 3 ---------------------------------------------------------------------
double affine_error(const AffineTrace& tr, const std::function<double(double)>& oracle) {
  double e = 0.0;
  for (std::size_t i = 0; i < tr.curve.size(); ++i) e = std::max(e, std::abs(tr.curve.x[i] - oracle(tr.curve.t[i])));
  return e;
}

void dependency_triangles(Outcome& o) {
  const auto r = make_builtin("rarefaction");
  const double g = 0.0;  // rarefaction source
  const int ks[] = {16, 32, 64, 128};
  std::vector<double> err;
  double slack = 0.0;
  for (int k : ks) {
    const auto tr = build_affine_characteristic(r.field, 2.0, 1.0, k, Direction::Backward, g);
    err.push_back(affine_error(tr, [](double t) { return t / 2.0; }));
    slack = std::max(slack, tr.achieved_slack);
    o.require(tr.achieved_slack <= 0.05 * g + 1e-9, "rarefaction slack k=" + std::to_string(k));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const bool exact = err[i] <= 1e-12;
    const bool halves = ks[i] * err[i] <= 1.25 * ks[i - 1] * err[i - 1];
    o.require(exact || halves, "rarefaction convergence k=" + std::to_string(ks[i]));
  }
  o.detail << "rarefaction errors";
  for (double e : err) o.detail << " " << e;
  o.detail << ", slack " << slack << " <= 0.05 G + 1e-9;";

  // curved characteristics, reported as extra evidence
  const auto s = make_builtin("sqrt-stationary");
  const auto oracle = integrate_characteristic(s.field, 1.0, 0.5, 0.0, 1.0 / 16384);
  std::vector<double> es;
  for (int k : ks) {
    const auto tr = build_affine_characteristic(s.field, 1.0, 0.5, k, Direction::Backward, 0.5);
    es.push_back(affine_error(tr, [&](double t) { return oracle.position_at(t); }));
  }
  o.detail << " sqrt-stationary errors";
  for (double e : es) o.detail << " " << e;
  o.detail << " ratios";
  for (std::size_t i = 1; i < es.size(); ++i) o.detail << " " << es[i] / es[i - 1];
  o.detail << " (evidence)";
}

// ---- 4 ---------------------------------------------------------------------
std::vector<EntropySpec> entropy_family(const SolutionField& f) {
  std::vector<EntropySpec> v{EntropySpec::parse("quadratic")};
  for (int k = 1; k <= 5; ++k) {
    EntropySpec e;
    e.kind = EntropyKind::KruzkovSmoothed;
    e.c = f.range_min() + (f.range_max() - f.range_min()) * k / 6.0;
    v.push_back(e);
  }
  return v;
}

void entropy(Outcome& o) {
  struct Case {
    const char* name;
    double tol;
    bool straddle;
  };
  const Case cases[] = {{"constant", 1e-5, false},        {"rarefaction", 1e-5, false},
                        {"affine-source", 1e-5, false},   {"manufactured", 1e-5, false},
                        {"sqrt-stationary", 1e-4, true},  {"cubic-merge", 1e-4, true}};
  for (const auto& c : cases) {
    const auto b = make_builtin(c.name);
    const auto tests = random_test_functions(b.field.domain(), 10, 2, c.straddle);
    double m = 0.0;
    for (const auto& spec : entropy_family(b.field)) {
      const EntropyPair pair(spec, b.field.flux());
      for (const auto& phi : tests) m = std::max(m, std::abs(entropy_residual_value(b.field, b.source, pair, phi, 1.0 / 512)));
    }
    o.require(m <= c.tol, c.name);
    o.detail << " " << c.name << " " << m << ";";
  }
  const auto s = make_builtin("stationary-shock");
  const TestFunction phi{0.5, 0.0, 0.25, 0.25, TestFunction::unit_time_trace_amplitude(0.25)};
  const double v = entropy_residual_value(s.field, s.source, EntropyPair(EntropySpec::parse("quadratic"), s.field.flux()), phi, 1.0 / 512);
  o.require(v >= -0.70 && v <= -0.63, "shock value");
  o.detail << " shock " << v << " in [-0.70, -0.63]";
}

// ---- 5 ---------------------------------------------------------------------
void basic_cuts(Outcome& o) {
  const auto b = make_builtin("cubic-merge");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(0.1, 0.9), ux(-0.3, 0.3);
  CutField field(b.field);
  bool idempotent = true;
  for (int k = 0; k < 16; ++k) {
    const double t = ut(rng), x = ux(rng);
    const auto fwd = integrate_characteristic(field.speed(), t, x, 1.0, 1.0 / 512);
    const auto bwd = integrate_characteristic(field.speed(), t, x, 0.0, 1.0 / 512);
    CharacteristicCurve curve = bwd;  // ascending in t, ends at the seed
    curve.t.insert(curve.t.end(), fwd.t.begin() + 1, fwd.t.end());
    curve.x.insert(curve.x.end(), fwd.x.begin() + 1, fwd.x.end());
    const auto mode = (rng() & 1) ? CutMode::CapAbove : CutMode::CapBelow;
    const CutField next = basic_cut(field, curve, mode);
    const CutField again = basic_cut(next, curve, mode);
    for (double tt = 0.0; tt <= 1.0; tt += 1.0 / 32)
      for (double xx = -1.0; xx <= 1.0; xx += 1.0 / 64) idempotent &= again.eval(tt, xx) == next.eval(tt, xx);
    field = next;
  }
  o.require(idempotent, "idempotence");

  const auto snapshot = field.as_field("cut");
  double worst = 0.0;
  for (int k = 0; k < 9; ++k) {
    const double x = ux(rng);
    for (double end : {0.0, 1.0}) {
      const auto c = integrate_characteristic(field.speed(), 0.5, x, end, 1.0 / 1024);
      worst = std::max(worst, lipschitz_constant_along(c, snapshot));
    }
  }
  o.require(worst <= 1.1 / 3.0, "lipschitz");
  o.detail << "16 cuts, idempotent " << (idempotent ? "yes" : "no") << ", re-traced max Lipschitz " << worst
           << " <= " << 1.1 / 3.0;
}

// ---- 6 ---------------------------------------------------------------------
void monotone(Outcome& o) {
  const auto sc = load_scenario("wiggle");
  const SolutionField& f = *sc.field;
  const auto pgrid = linspace(0.0, 1.0, 65);
  const auto bvgrid = linspace(0.0, 1.0, 129);
  double prev_omega = INFINITY;
  for (double delta : {0.2, 0.1, 0.05}) {
    LagrangianParam p;
    std::size_t n = static_cast<std::size_t>(std::ceil(1.0 / delta)) + 1;
    for (int attempt = 0; attempt < 8; ++attempt, n *= 2) {
      std::vector<SeedPoint> seeds;
      for (double x : linspace(-1.0, 1.0, n)) seeds.push_back({0.5, x});
      p = build_parameterization(f, seeds, pgrid);
      double spacing = 0.0;
      for (std::size_t j = 1; j < p.y.size(); ++j) spacing = std::max(spacing, p.y[j] - p.y[j - 1]);
      if (spacing <= delta) break;
    }
    MonotoneOptions mo;
    mo.monotone_tol = 1e-6;
    const auto res = monotone_approximation(f, p, delta, 64, bvgrid, mo);
    const std::string tag = "delta=" + std::to_string(delta);
    o.require(res.monotone_ok(), tag + " monotone");
    o.require(res.max_gap() <= res.omega_delta + 1e-3, tag + " gap");
    o.require(res.omega_delta <= prev_omega, tag + " omega order");
    prev_omega = res.omega_delta;
    o.detail << " delta " << delta << ": gap " << res.max_gap() << " <= omega " << res.omega_delta << " + 1e-3;";
  }
}

// ---- 7 ---------------------------------------------------------------------
void lagrangian_source(Outcome& o) {
  const auto b = make_builtin("cubic-merge");
  const auto p = build_parameterization(b.field, cubic_merge_seeds(), linspace(0.0, 1.0, 1001));
  const auto src = extract_lagrangian_source(p, b.field);
  const auto& flux = b.field.flux();
  const auto cover = inflection_set(flux, flux.working_interval().length() / 4096.0);

  struct Node {
    std::size_t j, i;
  };
  std::vector<Node> clean;
  double err = 0.0;
  std::size_t excluded = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto& c = p.columns[j];
    const std::size_t n = c.size();
    std::vector<char> on(n);
    for (std::size_t i = 0; i < n; ++i) on[i] = in_cover(cover, b.field.eval_u(c.t[i], c.x[i]));
    for (std::size_t i = 0; i < n; ++i) {
      bool mixed = false;
      for (std::size_t m = (i >= 2 ? i - 2 : 0); m <= std::min(n - 1, i + 2); ++m) mixed |= on[m] != on[i];
      if (mixed) {
        ++excluded;
        continue;
      }
      const double expect = on[i] ? 0.0 : 1.0 / 3.0;
      err = std::max(err, std::abs(src[j][i].value - expect));
      if (c.t[i] >= 0.05 && c.t[i] <= 0.95) clean.push_back({j, i});
    }
  }
  o.require(err <= 1e-2, "column sources");
  o.detail << "column max error " << err << " (" << excluded << " transition nodes excluded);";

  std::vector<SeedPoint> probes;
  std::vector<double> expect;
  for (std::uint64_t k = 1; probes.size() < 20; ++k) {
    const auto& nd = clean[static_cast<std::size_t>(van_der_corput(k) * clean.size())];
    probes.push_back({p.columns[nd.j].t[nd.i], p.columns[nd.j].x[nd.i]});
    expect.push_back(src[nd.j][nd.i].value);
  }
  const auto uni = universal_source_sample(b.field, probes, 1.0 / 3.0);
  double uerr = 0.0;
  bool converged = true;
  for (std::size_t k = 0; k < uni.size(); ++k) {
    uerr = std::max(uerr, std::abs(uni[k].value - expect[k]));
    converged &= uni[k].converged;
  }
  o.require(converged, "universal convergence");
  o.require(uerr <= 2e-2, "universal agreement");
  o.detail << " universal vs column max " << uerr << " over 20 probes;";

  const auto sv = check_source_single_valued(p, b.field, 0.05, 0.05);
  o.require(sv.ok(), "single-valued");
  o.detail << " single-valued violations " << sv.violations.size();
}

// ---- 8 ---------------------------------------------------------------------
void order_machinery(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto t = linspace(0, 1, 65);
  const auto q = rational_times(0, 1, 32);
  std::size_t bad = 0;
  for (int family = 0; family < 100; ++family) {
    std::vector<CharacteristicCurve> curves;
    CharacteristicCurve prev;
    prev.t = t;
    prev.x.assign(t.size(), -1.0 + 0.1 * U(rng));
    for (std::size_t i = 0; i < t.size(); ++i) prev.x[i] += 0.2 * std::sin(3 * t[i] + U(rng));
    curves.push_back(prev);
    for (int k = 1; k < 8; ++k) {
      CharacteristicCurve c = prev;
      const double amp = 0.01 + 0.1 * U(rng), a = U(rng), b = a + 0.5 * U(rng);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const bool touch = t[i] >= a && t[i] <= b && U(rng) < 0.9;
        c.x[i] += touch ? 0.0 : amp * (0.5 + U(rng));
      }
      c.x[0] = prev.x[0] + amp;
      curves.push_back(c);
      prev = c;
    }
    for (int k = 1; k < 8; ++k) bad += theta_encode(curves[k - 1], q) < theta_encode(curves[k], q) ? 0 : 1;
  }
  o.require(bad == 0, "theta order");
  o.detail << "theta order failures " << bad << " over 100 families;";

  double sup = 0.0;
  const auto check_shuffles = [&](const SolutionField& f, std::vector<SeedPoint> seeds, const std::vector<double>& g) {
    const auto base = build_parameterization(f, seeds, g);
    for (int s = 0; s < 10; ++s) {
      std::shuffle(seeds.begin(), seeds.end(), rng);
      const auto p = build_parameterization(f, seeds, g);
      if (p.size() != base.size()) {
        sup = INFINITY;
        return;
      }
      for (std::size_t j = 0; j < p.size(); ++j)
        for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(p.columns[j].x[i] - base.columns[j].x[i]));
    }
  };
  check_shuffles(make_builtin("cubic-merge").field, cubic_merge_seeds(), linspace(0, 1, 257));
  std::vector<SeedPoint> rs;
  for (double x : linspace(-0.45, 0.45, 9)) rs.push_back({1.0, x});
  check_shuffles(make_builtin("rarefaction").field, rs, linspace(1, 2, 129));
  o.require(sup <= 1e-9, "shuffled seeds");
  o.detail << " shuffled-seed sup distance " << sup;
}

// ---- 9 ---------------------------------------------------------------------
void max_principle(Outcome& o) {
  const std::pair<const char*, const char*> pairs[] = {
      {"constant-zero", "constant-one"}, {"rarefaction", "rarefaction-shifted"}, {"manufactured", "manufactured-shifted"}};
  for (const auto& [a, b] : pairs) {
    const auto u = load_scenario(a), v = load_scenario(b);
    const auto r = maximum_principle_check(*u.field, *v.field, u.source, v.source, 64);
    o.require(r.ok(), std::string(a) + " <= " + b);
    o.detail << " " << a << "/" << b << ": " << r.violations.size() << " violations of " << r.probes << ";";
  }
}

// ---- 10 --------------------------------------------------------------------
void burgers_derived(Outcome& o) {
  for (const char* name : {"constant", "rarefaction", "sqrt-stationary"}) {
    const auto sc = load_scenario(name);
    const double tol = sc.tol("flux_derived");
    const double mesh = 1.0 / sc.block("quadrature").value("mesh", 256.0);
    double m = 0.0;
    bool ok = true;
    for (const auto& phi : random_test_functions(sc.field->domain(), 10, 3, sc.hoelder)) {
      const auto r = flux_derivative_solution_check(*sc.field, sc.source, phi, mesh, tol);
      ok &= r.pass;
      m = std::max(m, std::abs(r.value));
    }
    o.require(ok, name);
    o.detail << " " << name << " " << m << " <= " << tol << ";";
  }
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* title;
    void (*run)(Outcome&);
  };
  const Item items[] = {
      {1, "weak-form exactness", weak_form},
      {2, "Lipschitz audit along characteristics", lipschitz},
      {3, "dependency-triangle convergence", dependency_triangles},
      {4, "entropy equality", entropy},
      {5, "basic-cut safety", basic_cuts},
      {6, "monotone approximation certificate", monotone},
      {7, "Lagrangian source consistency", lagrangian_source},
      {8, "order machinery", order_machinery},
      {9, "maximum principle", max_principle},
      {10, "Burgers-derived field", burgers_derived},
  };
  int failed = 0;
  for (const auto& it : items) {
    Outcome o;
    o.detail.precision(4);
    const auto start = std::chrono::steady_clock::now();
    try {
      it.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", it.id, it.title, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
