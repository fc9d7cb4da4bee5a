#include "charflow/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "charflow/error.hpp"
#include "charflow/kernels.hpp"

namespace charflow {

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double a = 1.0 - s * s;
  return a * a * a;
}

double bump_prime(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double a = 1.0 - s * s;
  return -6.0 * s * a * a;
}

double TestFunction::value(double t, double x) const {
  return amplitude * bump((t - tc) / rt) * bump((x - xc) / rx);
}

double TestFunction::dt(double t, double x) const {
  return amplitude * bump_prime((t - tc) / rt) / rt * bump((x - xc) / rx);
}

double TestFunction::dx(double t, double x) const {
  return amplitude * bump((t - tc) / rt) * bump_prime((x - xc) / rx) / rx;
}

bool TestFunction::support_inside(const Domain& d) const {
  return rt > 0.0 && rx > 0.0 && d.contains(tc - rt, xc - rx) && d.contains(tc + rt, xc + rx);
}

double TestFunction::unit_time_trace_amplitude(double rt) { return 35.0 / (32.0 * rt); }

std::vector<TestFunction> random_test_functions(const Domain& d, std::size_t count,
                                                std::uint64_t seed, bool straddle_x0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TestFunction> out;
  for (std::size_t k = 0; k < count; ++k) {
    TestFunction f;
    f.rt = (0.1 + 0.15 * unit(rng)) * d.duration();
    f.rx = (0.1 + 0.15 * unit(rng)) * d.width();
    f.tc = d.t0 + f.rt + unit(rng) * (d.duration() - 2.0 * f.rt);
    if (straddle_x0) {
      // x = 0 sits at a sixteenth of the support width, hence on every aligned lattice.
      const int k = 4 + static_cast<int>(unit(rng) * 9.0);
      f.xc = f.rx * (1.0 - std::min(k, 12) / 8.0);
    } else {
      f.xc = d.x0 + f.rx + unit(rng) * (d.width() - 2.0 * f.rx);
    }
    out.push_back(f);
  }
  return out;
}

namespace {

std::string label_of(const TestFunction& f) {
  std::ostringstream os;
  os << "bump(t=" << f.tc << ",x=" << f.xc << ",rt=" << f.rt << ",rx=" << f.rx << ")";
  return os.str();
}

void require_support(const Domain& d, const TestFunction& phi) {
  if (!phi.support_inside(d)) throw Error(ErrorKind::SupportOutOfDomain, "test function " + label_of(phi) + " leaves the domain");
}

// <eta(u)_t + q(u)_x - eta'(u) g, phi> by tensor Simpson; eta = id, q = f gives the weak residual.
template <class Eta, class Q, class DEta>
double residual(const SolutionField& field, const SourceTerm& g, const TestFunction& phi, double mesh,
                Eta eta, Q q, DEta deta) {
  const Lattice2D lat = support_lattice(phi, mesh);
  const auto* ev = field.evaluator().get();
  const double sum = kernels::tensor_simpson(lat, [&](double t, double x) {
    const double st = (t - phi.tc) / phi.rt, sx = (x - phi.xc) / phi.rx;
    if (std::abs(st) >= 1.0 || std::abs(sx) >= 1.0) return 0.0;
    const double u = ev->value(t, x);
    return phi.dt(t, x) * eta(u) + phi.dx(t, x) * q(u) + phi.value(t, x) * deta(u) * g(t, x);
  });
  // <eta_t + q_x - eta' g, phi> = -(phi_t eta + phi_x q + phi eta' g) after integration by parts.
  return -sum;
}

}  // namespace

Lattice2D support_lattice(const TestFunction& phi, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "quadrature mesh must be positive");
  // Nodes aligned with the support box; interval counts are multiples of 16.
  auto axis = [h](double c, double r, double& start, double& step, std::size_t& n) {
    const double blocks = std::ceil(2.0 * r / (16.0 * h) - 1e-9);
    n = 16 * static_cast<std::size_t>(std::max(1.0, blocks));
    start = c - r;
    step = 2.0 * r / static_cast<double>(n);
  };
  Lattice2D lat;
  axis(phi.tc, phi.rt, lat.t_start, lat.dt, lat.nt);
  axis(phi.xc, phi.rx, lat.x_start, lat.dx, lat.nx);
  return lat;
}

double weak_residual_value(const SolutionField& field, const SourceTerm& source,
                           const TestFunction& phi, double mesh) {
  require_support(field.domain(), phi);
  const FluxModel& f = field.flux();
  return residual(
      field, source, phi, mesh, [](double u) { return u; }, [&f](double u) { return f.f(u); },
      [](double) { return 1.0; });
}

ResidualReport weak_residual(const SolutionField& field, const SourceTerm& source,
                             const TestFunction& phi, double mesh, double tol) {
  ResidualReport r;
  r.testfn = label_of(phi);
  r.mesh = mesh;
  r.tol = tol;
  r.value = weak_residual_value(field, source, phi, mesh);
  r.value_half = weak_residual_value(field, source, phi, mesh / 2.0);
  r.ratio = r.value != 0.0 ? std::abs(r.value_half) / std::abs(r.value) : 0.0;
  r.pass = std::abs(r.value) <= tol;
  return r;
}

std::string EntropySpec::label() const {
  switch (kind) {
    case EntropyKind::Linear: return "linear";
    case EntropyKind::Quadratic: return "quadratic";
    case EntropyKind::KruzkovSmoothed: {
      std::ostringstream os;
      os << "kruzkov:" << c << ":" << width;
      return os.str();
    }
  }
  return "?";
}

EntropySpec EntropySpec::parse(const std::string& text) {
  if (text == "linear") return {EntropyKind::Linear, 0.0, 0.0};
  if (text == "quadratic") return {EntropyKind::Quadratic, 0.0, 0.0};
  if (text.rfind("kruzkov", 0) == 0) {
    EntropySpec s{EntropyKind::KruzkovSmoothed, 0.0, 1e-2};
    std::stringstream ss(text);
    std::string part;
    std::getline(ss, part, ':');
    try {
      if (std::getline(ss, part, ':')) s.c = std::stod(part);
      if (std::getline(ss, part, ':')) s.width = std::stod(part);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "bad entropy spec '" + text + "'");
    }
    if (!(s.width > 0.0)) throw Error(ErrorKind::InvalidInput, "kruzkov width must be positive");
    return s;
  }
  throw Error(ErrorKind::InvalidInput, "unknown entropy '" + text + "' (linear, quadratic, kruzkov:C[:W])");
}

EntropyPair::EntropyPair(const EntropySpec& spec, const FluxModel& flux, std::size_t panels)
    : spec_(spec), flux_(flux) {
  if (spec_.kind == EntropyKind::Linear) return;
  const Interval w = flux_.working_interval();
  for (std::size_t i = 0; i <= panels; ++i) nodes_.push_back(w.lo + w.length() * i / panels);
  if (spec_.kind == EntropyKind::KruzkovSmoothed) {
    for (double b : {spec_.c - spec_.width, spec_.c + spec_.width})
      if (b > w.lo && b < w.hi) nodes_.push_back(b);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  }
  table_.assign(nodes_.size(), 0.0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double a = nodes_[i - 1], b = nodes_[i];
    table_[i] = table_[i - 1] + (b - a) / 6.0 * (q_integrand(a) + 4.0 * q_integrand(0.5 * (a + b)) + q_integrand(b));
  }
}

double EntropyPair::q_integrand(double z) const { return deta(z) * flux_.df(z); }

double EntropyPair::eta(double z) const {
  switch (spec_.kind) {
    case EntropyKind::Linear: return z;
    case EntropyKind::Quadratic: return 0.5 * z * z;
    case EntropyKind::KruzkovSmoothed: {
      const double d = z - spec_.c;
      return std::abs(d) >= spec_.width ? std::abs(d) - 0.5 * spec_.width : d * d / (2.0 * spec_.width);
    }
  }
  return 0.0;
}

double EntropyPair::deta(double z) const {
  switch (spec_.kind) {
    case EntropyKind::Linear: return 1.0;
    case EntropyKind::Quadratic: return z;
    case EntropyKind::KruzkovSmoothed: return std::clamp((z - spec_.c) / spec_.width, -1.0, 1.0);
  }
  return 0.0;
}

double EntropyPair::q(double z) const {
  if (spec_.kind == EntropyKind::Linear) return flux_.f(z);
  flux_.require_in_interval(z, "entropy flux argument");
  z = std::clamp(z, nodes_.front(), nodes_.back());
  std::size_t i = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), z) - nodes_.begin());
  i = std::clamp<std::size_t>(i, 1, nodes_.size() - 1) - 1;
  const double a = nodes_[i];
  if (z == a) return table_[i];
  return table_[i] + (z - a) / 6.0 * (q_integrand(a) + 4.0 * q_integrand(0.5 * (a + z)) + q_integrand(z));
}

double entropy_residual_value(const SolutionField& field, const SourceTerm& source,
                              const EntropyPair& pair, const TestFunction& phi, double mesh) {
  if (pair.spec().kind == EntropyKind::Linear) return weak_residual_value(field, source, phi, mesh);
  require_support(field.domain(), phi);
  return residual(
      field, source, phi, mesh, [&pair](double u) { return pair.eta(u); },
      [&pair](double u) { return pair.q(u); }, [&pair](double u) { return pair.deta(u); });
}

ResidualReport entropy_residual(const SolutionField& field, const SourceTerm& source,
                                const EntropySpec& eta, const TestFunction& phi, double mesh,
                                double tol) {
  const EntropyPair pair(eta, field.flux());
  ResidualReport r;
  r.testfn = label_of(phi) + " eta=" + eta.label();
  r.mesh = mesh;
  r.tol = tol;
  r.value = entropy_residual_value(field, source, pair, phi, mesh);
  r.value_half = entropy_residual_value(field, source, pair, phi, mesh / 2.0);
  r.ratio = r.value != 0.0 ? std::abs(r.value_half) / std::abs(r.value) : 0.0;
  r.pass = std::abs(r.value) <= tol;
  return r;
}

MaxPrincipleReport maximum_principle_check(const SolutionField& u, const SolutionField& v,
                                           const SourceTerm& g_u, const SourceTerm& g_v,
                                           int probe_n, double tol) {
  const Domain a = u.domain(), b = v.domain();
  const Domain d{std::max(a.t0, b.t0), std::min(a.t1, b.t1), std::max(a.x0, b.x0), std::min(a.x1, b.x1)};
  if (!(d.t1 > d.t0) || !(d.x1 > d.x0))
    throw Error(ErrorKind::InvalidInput, "fields in the comparison do not overlap");
  MaxPrincipleReport rep;
  for (int i = 0; i < probe_n; ++i) {
    const double t = d.t0 + d.duration() * i / (probe_n - 1);
    for (int j = 0; j < probe_n; ++j) {
      const double x = d.x0 + d.width() * j / (probe_n - 1);
      const double uu = u.eval_u(t, x), vv = v.eval_u(t, x);
      ++rep.probes;
      if (i == 0 && uu > vv + tol) rep.initial_order_ok = false;
      if (g_u(t, x) > g_v(t, x) + tol) rep.source_order_ok = false;
      if (uu > vv + tol) rep.violations.push_back({t, x, uu, vv});
    }
  }
  return rep;
}

SolutionField burgers_derived_field(const SolutionField& field) {
  const FluxModel f = field.flux();
  const Interval w = f.working_interval();
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i <= 1024; ++i) {
    const double s = f.df(w.lo + w.length() * i / 1024.0);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double pad = 0.05 * (1.0 + hi - lo);
  auto base = field.evaluator();
  auto ev = std::make_shared<FunctionEvaluator>(
      [base, f](double t, double x) { return f.df(base->value(t, x)); }, "f'(" + base->describe() + ")");
  return SolutionField(field.name() + ":derived", field.domain(), ev,
                       FluxModel::builtin("burgers", {lo - pad, hi + pad}));
}

SourceTerm burgers_derived_source(const SolutionField& field, const SourceTerm& source) {
  auto base = field.evaluator();
  const FluxModel f = field.flux();
  ScalarFn g = source.g;
  SourceTerm s;
  s.g = [base, f, g](double t, double x) { return f.d2f(base->value(t, x)) * g(t, x); };
  s.description = "f''(u) g";
  if (source.bound) s.bound = field.curvature_bound() / 1.05 * *source.bound;
  return s;
}

ResidualReport flux_derivative_solution_check(const SolutionField& field, const SourceTerm& source,
                                              const TestFunction& phi, double mesh, double tol) {
  const SolutionField v = burgers_derived_field(field);
  return weak_residual(v, burgers_derived_source(field, source), phi, mesh, tol);
}

}  // namespace charflow
