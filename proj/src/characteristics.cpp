#include "charflow/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "charflow/error.hpp"
#include "charflow/kernels.hpp"
#include "charflow/quadrature.hpp"

namespace charflow {

namespace {

constexpr double kFreeze = 1e-12;

std::string point_str(double t, double x) {
  std::ostringstream os;
  os << "(" << t << ", " << x << ")";
  return os.str();
}

double frozen(double lambda) { return std::abs(lambda) < kFreeze ? 0.0 : lambda; }

// One Heun step of size h from (t, x); nullopt when the step leaves the domain.
std::optional<double> heun_step(const SpeedField& s, double t, double x, double h) {
  const double k1 = frozen(s.lambda(t, x));
  if (k1 == 0.0) return x;
  const double xp = x + h * k1;
  if (!s.domain.contains(t + h, xp)) return std::nullopt;
  const double k2 = frozen(s.lambda(t + h, xp));
  const double xn = x + 0.5 * h * (k1 + k2);
  if (!s.domain.contains(t + h, xn)) return std::nullopt;
  return xn;
}

// Integrates from (t, x) to t_target in n equal Heun steps.
std::optional<double> advance(const SpeedField& s, double t, double x, double t_target, int n) {
  const double h = (t_target - t) / n;
  for (int i = 0; i < n; ++i) {
    const double tt = (i + 1 == n) ? t_target - h : t + i * h;
    auto next = heun_step(s, tt, x, h);
    if (!next) return std::nullopt;
    x = *next;
  }
  return x;
}

}  // namespace

bool CharacteristicCurve::covers(double time) const {
  if (t.empty()) return false;
  const double slack = 1e-12 * (1.0 + std::abs(t.front()) + std::abs(t.back()));
  return time >= t.front() - slack && time <= t.back() + slack;
}

double CharacteristicCurve::position_at(double time) const {
  if (t.size() == 1 || time <= t.front()) return x.front();
  if (time >= t.back()) return x.back();
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin()) - 1;
  if (time == t[i]) return x[i];
  const double w = (time - t[i]) / (t[i + 1] - t[i]);
  return (1.0 - w) * x[i] + w * x[i + 1];
}

std::string CharacteristicCurve::provenance_label() const {
  return provenance == Provenance::Ode ? "ode" : "affine(" + std::to_string(segments) + ")";
}

SpeedField SpeedField::of(const SolutionField& field) {
  return {[&field](double t, double x) { return field.eval_lambda(t, x); }, field.domain()};
}

CharacteristicCurve integrate_characteristic(const SolutionField& field, double t_start,
                                             double x_start, double t_end, double step) {
  return integrate_characteristic(SpeedField::of(field), t_start, x_start, t_end, step);
}

CharacteristicCurve integrate_characteristic(const SpeedField& speed, double t_start, double x_start,
                                             double t_end, double step) {
  if (!speed.domain.contains(t_start, x_start))
    throw Error(ErrorKind::OutOfDomain, "characteristic start " + point_str(t_start, x_start) + " outside domain");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, "integration step must be positive");

  CharacteristicCurve c;
  const double t_clip = std::clamp(t_end, speed.domain.t0, speed.domain.t1);
  c.truncated = t_clip != t_end;
  const double span = t_clip - t_start;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
  const double h = span / n;

  std::vector<double> ts{t_start}, xs{x_start};
  double x = x_start;
  for (int i = 0; i < n && span != 0.0; ++i) {
    const double t = t_start + i * h;
    auto next = heun_step(speed, t, x, h);
    if (!next) {
      c.truncated = true;
      break;
    }
    x = *next;
    ts.push_back(i + 1 == n ? t_clip : t_start + (i + 1) * h);
    xs.push_back(x);
  }
  if (span < 0.0) {
    std::reverse(ts.begin(), ts.end());
    std::reverse(xs.begin(), xs.end());
  }
  c.t = std::move(ts);
  c.x = std::move(xs);
  return c;
}

CharacteristicCurve trace_on_nodes(const SpeedField& speed, double t_s, double x_s,
                                   std::span<const double> nodes, int substeps) {
  if (nodes.size() < 2) throw Error(ErrorKind::InvalidInput, "trace needs at least 2 time nodes");
  if (!speed.domain.contains(t_s, x_s))
    throw Error(ErrorKind::TraceFailure, "seed " + point_str(t_s, x_s) + " outside domain");
  const double slack = 1e-12 * (1.0 + std::abs(nodes.front()) + std::abs(nodes.back()));
  if (t_s < nodes.front() - slack || t_s > nodes.back() + slack)
    throw Error(ErrorKind::TraceFailure, "seed time outside the time grid");
  substeps = std::max(1, substeps);

  const std::size_t n = nodes.size();
  CharacteristicCurve c;
  c.t.assign(nodes.begin(), nodes.end());
  c.x.assign(n, 0.0);

  // Nodes at or after the seed time, starting index.
  std::size_t k = static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), t_s - slack) - nodes.begin());
  const bool on_node = k < n && std::abs(nodes[k] - t_s) <= slack;
  auto fail = [&](double t) {
    throw Error(ErrorKind::TraceFailure, "trace through " + point_str(t_s, x_s) + " left the domain near t=" + std::to_string(t));
  };
  auto sub_count = [&](double dt, std::size_t i) {
    const double full = nodes[std::min(i + 1, n - 1)] - nodes[std::min(i, n - 2)];
    return std::max(1, static_cast<int>(std::ceil(substeps * std::abs(dt) / std::abs(full) - 1e-9)));
  };

  // Forward sweep.
  double t = t_s, x = x_s;
  for (std::size_t i = k; i < n; ++i) {
    if (i == k && on_node) {
      c.x[i] = x_s;
      t = nodes[i];
      continue;
    }
    auto next = advance(speed, t, x, nodes[i], sub_count(nodes[i] - t, i == 0 ? 0 : i - 1));
    if (!next) fail(nodes[i]);
    x = *next;
    t = nodes[i];
    c.x[i] = x;
  }
  // Backward sweep.
  t = t_s;
  x = x_s;
  for (std::size_t i = k; i-- > 0;) {
    auto next = advance(speed, t, x, nodes[i], sub_count(t - nodes[i], i));
    if (!next) fail(nodes[i]);
    x = *next;
    t = nodes[i];
    c.x[i] = x;
  }
  return c;
}

double DependencyTriangle::basis_lo() const { return apex_x - (lambda_apex + slope_halfwidth) * depth; }
double DependencyTriangle::basis_hi() const { return apex_x - (lambda_apex - slope_halfwidth) * depth; }

AffineTrace build_affine_characteristic(const SolutionField& field, double t, double x, int k,
                                        Direction direction, double source_bound,
                                        std::optional<double> omega_delta) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "segment count k must be >= 1");
  if (!(source_bound >= 0.0) || !std::isfinite(source_bound))
    throw Error(ErrorKind::InvalidInput, "source bound G must be finite and >= 0");
  const Domain& d = field.domain();
  if (!d.contains(t, x))
    throw Error(ErrorKind::OutOfDomain, "affine start " + point_str(t, x) + " outside domain");
  const double delta = 1.0 / k;
  const double sign = direction == Direction::Backward ? -1.0 : 1.0;
  const double room = direction == Direction::Backward ? t - d.t0 : d.t1 - t;
  const int steps = static_cast<int>(std::floor(room / delta + 1e-9));
  if (steps < 1) throw Error(ErrorKind::InvalidInput, "no room for a segment of length 1/k in time");

  AffineTrace out;
  out.source_bound = source_bound;
  if (omega_delta) {
    out.omega_delta = *omega_delta;
  } else {
    const double dl[] = {delta};
    out.omega_delta = modulus_of_continuity(field, dl).at(delta);
  }
  const double M = field.curvature_bound();
  const double half = M * out.omega_delta;

  std::vector<double> ts{t}, xs{x};
  double tb = t, xb = x;
  for (int s = 0; s < steps; ++s) {
    const double ub = field.eval_u(tb, xb);
    const double lam = field.eval_lambda(tb, xb);
    const double tn = std::clamp(t + sign * (s + 1) * delta, d.t0, d.t1);
    DependencyTriangle tri{tb, xb, delta, field.speed_bound() * delta, lam, half};
    const double pred = xb + sign * lam * delta;
    double lo = xb + sign * lam * delta - half * delta;
    double hi = xb + sign * lam * delta + half * delta;
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw Error(ErrorKind::WindowEmpty, "invalid slope window at " + point_str(tb, xb));
    if (hi < d.x0 || lo > d.x1)
      throw Error(ErrorKind::Truncated, "affine characteristic left the domain at t=" + std::to_string(tn));
    lo = std::max(lo, d.x0);
    hi = std::min(hi, d.x1);

    const double bound = source_bound * delta;
    struct Best {
      double x = 0.0, err = INFINITY;
      bool admissible = false;
    } best;
    auto consider = [&](double xc) {
      if (xc < lo || xc > hi) return;
      const double e = std::abs(field.eval_u(tn, xc) - ub);
      if (!std::isfinite(e)) return;
      const bool adm = e <= bound;
      if (adm) {
        if (!best.admissible || std::abs(xc - pred) < std::abs(best.x - pred)) best = {xc, e, true};
      } else if (!best.admissible && e < best.err) {
        best = {xc, e, false};
      }
    };
    consider(std::clamp(pred, lo, hi));
    double spacing = (hi - lo) / 128.0;
    for (int i = 0; i <= 128; ++i) consider(lo + spacing * i);
    if (!std::isfinite(best.err)) throw Error(ErrorKind::WindowEmpty, "no admissible candidate at " + point_str(tb, xb));
    for (int r = 0; r < 3 && spacing > 0.0; ++r) {
      const double centre = best.x;
      spacing /= 64.0;
      for (int i = -64; i <= 64; ++i) consider(centre + spacing * i);
    }

    out.achieved_slack = std::max(out.achieved_slack, std::max(0.0, best.err - bound));
    out.max_increment_ratio = std::max(out.max_increment_ratio, best.err / delta);
    const double slope = (best.x - xb) / (sign * delta);
    out.max_slope_excess = std::max(out.max_slope_excess, std::max(0.0, std::abs(slope - lam) - half));
    out.triangles.push_back(tri);
    ts.push_back(tn);
    xs.push_back(best.x);
    tb = tn;
    xb = best.x;
  }
  if (direction == Direction::Backward) {
    std::reverse(ts.begin(), ts.end());
    std::reverse(xs.begin(), xs.end());
  }
  out.curve.t = std::move(ts);
  out.curve.x = std::move(xs);
  out.curve.provenance = Provenance::Affine;
  out.curve.segments = k;
  return out;
}

std::vector<double> values_along(const CharacteristicCurve& curve, const SolutionField& field) {
  std::vector<double> u(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) u[i] = field.eval_u(curve.t[i], curve.x[i]);
  return u;
}

double lipschitz_constant_along(const CharacteristicCurve& curve, const SolutionField& field) {
  const auto u = values_along(curve, field);
  return kernels::max_pairwise_slope(curve.t, u);
}

RegionBalance region_balance(const SolutionField& field, const SourceTerm& source,
                             const CharacteristicCurve& curve, double epsilon, double sigma,
                             double tau, double quad_step) {
  if (!(epsilon > 0.0) || !(tau > sigma) || !(quad_step > 0.0))
    throw Error(ErrorKind::InvalidInput, "region balance needs epsilon > 0, tau > sigma, step > 0");
  if (!curve.covers(sigma) || !curve.covers(tau))
    throw Error(ErrorKind::OutOfDomain, "[sigma, tau] not inside the curve's time span");
  const Domain& d = field.domain();
  auto even = [](double len, double h) {
    auto n = static_cast<std::size_t>(std::ceil(len / h - 1e-9));
    n = std::max<std::size_t>(n, 2);
    return n + (n % 2);
  };
  const std::size_t nt = even(tau - sigma, quad_step);
  const std::size_t nx = even(epsilon, quad_step);
  const double ht = (tau - sigma) / nt;
  for (std::size_t i = 0; i <= nt; ++i) {
    const double t = sigma + i * ht;
    const double g = curve.position_at(t);
    if (!d.contains(t, g) || !d.contains(t, g + epsilon))
      throw Error(ErrorKind::OutOfDomain, "shifted region leaves the domain at t=" + std::to_string(t));
  }

  auto mass = [&](double t) {
    const double a = curve.position_at(t);
    return simpson([&](double x) { return field.eval_u(t, x); }, a, a + epsilon, nx);
  };
  const auto wt = simpson_weights(nt);
  double source_int = 0.0, dissipation = 0.0;
  for (std::size_t i = 0; i <= nt; ++i) {
    const double t = sigma + i * ht;
    const double a = curve.position_at(t);
    source_int += wt[i] * simpson([&](double x) { return source(t, x); }, a, a + epsilon, nx);
    const double um = field.eval_u(t, a), up = field.eval_u(t, a + epsilon);
    const FluxModel& f = field.flux();
    dissipation += wt[i] * (f.f(up) - f.f(um) - f.df(um) * (up - um));
  }
  source_int *= ht / 3.0;
  dissipation *= ht / 3.0;

  RegionBalance rb;
  rb.lhs = mass(tau) - mass(sigma) - source_int;
  rb.rhs = -dissipation;
  rb.residual = rb.lhs - rb.rhs;
  return rb;
}

}  // namespace charflow
