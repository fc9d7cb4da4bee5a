#include "charflow/bv_approx.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "charflow/error.hpp"
#include "charflow/kernels.hpp"
#include "charflow/low_discrepancy.hpp"

namespace charflow {

namespace {

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

// Linear interpolation of samples given on the curve's nodes; exact at nodes.
double sample_at(const CharacteristicCurve& c, const std::vector<double>& v, double time) {
  if (c.t.size() == 1 || time <= c.t.front()) return v.front();
  if (time >= c.t.back()) return v.back();
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(c.t.begin(), c.t.end(), time) - c.t.begin()) - 1;
  if (time == c.t[i]) return v[i];
  const double w = (time - c.t[i]) / (c.t[i + 1] - c.t[i]);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

class CutEvaluator : public FieldEvaluator {
 public:
  explicit CutEvaluator(std::shared_ptr<const CutField> f) : f_(std::move(f)) {}
  double value(double t, double x) const override { return f_->eval_unchecked(t, x); }
  std::string describe() const override {
    return "cut(" + f_->base().name() + ", " + std::to_string(f_->records().size()) + " records)";
  }

 private:
  std::shared_ptr<const CutField> f_;
};

}  // namespace

const char* to_string(CutMode mode) {
  switch (mode) {
    case CutMode::CapAbove: return "cap-above";
    case CutMode::CapBelow: return "cap-below";
    case CutMode::Clamp: return "clamp";
  }
  return "?";
}

CutField::CutField(SolutionField base) : base_(std::move(base)) {}

double CutField::eval(double t, double x) const {
  if (!base_.domain().contains(t, x)) {
    std::ostringstream os;
    os << "cut field evaluated outside the domain at (" << t << ", " << x << ")";
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  return eval_unchecked(t, x);
}

double CutField::eval_unchecked(double t, double x) const {
  double v = base_.raw_u(t, x);
  for (const auto& r : records_) {
    const auto& c = curves_[r.curve_id];
    if (!c.covers(t)) continue;
    const double g = c.position_at(t);
    if (r.side == CutSide::Below && x > g) continue;
    if (r.side == CutSide::Above && x < g) continue;
    if (r.bound_lo && x < curves_[*r.bound_lo].position_at(t)) continue;
    if (r.bound_hi && x > curves_[*r.bound_hi].position_at(t)) continue;
    if (!r.floor.empty()) {
      const double lo = sample_at(c, r.floor, t);
      if (!std::isnan(lo)) v = std::max(v, lo);
    }
    if (!r.ceiling.empty()) {
      const double hi = sample_at(c, r.ceiling, t);
      if (!std::isnan(hi)) v = std::min(v, hi);
    }
  }
  return v;
}

double CutField::eval_lambda(double t, double x) const { return base_.flux().df(eval(t, x)); }

std::size_t CutField::add_curve(CharacteristicCurve curve) {
  curves_.push_back(std::move(curve));
  return curves_.size() - 1;
}

void CutField::push(CutRecord record) {
  if (record.curve_id >= curves_.size()) throw Error(ErrorKind::InvalidInput, "cut record names an unknown curve");
  records_.push_back(std::move(record));
}

void CutField::append(const CutField& other) {
  const std::size_t offset = curves_.size();
  curves_.insert(curves_.end(), other.curves_.begin(), other.curves_.end());
  for (CutRecord r : other.records_) {
    r.curve_id += offset;
    if (r.bound_lo) *r.bound_lo += offset;
    if (r.bound_hi) *r.bound_hi += offset;
    records_.push_back(std::move(r));
  }
}

SpeedField CutField::speed() const {
  return {[this](double t, double x) { return eval_lambda(t, x); }, base_.domain()};
}

SolutionField CutField::as_field(const std::string& name) const {
  auto ev = std::make_shared<CutEvaluator>(std::make_shared<const CutField>(*this));
  return SolutionField(name, base_.domain(), ev, base_.flux(), base_.interpolation_error_bound());
}

CutField basic_cut(const CutField& field, const CharacteristicCurve& curve, CutMode mode) {
  if (mode == CutMode::Clamp) throw Error(ErrorKind::InvalidInput, "basic cut mode must be cap-above or cap-below");
  CutField out = field;
  std::vector<double> level(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) level[i] = field.eval(curve.t[i], curve.x[i]);
  CutRecord r;
  r.curve_id = out.add_curve(curve);
  r.side = CutSide::Both;
  r.mode = mode;
  if (mode == CutMode::CapAbove) r.ceiling = std::move(level);
  else r.floor = std::move(level);
  out.push(std::move(r));
  return out;
}

bool MonotoneResult::monotone_ok() const {
  return std::all_of(certificates.begin(), certificates.end(), [](const auto& c) { return c.monotone_ok; });
}

double MonotoneResult::max_gap() const {
  double g = 0.0;
  for (const auto& c : certificates) g = std::max(g, c.achieved_sup_gap);
  return g;
}

namespace {

std::vector<std::size_t> probe_indices(std::size_t n, std::size_t want) {
  std::vector<std::size_t> idx;
  want = std::max<std::size_t>(2, std::min(want, n));
  for (std::size_t k = 0; k < want; ++k) idx.push_back((k * (n - 1)) / (want - 1));
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

CharacteristicCurve resample(const CharacteristicCurve& c, std::span<const double> nodes) {
  CharacteristicCurve r;
  r.t.assign(nodes.begin(), nodes.end());
  r.x.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) r.x[i] = c.position_at(nodes[i]);
  r.provenance = c.provenance;
  return r;
}

struct StripOutcome {
  CutField field;
  StripCertificate cert;
};

StripOutcome process_strip(const SolutionField& base, const CharacteristicCurve& lower,
                           const CharacteristicCurve& upper, std::span<const double> t_grid,
                           std::size_t dense_seq_len, const MonotoneOptions& opt) {
  StripOutcome out{CutField(base), {}};
  CutField& cf = out.field;
  StripCertificate& cert = out.cert;
  const std::size_t n = t_grid.size();
  const std::size_t lo_id = cf.add_curve(lower), hi_id = cf.add_curve(upper);

  std::vector<double> m(n), M(n);
  std::vector<char> lower_is_max(n);
  int signs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double bl = base.raw_u(t_grid[i], lower.x[i]), bh = base.raw_u(t_grid[i], upper.x[i]);
    m[i] = std::min(bl, bh);
    M[i] = std::max(bl, bh);
    lower_is_max[i] = bl >= bh;
    if (bl > bh) signs |= 1;
    if (bl < bh) signs |= 2;
  }
  cert.boundary_order_changes = signs == 3;

  double max_width = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_width = std::max(max_width, upper.x[i] - lower.x[i]);
  if (max_width < 1e-12) {
    cert.degenerate = true;
    return out;
  }

  // Probe grid: selected time nodes x fractions of the strip width (endpoints included).
  const auto pt = probe_indices(n, opt.probe_times);
  const std::size_t K = std::max<std::size_t>(2, opt.probe_points);
  struct Probe {
    std::size_t node;
    double t, x, base, cur;
  };
  std::vector<Probe> probes;
  for (std::size_t i : pt)
    for (std::size_t k = 0; k < K; ++k) {
      const double s = static_cast<double>(k) / (K - 1);
      const double x = lower.x[i] + s * (upper.x[i] - lower.x[i]);
      const double u = base.raw_u(t_grid[i], x);
      probes.push_back({i, t_grid[i], x, u, u});
    }
  auto refresh = [&]() {
    double change = 0.0;
    for (auto& p : probes) {
      const double v = cf.eval_unchecked(p.t, p.x);
      change = std::max(change, std::abs(v - p.cur));
      p.cur = v;
    }
    return change;
  };

  // First cut at the lower boundary: clamp the strip into [m, M].
  CutRecord first;
  first.curve_id = lo_id;
  first.side = CutSide::Above;
  first.mode = CutMode::Clamp;
  first.bound_hi = hi_id;
  first.floor = m;
  first.ceiling = M;
  cf.push(std::move(first));
  refresh();

  std::vector<std::size_t> chosen{lo_id, hi_id};
  std::size_t quiet = 0;
  const SpeedField speed = cf.speed();
  for (std::size_t j = 1; j <= dense_seq_len; ++j) {
    const auto h = halton2(opt.seed * dense_seq_len + j);
    const double tau = t_grid.front() + h[0] * (t_grid.back() - t_grid.front());
    const double xl = lower.position_at(tau), xh = upper.position_at(tau);
    if (xh - xl < 1e-12) continue;
    const double xs = xl + h[1] * (xh - xl);

    CharacteristicCurve gamma = trace_on_nodes(speed, tau, xs, t_grid, opt.substeps);
    std::size_t pos = 0;
    while (pos < chosen.size() && cf.curves()[chosen[pos]].position_at(tau) <= xs) ++pos;
    pos = std::clamp<std::size_t>(pos, 1, chosen.size() - 1);
    const auto& below = cf.curves()[chosen[pos - 1]];
    const auto& above = cf.curves()[chosen[pos]];
    for (std::size_t i = 0; i < n; ++i) gamma.x[i] = std::clamp(gamma.x[i], below.x[i], std::max(below.x[i], above.x[i]));

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cf.eval_unchecked(t_grid[i], gamma.x[i]);
    const std::size_t id = cf.add_curve(std::move(gamma));
    chosen.insert(chosen.begin() + static_cast<std::ptrdiff_t>(pos), id);

    CutRecord left, right;
    left.curve_id = right.curve_id = id;
    left.mode = right.mode = CutMode::Clamp;
    left.side = CutSide::Below;
    left.bound_lo = lo_id;
    right.side = CutSide::Above;
    right.bound_hi = hi_id;
    left.floor.resize(n);
    left.ceiling.resize(n);
    right.floor.resize(n);
    right.ceiling.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Side toward the max boundary lies in [v, M], side toward the min boundary in [m, v].
      if (lower_is_max[i]) {
        left.floor[i] = v[i], left.ceiling[i] = M[i];
        right.floor[i] = m[i], right.ceiling[i] = v[i];
      } else {
        left.floor[i] = m[i], left.ceiling[i] = v[i];
        right.floor[i] = v[i], right.ceiling[i] = M[i];
      }
    }
    cf.push(std::move(left));
    cf.push(std::move(right));
    ++cert.cuts;

    quiet = refresh() < opt.stop_change ? quiet + 1 : 0;
    if (quiet >= opt.stop_window) break;
  }

  // Certificate on the probe grid.
  for (const auto& p : probes) cert.achieved_sup_gap = std::max(cert.achieved_sup_gap, std::abs(p.cur - p.base));
  for (std::size_t a = 0; a < pt.size(); ++a) {
    const std::size_t i = pt[a];
    const double bl = base.raw_u(t_grid[i], lower.x[i]), bh = base.raw_u(t_grid[i], upper.x[i]);
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const double d = probes[a * K + k + 1].cur - probes[a * K + k].cur;
      const double defect = bl > bh ? d : bl < bh ? -d : std::abs(d);
      cert.monotone_defect = std::max(cert.monotone_defect, defect);
    }
  }
  cert.monotone_ok = cert.monotone_defect <= opt.monotone_tol;
  return out;
}

}  // namespace

double label_modulus(const SolutionField& field, const LagrangianParam& param, double delta,
                     std::span<const double> times, std::size_t label_grid) {
  return label_modulus_with_probes(field, param, delta, times, label_grid, 0);
}

double label_modulus_with_probes(const SolutionField& field, const LagrangianParam& param,
                                 double delta, std::span<const double> times,
                                 std::size_t label_grid, std::size_t probe_points) {
  std::vector<double> labels;
  for (std::size_t k = 0; k < label_grid; ++k) labels.push_back(static_cast<double>(k) / (label_grid - 1));
  labels.insert(labels.end(), param.y.begin(), param.y.end());
  for (std::size_t j = 0; j + 1 < param.size() && probe_points > 1; ++j)
    for (std::size_t k = 0; k < probe_points; ++k)
      labels.push_back(param.y[j] + (param.y[j + 1] - param.y[j]) * k / (probe_points - 1));
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  // Only labels inside the parameterized range.
  std::erase_if(labels, [&](double y) { return y < param.y.front() || y > param.y.back(); });

  std::vector<double> best(times.size(), 0.0);
  kernels::parallel_for(times.size(), [&](std::size_t a) {
    const double t = times[a];
    std::vector<double> X(param.size());
    for (std::size_t j = 0; j < param.size(); ++j) X[j] = param.columns[j].position_at(t);
    std::vector<double> U(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const double y = labels[k];
      std::size_t j = static_cast<std::size_t>(std::upper_bound(param.y.begin(), param.y.end(), y) - param.y.begin());
      j = std::clamp<std::size_t>(j, 1, param.size() - 1) - 1;
      const double w = std::clamp((y - param.y[j]) / (param.y[j + 1] - param.y[j]), 0.0, 1.0);
      U[k] = field.raw_u(t, (1.0 - w) * X[j] + w * X[j + 1]);
    }
    std::deque<std::size_t> qmax, qmin;
    std::size_t l = 0;
    double om = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      while (!qmax.empty() && U[qmax.back()] <= U[r]) qmax.pop_back();
      qmax.push_back(r);
      while (!qmin.empty() && U[qmin.back()] >= U[r]) qmin.pop_back();
      qmin.push_back(r);
      while (labels[r] - labels[l] > delta + 1e-12) ++l;
      while (qmax.front() < l) qmax.pop_front();
      while (qmin.front() < l) qmin.pop_front();
      om = std::max(om, U[qmax.front()] - U[qmin.front()]);
    }
    best[a] = om;
  });
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

MonotoneResult monotone_approximation(const SolutionField& field, const LagrangianParam& param,
                                      double delta, std::size_t dense_seq_len,
                                      std::span<const double> t_grid, const MonotoneOptions& options) {
  if (dense_seq_len < 16) throw Error(ErrorKind::InvalidInput, "dense_seq_len must be >= 16");
  if (param.size() < 2) throw Error(ErrorKind::InvalidInput, "monotone approximation needs >= 2 columns");
  if (t_grid.size() < 2) throw Error(ErrorKind::InvalidInput, "t_grid needs at least 2 nodes");
  for (std::size_t j = 0; j + 1 < param.size(); ++j)
    if (param.y[j + 1] - param.y[j] > delta + 1e-12)
      throw Error(ErrorKind::InvalidInput, "parameterization columns are spaced more than delta in label");
  for (const auto& c : param.columns)
    if (!c.covers(t_grid.front()) || !c.covers(t_grid.back()))
      throw Error(ErrorKind::InvalidInput, "t_grid leaves the parameterization's time span");

  std::vector<CharacteristicCurve> cols;
  for (const auto& c : param.columns) cols.push_back(resample(c, t_grid));

  const std::size_t strips = cols.size() - 1;
  std::vector<std::optional<StripOutcome>> outcomes(strips);
  kernels::parallel_for(strips, [&](std::size_t s) {
    outcomes[s] = process_strip(field, cols[s], cols[s + 1], t_grid, dense_seq_len, options);
  });

  const auto pt = probe_indices(t_grid.size(), options.probe_times);
  std::vector<double> ptimes;
  for (std::size_t i : pt) ptimes.push_back(t_grid[i]);
  const double omega = label_modulus_with_probes(field, param, delta, ptimes, options.label_grid,
                                                 options.probe_points);

  MonotoneResult res{CutField(field), {}, delta, omega};
  for (std::size_t s = 0; s < strips; ++s) {
    auto& o = *outcomes[s];
    o.cert.strip = s;
    o.cert.y_lo = param.y[s];
    o.cert.y_hi = param.y[s + 1];
    o.cert.delta = delta;
    o.cert.omega_delta = omega;
    res.certificates.push_back(o.cert);
    res.field.append(o.field);
  }
  return res;
}

double x_section_variation(const ScalarFn& u, const Domain& domain, double t, Interval iv,
                           std::size_t mesh) {
  if (!domain.contains(t, iv.lo) || !domain.contains(t, iv.hi))
    throw Error(ErrorKind::OutOfDomain, "x-section outside the domain");
  if (mesh < 1) throw Error(ErrorKind::InvalidInput, "mesh must be >= 1");
  double tv = 0.0, prev = u(t, iv.lo);
  for (std::size_t k = 1; k <= mesh; ++k) {
    const double v = u(t, iv.lo + iv.length() * k / mesh);
    tv += std::abs(v - prev);
    prev = v;
  }
  return tv;
}

double x_section_variation(const CutField& field, double t, Interval iv, std::size_t mesh) {
  return x_section_variation([&field](double tt, double xx) { return field.eval(tt, xx); }, field.domain(), t, iv, mesh);
}

}  // namespace charflow
