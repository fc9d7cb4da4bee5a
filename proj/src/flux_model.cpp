#include "charflow/flux_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "charflow/csv.hpp"
#include "charflow/error.hpp"

namespace charflow {

namespace {

double horner(const std::vector<double>& c, double z) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
  return v;
}

void check_interval(const Interval& w) {
  if (!(w.hi > w.lo) || !std::isfinite(w.lo) || !std::isfinite(w.hi))
    throw Error(ErrorKind::InvalidInput, "working interval must satisfy lo < hi");
}

}  // namespace

const char* to_string(ConvexityLabel label) {
  switch (label) {
    case ConvexityLabel::DPlus: return "DPlus";
    case ConvexityLabel::DMinus: return "DMinus";
    case ConvexityLabel::N: return "N";
  }
  return "N";
}

FluxModel FluxModel::builtin(std::string_view name, Interval working) {
  check_interval(working);
  FluxModel m;
  m.kind_ = FluxKind::Builtin;
  m.name_ = std::string(name);
  m.working_ = working;
  if (name == "burgers") {
    m.coeffs_ = {0.0, 0.0, 0.5};
  } else if (name == "cubic") {
    m.coeffs_ = {0.0, 0.0, 0.0, 1.0 / 3.0};
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown builtin flux '" + std::string(name) + "'");
  }
  return m;
}

FluxModel FluxModel::polynomial(std::vector<double> coeffs, Interval working) {
  check_interval(working);
  if (coeffs.empty()) coeffs = {0.0};
  for (double c : coeffs)
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidInput, "non-finite flux coefficient");
  FluxModel m;
  m.kind_ = FluxKind::Polynomial;
  m.name_ = "polynomial";
  m.working_ = working;
  m.coeffs_ = std::move(coeffs);
  return m;
}

FluxModel FluxModel::table(std::vector<double> z, std::vector<double> f) {
  FluxModel m;
  m.kind_ = FluxKind::Table;
  m.name_ = "table";
  m.spline_ = std::make_shared<const CubicSpline>(std::move(z), std::move(f));
  m.working_ = {m.spline_->lo(), m.spline_->hi()};
  return m;
}

FluxModel FluxModel::table_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const std::size_t iz = csv.column("z"), jf = csv.column("f");
  std::vector<double> z, f;
  for (const auto& row : csv.rows) {
    z.push_back(row[iz]);
    f.push_back(row[jf]);
  }
  FluxModel m = table(std::move(z), std::move(f));
  m.name_ = "table:" + path;
  return m;
}

FluxModel FluxModel::with_interval(Interval working) const {
  check_interval(working);
  if (kind_ == FluxKind::Table && (working.lo < spline_->lo() || working.hi > spline_->hi()))
    throw Error(ErrorKind::OutOfInterval, "tabulated flux cannot extend beyond its data");
  FluxModel m = *this;
  m.working_ = working;
  return m;
}

double FluxModel::f(double z) const {
  if (spline_) return spline_->value(z);
  return horner(coeffs_, z);
}

double FluxModel::df(double z) const {
  if (spline_) return spline_->d1(z);
  double v = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 1;) v = v * z + coeffs_[i] * static_cast<double>(i);
  return v;
}

double FluxModel::d2f(double z) const {
  if (spline_) return spline_->d2(z);
  double v = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 2;)
    v = v * z + coeffs_[i] * static_cast<double>(i) * static_cast<double>(i - 1);
  return v;
}

void FluxModel::require_in_interval(double z, const char* what) const {
  const double slack = 1e-12 * (1.0 + std::max(std::abs(working_.lo), std::abs(working_.hi)));
  if (!working_.contains(z, slack))
    throw Error(ErrorKind::OutOfInterval, std::string(what) + " value " + std::to_string(z) +
                                              " outside working interval [" +
                                              std::to_string(working_.lo) + ", " +
                                              std::to_string(working_.hi) + "]");
}

nlohmann::json FluxModel::describe() const {
  nlohmann::json j;
  j["kind"] = kind_ == FluxKind::Builtin ? "builtin" : kind_ == FluxKind::Polynomial ? "polynomial" : "table";
  j["name"] = name_;
  j["working_interval"] = {working_.lo, working_.hi};
  if (!spline_) j["coeffs"] = coeffs_;
  return j;
}

ConvexityClassification classify_point(const FluxModel& flux, double z, double probe_radius,
                                       int samples) {
  if (samples < 8) throw Error(ErrorKind::InvalidInput, "classify_point needs samples >= 8");
  if (!(probe_radius > 0.0)) throw Error(ErrorKind::InvalidInput, "probe radius must be positive");
  flux.require_in_interval(z - probe_radius, "probe");
  flux.require_in_interval(z + probe_radius, "probe");

  const double fz = flux.f(z), dfz = flux.df(z);
  const double tol = 1e-12 * (1.0 + std::abs(fz));
  constexpr int kLevels = 5;  // probe radius and 4 halvings
  double radius = probe_radius;
  for (int level = 0; level < kLevels; ++level, radius *= 0.5) {
    bool plus = true, minus = true;
    for (int k = 1; k <= samples && (plus || minus); ++k) {
      const double h = radius * static_cast<double>(k) / samples;
      for (double hh : {h, -h}) {
        const double e = flux.f(z + hh) - fz - dfz * hh;
        if (e < -tol) plus = false;
        if (e > tol) minus = false;
      }
    }
    if (plus) return {ConvexityLabel::DPlus, radius};
    if (minus) return {ConvexityLabel::DMinus, radius};
  }
  return {ConvexityLabel::N, probe_radius};
}

std::vector<Interval> inflection_set(const FluxModel& flux, double grid_step) {
  const Interval w = flux.working_interval();
  if (!(grid_step > 0.0) || grid_step > w.length() / 16.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidInput, "grid_step must lie in (0, |working interval|/16]");
  const auto cells = static_cast<std::size_t>(std::ceil(w.length() / grid_step - 1e-9));
  std::vector<Interval> cover;
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = w.lo + static_cast<double>(i) * grid_step;
    const double b = std::min(w.hi, a + grid_step);
    const double s = b - a;
    bool flagged = false;
    for (double frac : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
      const double z = a + frac * s;
      const double radius = std::min({16.0 * grid_step, z - w.lo, w.hi - z});
      if (classify_point(flux, z, radius, 16).label == ConvexityLabel::N) {
        flagged = true;
        break;
      }
    }
    if (!flagged) continue;
    if (!cover.empty() && std::abs(cover.back().hi - a) <= 1e-12 * (1.0 + std::abs(a)))
      cover.back().hi = b;
    else
      cover.push_back({a, b});
  }
  return cover;
}

double hypothesis_h_estimate(const FluxModel& flux, double grid_step) {
  double total = 0.0;
  for (const auto& iv : inflection_set(flux, grid_step)) total += iv.length();
  return total;
}

bool in_cover(const std::vector<Interval>& cover, double z) {
  for (const auto& iv : cover)
    if (iv.contains(z)) return true;
  return false;
}

}  // namespace charflow
