#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "charflow/spline.hpp"

namespace charflow {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double z, double slack = 0.0) const { return z >= lo - slack && z <= hi + slack; }
};

enum class FluxKind { Builtin, Polynomial, Table };

class FluxModel {
 public:
  static FluxModel builtin(std::string_view name, Interval working);
  static FluxModel polynomial(std::vector<double> coeffs, Interval working);
  // Working interval defaults to the table's z-range.
  static FluxModel table(std::vector<double> z, std::vector<double> f);
  static FluxModel table_csv(const std::string& path);

  double f(double z) const;
  double df(double z) const;
  double d2f(double z) const;

  FluxKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const Interval& working_interval() const { return working_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  // Same flux, different working interval (table fluxes may only shrink).
  FluxModel with_interval(Interval working) const;

  // Throws OutOfInterval when z lies outside the working interval (relative slack 1e-12).
  void require_in_interval(double z, const char* what) const;

  nlohmann::json describe() const;

 private:
  FluxModel() = default;

  FluxKind kind_ = FluxKind::Polynomial;
  std::string name_;
  Interval working_;
  std::vector<double> coeffs_;  // polynomial and builtin forms
  std::shared_ptr<const CubicSpline> spline_;
};

enum class ConvexityLabel { DPlus, DMinus, N };

const char* to_string(ConvexityLabel label);

struct ConvexityClassification {
  ConvexityLabel label = ConvexityLabel::N;
  double probe_radius = 0.0;
};

ConvexityClassification classify_point(const FluxModel& flux, double z, double probe_radius,
                                       int samples = 16);

std::vector<Interval> inflection_set(const FluxModel& flux, double grid_step);

double hypothesis_h_estimate(const FluxModel& flux, double grid_step);

// True when z lies in one of the (closed) cover intervals.
bool in_cover(const std::vector<Interval>& cover, double z);

}  // namespace charflow
