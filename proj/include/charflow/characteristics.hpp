#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/solution_field.hpp"
#include "charflow/source.hpp"

namespace charflow {

enum class Provenance { Ode, Affine };

// Nodes are stored with ascending time regardless of integration direction.
struct CharacteristicCurve {
  std::vector<double> t;
  std::vector<double> x;
  Provenance provenance = Provenance::Ode;
  int segments = 0;  // k for affine curves
  bool truncated = false;

  std::size_t size() const { return t.size(); }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  bool covers(double time) const;
  // Linear interpolation; exact at nodes.
  double position_at(double time) const;
  std::string provenance_label() const;
};

// Speed function lambda(t,x) on a rectangle; SolutionField provides one, cut fields another.
struct SpeedField {
  std::function<double(double, double)> lambda;
  Domain domain;

  static SpeedField of(const SolutionField& field);
};

CharacteristicCurve integrate_characteristic(const SolutionField& field, double t_start,
                                             double x_start, double t_end, double step);

CharacteristicCurve integrate_characteristic(const SpeedField& speed, double t_start, double x_start,
                                             double t_end, double step);

// Heun trace through (t_s, x_s) reported on the given ascending nodes (t_s may fall
// between nodes); each node interval is split into `substeps` Heun steps. Throws
// TraceFailure if the path leaves the domain before covering all nodes.
CharacteristicCurve trace_on_nodes(const SpeedField& speed, double t_s, double x_s,
                                   std::span<const double> nodes, int substeps);

enum class Direction { Backward, Forward };

struct DependencyTriangle {
  double apex_t = 0.0, apex_x = 0.0;
  double depth = 0.0;        // delta
  double wide_half_width = 0.0;  // L * delta
  double lambda_apex = 0.0;
  double slope_halfwidth = 0.0;  // M * omega(delta)

  double basis_lo() const;  // ends of the narrow basis at depth delta (backward orientation)
  double basis_hi() const;
};

struct AffineTrace {
  CharacteristicCurve curve;
  std::vector<DependencyTriangle> triangles;
  double omega_delta = 0.0;
  double source_bound = 0.0;
  double achieved_slack = 0.0;        // max over steps of |du| - G * dt (clamped at 0)
  double max_increment_ratio = 0.0;   // max over steps of |du| / dt
  double max_slope_excess = 0.0;      // max distance of segment slope outside the slope window
};

// Piecewise-affine characteristic through `point` with t-spacing 1/k. omega_delta
// defaults to the field's modulus of continuity at delta = 1/k.
AffineTrace build_affine_characteristic(const SolutionField& field, double t, double x, int k,
                                        Direction direction, double source_bound,
                                        std::optional<double> omega_delta = std::nullopt);

double lipschitz_constant_along(const CharacteristicCurve& curve, const SolutionField& field);

// u evaluated along the curve nodes.
std::vector<double> values_along(const CharacteristicCurve& curve, const SolutionField& field);

struct RegionBalance {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
};

RegionBalance region_balance(const SolutionField& field, const SourceTerm& source,
                             const CharacteristicCurve& curve, double epsilon, double sigma,
                             double tau, double quad_step = 1e-3);

}  // namespace charflow
