#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/characteristics.hpp"
#include "charflow/solution_field.hpp"

namespace charflow {

struct SeedPoint {
  double t = 0.0;
  double x = 0.0;
};

struct ParamOptions {
  int substeps = 8;          // Heun steps per t-grid interval
  std::size_t theta_terms = 32;  // rational times used by theta_encode
};

// Columns share the t-grid; labels y are theta values rescaled to [0,1], ascending.
struct LagrangianParam {
  std::vector<double> t_grid;
  std::vector<double> y;
  std::vector<CharacteristicCurve> columns;
  std::vector<SeedPoint> seeds;  // seed of each column, same order as columns

  std::size_t size() const { return columns.size(); }
  // Monotonicity defect: max over shared nodes of chi(t, y_j) - chi(t, y_{j+1}), clamped at 0.
  double monotonicity_defect() const;
  // Max over a 32x32 domain probe of the distance to the nearest column at that time.
  double coverage_radius(const Domain& domain) const;
};

// The first K terms of the van der Corput enumeration of [t0, t1].
std::vector<double> rational_times(double t0, double t1, std::size_t count);

double theta_encode(const CharacteristicCurve& curve, std::span<const double> times);

// Coarse-to-fine bisection order of the indices 0..n-1 (midpoint first).
std::vector<std::size_t> bisection_order(std::size_t n);

// Ordered merge: clamps `raw` between the nearest lower and upper members of the
// ordered family at the seed point, inserts it, and returns its position.
std::size_t insert_ordered(std::vector<CharacteristicCurve>& ordered, CharacteristicCurve raw,
                           const SeedPoint& seed);

LagrangianParam build_parameterization(const SolutionField& field, std::span<const SeedPoint> seeds,
                                       std::span<const double> t_grid,
                                       const ParamOptions& options = {});

enum class SourceMethod { ColumnSlope, DiffQuot };

struct SourceSample {
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
  SourceMethod method = SourceMethod::ColumnSlope;
  int terms = 0;       // difference quotients formed (diffquot)
  int curve_id = -1;   // column index (column-slope) or -1
  bool converged = true;
  bool n_rule = false;  // value forced to 0 because u lies in the inflection cover
};

// Per column: centered differences of U(t) = u(t, chi(t)), one-sided at the ends.
std::vector<std::vector<SourceSample>> extract_lagrangian_source(const LagrangianParam& param,
                                                                 const SolutionField& field);

struct UniversalOptions {
  int budget = 24;
  double rel_tol = 1e-3;
  double inflection_step = 0.0;  // 0: working interval length / 4096
};

std::vector<SourceSample> universal_source_sample(const SolutionField& field,
                                                  std::span<const SeedPoint> points,
                                                  double source_bound,
                                                  const UniversalOptions& options = {});

struct SingleValuedViolation {
  std::size_t lower = 0, upper = 0;  // column pair
  double time_a = 0.0, time_b = 0.0;
  double values_a[2] = {0.0, 0.0};  // (lower, upper) quotients at time_a
  double values_b[2] = {0.0, 0.0};
  double gap = 0.0;  // |time_b - time_a|
};

struct Discrepancy {
  std::size_t lower = 0, upper = 0;
  double time = 0.0;
  double value_lower = 0.0, value_upper = 0.0;
};

struct SingleValuedReport {
  std::vector<Discrepancy> discrepancies;
  std::vector<SingleValuedViolation> violations;
  double epsilon = 0.0, sigma = 0.0;
  bool ok() const { return violations.empty(); }
};

SingleValuedReport check_source_single_valued(const LagrangianParam& param,
                                              const SolutionField& field, double epsilon,
                                              double sigma, double touch_tol = 1e-9);

struct JacobianCell {
  std::size_t time_index = 0;  // cell [t_i, t_{i+1}]
  std::size_t column = 0;      // cell [y_j, y_{j+1}]
  double ratio = 0.0;          // swept x-area / duration
  double jacobian = 0.0;       // ratio / label spacing
  bool degenerate = false;
};

std::vector<JacobianCell> jacobian_positivity(const LagrangianParam& param, double tol = 1e-12);

}  // namespace charflow
