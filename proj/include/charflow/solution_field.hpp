#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/flux_model.hpp"

namespace charflow {

struct Domain {
  double t0 = 0.0, t1 = 1.0;
  double x0 = 0.0, x1 = 1.0;

  double duration() const { return t1 - t0; }
  double width() const { return x1 - x0; }
  // Relative slack absorbs round-off at the rectangle's edges.
  bool contains(double t, double x) const;
  bool contains_time(double t) const;
};

class FieldEvaluator {
 public:
  virtual ~FieldEvaluator() = default;
  virtual double value(double t, double x) const = 0;
  virtual std::string describe() const = 0;
};

using ScalarFn = std::function<double(double, double)>;

class SolutionField {
 public:
  // Computes L and M from a 64x64 probe (inflated by 5%) and checks the field's
  // range against the flux working interval.
  SolutionField(std::string name, Domain domain, std::shared_ptr<const FieldEvaluator> evaluator,
                FluxModel flux, std::optional<double> interpolation_error = std::nullopt);

  double eval_u(double t, double x) const;
  double eval_lambda(double t, double x) const;

  const std::string& name() const { return name_; }
  const Domain& domain() const { return domain_; }
  const FluxModel& flux() const { return flux_; }
  double speed_bound() const { return speed_bound_; }
  double curvature_bound() const { return curvature_bound_; }
  double range_min() const { return range_min_; }
  double range_max() const { return range_max_; }
  std::optional<double> interpolation_error_bound() const { return interpolation_error_; }
  std::shared_ptr<const FieldEvaluator> evaluator() const { return evaluator_; }

  // Unchecked evaluation for points already known to lie in the domain.
  double raw_u(double t, double x) const { return evaluator_->value(t, x); }

 private:
  std::string name_;
  Domain domain_;
  std::shared_ptr<const FieldEvaluator> evaluator_;
  FluxModel flux_;
  std::optional<double> interpolation_error_;
  double speed_bound_ = 0.0;
  double curvature_bound_ = 0.0;
  double range_min_ = 0.0;
  double range_max_ = 0.0;
};

// Closed-form evaluator around a callable.
class FunctionEvaluator : public FieldEvaluator {
 public:
  FunctionEvaluator(ScalarFn fn, std::string description)
      : fn_(std::move(fn)), description_(std::move(description)) {}
  double value(double t, double x) const override { return fn_(t, x); }
  std::string describe() const override { return description_; }

 private:
  ScalarFn fn_;
  std::string description_;
};

// Bilinear interpolation of values on a rectangular lattice; vals[i * nx + j] at (t_i, x_j).
class GridEvaluator : public FieldEvaluator {
 public:
  GridEvaluator(std::vector<double> t_nodes, std::vector<double> x_nodes, std::vector<double> values);

  static std::shared_ptr<GridEvaluator> from_csv(const std::string& path,
                                                 const std::string& value_column = "u");

  double value(double t, double x) const override;
  std::string describe() const override;

  const std::vector<double>& t_nodes() const { return t_; }
  const std::vector<double>& x_nodes() const { return x_; }
  const std::vector<double>& values() const { return v_; }
  Domain domain() const { return {t_.front(), t_.back(), x_.front(), x_.back()}; }

  // max over interior nodes of (|second difference in t| + |second difference in x|) / 8.
  double interpolation_error_bound() const;

 private:
  std::vector<double> t_, x_, v_;
};

struct ModulusEstimate {
  std::vector<double> deltas;
  std::vector<double> omegas;
  double speed_weight = 0.0;  // L used in max{|dt|, |dx|/L}
  std::size_t pairs_per_delta = 0;

  // Smallest tabulated delta >= d gives an upper estimate; beyond the table uses the last entry.
  double at(double d) const;
};

ModulusEstimate modulus_of_continuity(const SolutionField& field, std::span<const double> deltas,
                                      std::uint64_t seed = 0, std::size_t pairs = 4096);

}  // namespace charflow
