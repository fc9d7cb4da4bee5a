#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/characteristics.hpp"
#include "charflow/lagrangian.hpp"
#include "charflow/solution_field.hpp"

namespace charflow {

enum class CutMode { CapAbove, CapBelow, Clamp };
enum class CutSide { Both, Below, Above };

const char* to_string(CutMode mode);

// Clamp u into [floor(t), ceiling(t)] on the points selected by side (relative to the
// curve) and by the optional bounding curves. floor/ceiling are sampled at the curve's
// nodes; NaN entries mean "no bound". Records outside the curve's time span do nothing.
struct CutRecord {
  std::size_t curve_id = 0;
  CutSide side = CutSide::Both;
  CutMode mode = CutMode::CapAbove;
  std::optional<std::size_t> bound_lo, bound_hi;
  std::vector<double> floor, ceiling;
};

class CutField {
 public:
  explicit CutField(SolutionField base);

  double eval(double t, double x) const;  // OutOfDomain outside the rectangle
  double eval_unchecked(double t, double x) const;
  double eval_lambda(double t, double x) const;

  std::size_t add_curve(CharacteristicCurve curve);
  void push(CutRecord record);
  // Appends another cut field's curves and records (same base).
  void append(const CutField& other);

  const SolutionField& base() const { return base_; }
  const std::vector<CharacteristicCurve>& curves() const { return curves_; }
  const std::vector<CutRecord>& records() const { return records_; }
  const Domain& domain() const { return base_.domain(); }

  SpeedField speed() const;
  // Immutable snapshot as an ordinary SolutionField (for audits on the cut field).
  SolutionField as_field(const std::string& name) const;

 private:
  SolutionField base_;
  std::vector<CharacteristicCurve> curves_;
  std::vector<CutRecord> records_;
};

CutField basic_cut(const CutField& field, const CharacteristicCurve& curve, CutMode mode);

struct Strip {
  std::size_t index = 0;
  const CharacteristicCurve* lower = nullptr;
  const CharacteristicCurve* upper = nullptr;
  double y_lo = 0.0, y_hi = 0.0;
};

struct StripCertificate {
  std::size_t strip = 0;
  double y_lo = 0.0, y_hi = 0.0;
  double delta = 0.0;
  double omega_delta = 0.0;
  double achieved_sup_gap = 0.0;
  bool monotone_ok = true;
  double monotone_defect = 0.0;
  bool boundary_order_changes = false;
  std::size_t cuts = 0;
  bool degenerate = false;  // zero width at every probe time
};

struct MonotoneOptions {
  std::uint64_t seed = 0;
  int substeps = 4;
  std::size_t probe_times = 33;
  std::size_t probe_points = 64;  // per strip per time
  double stop_change = 1e-4;
  std::size_t stop_window = 8;
  double monotone_tol = 1e-6;
  std::size_t label_grid = 1025;
};

struct MonotoneResult {
  CutField field;
  std::vector<StripCertificate> certificates;
  double delta = 0.0;
  double omega_delta = 0.0;
  bool monotone_ok() const;
  double max_gap() const;
};

MonotoneResult monotone_approximation(const SolutionField& field, const LagrangianParam& param,
                                      double delta, std::size_t dense_seq_len,
                                      std::span<const double> t_grid,
                                      const MonotoneOptions& options = {});

// Modulus in the label variable of U(t,y) = u(t, chi(t,y)) on the given times.
double label_modulus(const SolutionField& field, const LagrangianParam& param, double delta,
                     std::span<const double> times, std::size_t label_grid = 1025);

// As above, with the labels of `probe_points` equally spaced points per strip added.
double label_modulus_with_probes(const SolutionField& field, const LagrangianParam& param,
                                 double delta, std::span<const double> times,
                                 std::size_t label_grid, std::size_t probe_points);

double x_section_variation(const ScalarFn& u, const Domain& domain, double t, Interval x_interval,
                           std::size_t mesh);
double x_section_variation(const CutField& field, double t, Interval x_interval, std::size_t mesh);

}  // namespace charflow
