#pragma once

#include <vector>

namespace charflow {

// Clamped cubic spline through (z_i, f_i); end slopes from one-sided
// three-point differences of the data.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> z, std::vector<double> f);

  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;

  double lo() const { return z_.front(); }
  double hi() const { return z_.back(); }
  double end_slope_lo() const { return slope_lo_; }
  double end_slope_hi() const { return slope_hi_; }

 private:
  std::size_t segment(double z) const;

  std::vector<double> z_, f_, m_;  // m_: second derivatives at knots
  double slope_lo_ = 0.0, slope_hi_ = 0.0;
};

}  // namespace charflow
