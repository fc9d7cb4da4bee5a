#include "charflow/spline.hpp"

#include <algorithm>
#include <string>

#include "charflow/error.hpp"

namespace charflow {

namespace {

// Derivative at x0 of the quadratic through three points.
double three_point_slope(double x0, double x1, double x2, double y0, double y1, double y2) {
  const double h1 = x1 - x0, h2 = x2 - x0;
  // Lagrange derivative evaluated at x0.
  return y0 * (-(h1 + h2) / (h1 * h2)) + y1 * (h2 / (h1 * (h2 - h1))) +
         y2 * (-h1 / (h2 * (h2 - h1)));
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> z, std::vector<double> f)
    : z_(std::move(z)), f_(std::move(f)) {
  const std::size_t n = z_.size();
  if (n < 4 || f_.size() != n)
    throw Error(ErrorKind::InvalidInput, "spline needs at least 4 (z,f) points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(z_[i] > z_[i - 1]))
      throw Error(ErrorKind::InvalidInput, "spline knots must be strictly increasing");

  slope_lo_ = three_point_slope(z_[0], z_[1], z_[2], f_[0], f_[1], f_[2]);
  slope_hi_ = three_point_slope(z_[n - 1], z_[n - 2], z_[n - 3], f_[n - 1], f_[n - 2], f_[n - 3]);

  // Tridiagonal system for knot second derivatives (clamped ends), Thomas algorithm.
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
  const double h0 = z_[1] - z_[0];
  b[0] = 2.0 * h0;
  c[0] = h0;
  d[0] = 6.0 * ((f_[1] - f_[0]) / h0 - slope_lo_);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = z_[i] - z_[i - 1], hr = z_[i + 1] - z_[i];
    a[i] = hl;
    b[i] = 2.0 * (hl + hr);
    c[i] = hr;
    d[i] = 6.0 * ((f_[i + 1] - f_[i]) / hr - (f_[i] - f_[i - 1]) / hl);
  }
  const double hn = z_[n - 1] - z_[n - 2];
  a[n - 1] = hn;
  b[n - 1] = 2.0 * hn;
  d[n - 1] = 6.0 * (slope_hi_ - (f_[n - 1] - f_[n - 2]) / hn);

  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m_.assign(n, 0.0);
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

std::size_t CubicSpline::segment(double z) const {
  if (z < z_.front() || z > z_.back())
    throw Error(ErrorKind::OutOfInterval, "spline evaluated at z=" + std::to_string(z) +
                                              " outside [" + std::to_string(z_.front()) + ", " +
                                              std::to_string(z_.back()) + "]");
  auto it = std::upper_bound(z_.begin(), z_.end(), z);
  std::size_t i = static_cast<std::size_t>(it - z_.begin());
  if (i == 0) i = 1;
  if (i >= z_.size()) i = z_.size() - 1;
  return i - 1;
}

double CubicSpline::value(double z) const {
  const std::size_t i = segment(z);
  const double h = z_[i + 1] - z_[i];
  const double A = (z_[i + 1] - z) / h, B = (z - z_[i]) / h;
  return A * f_[i] + B * f_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::d1(double z) const {
  const std::size_t i = segment(z);
  const double h = z_[i + 1] - z_[i];
  const double A = (z_[i + 1] - z) / h, B = (z - z_[i]) / h;
  return (f_[i + 1] - f_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] +
         (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
}

double CubicSpline::d2(double z) const {
  const std::size_t i = segment(z);
  const double h = z_[i + 1] - z_[i];
  const double A = (z_[i + 1] - z) / h, B = (z - z_[i]) / h;
  return A * m_[i] + B * m_[i + 1];
}

}  // namespace charflow
