#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace charflow {

// Composite Simpson weights (without the h/3 factor) for n intervals, n even.
std::vector<double> simpson_weights(std::size_t n);

// Composite Simpson rule on [a,b] with n (rounded up to even) intervals.
double simpson(const std::function<double(double)>& fn, double a, double b, std::size_t n);

// Uniform tensor lattice of Simpson nodes: t_start + i*dt, i in [0, nt], same for x.
struct Lattice2D {
  double t_start = 0.0;
  double dt = 0.0;
  std::size_t nt = 0;
  double x_start = 0.0;
  double dx = 0.0;
  std::size_t nx = 0;

  double t(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
  double x(std::size_t j) const { return x_start + static_cast<double>(j) * dx; }
};

}  // namespace charflow
