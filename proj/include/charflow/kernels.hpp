#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "charflow/quadrature.hpp"

namespace charflow::kernels {

using Integrand = std::function<double(double, double)>;
using PointPair = std::pair<std::array<double, 2>, std::array<double, 2>>;

// Each kernel exists as a serial reference and an OpenMP version. Both use the
// same per-row accumulation order, so results agree bitwise.
namespace serial {
double tensor_simpson(const Lattice2D& lattice, const Integrand& fn);
double grid_max(const Lattice2D& lattice, const Integrand& fn);
double max_pair_gap(std::span<const PointPair> pairs, const Integrand& fn);
double max_pairwise_slope(std::span<const double> t, std::span<const double> values);
}  // namespace serial

namespace omp {
double tensor_simpson(const Lattice2D& lattice, const Integrand& fn);
double grid_max(const Lattice2D& lattice, const Integrand& fn);
double max_pair_gap(std::span<const PointPair> pairs, const Integrand& fn);
double max_pairwise_slope(std::span<const double> t, std::span<const double> values);
}  // namespace omp

// Default dispatch used by the library.
inline double tensor_simpson(const Lattice2D& lattice, const Integrand& fn) {
  return omp::tensor_simpson(lattice, fn);
}
inline double grid_max(const Lattice2D& lattice, const Integrand& fn) {
  return omp::grid_max(lattice, fn);
}
inline double max_pair_gap(std::span<const PointPair> pairs, const Integrand& fn) {
  return omp::max_pair_gap(pairs, fn);
}
inline double max_pairwise_slope(std::span<const double> t, std::span<const double> values) {
  return omp::max_pairwise_slope(t, values);
}

// Runs body(i) for i in [0, n) on the OpenMP team; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Caps the OpenMP worker count from CHARFLOW_THREADS when set; returns the cap in use.
int configure_threads_from_env();

}  // namespace charflow::kernels
