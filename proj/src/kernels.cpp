#include "charflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace charflow::kernels {

namespace {

// Row i of the Simpson tensor sum, without the dt*dx/9 factor.
double simpson_row(const Lattice2D& lat, const std::vector<double>& wx, const Integrand& fn,
                   std::size_t i) {
  const double t = lat.t(i);
  double row = 0.0;
  for (std::size_t j = 0; j <= lat.nx; ++j) row += wx[j] * fn(t, lat.x(j));
  return row;
}

double row_max(const Lattice2D& lat, const Integrand& fn, std::size_t i) {
  const double t = lat.t(i);
  double m = -INFINITY;
  for (std::size_t j = 0; j <= lat.nx; ++j) m = std::max(m, fn(t, lat.x(j)));
  return m;
}

double slope_row(std::span<const double> t, std::span<const double> v, std::size_t i) {
  double best = 0.0;
  for (std::size_t j = i + 1; j < t.size(); ++j) {
    const double dt = t[j] - t[i];
    if (dt > 0.0) best = std::max(best, std::abs(v[j] - v[i]) / dt);
  }
  return best;
}

double total(const Lattice2D& lat, const std::vector<double>& rows) {
  const auto wt = simpson_weights(lat.nt);
  double sum = 0.0;
  for (std::size_t i = 0; i <= lat.nt; ++i) sum += wt[i] * rows[i];
  return sum * lat.dt * lat.dx / 9.0;
}

// Exceptions must not escape an OpenMP region; the first one is rethrown afterwards.
struct ExceptionSlot {
  std::exception_ptr ptr;
  void capture() {
#pragma omp critical(charflow_exception_slot)
    if (!ptr) ptr = std::current_exception();
  }
  void rethrow() const {
    if (ptr) std::rethrow_exception(ptr);
  }
};

}  // namespace

namespace serial {

double tensor_simpson(const Lattice2D& lat, const Integrand& fn) {
  const auto wx = simpson_weights(lat.nx);
  std::vector<double> rows(lat.nt + 1);
  for (std::size_t i = 0; i <= lat.nt; ++i) rows[i] = simpson_row(lat, wx, fn, i);
  return total(lat, rows);
}

double grid_max(const Lattice2D& lat, const Integrand& fn) {
  double m = -INFINITY;
  for (std::size_t i = 0; i <= lat.nt; ++i) m = std::max(m, row_max(lat, fn, i));
  return m;
}

double max_pair_gap(std::span<const PointPair> pairs, const Integrand& fn) {
  double m = 0.0;
  for (const auto& [p, q] : pairs) m = std::max(m, std::abs(fn(p[0], p[1]) - fn(q[0], q[1])));
  return m;
}

double max_pairwise_slope(std::span<const double> t, std::span<const double> values) {
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, slope_row(t, values, i));
  return m;
}

}  // namespace serial

namespace omp {

double tensor_simpson(const Lattice2D& lat, const Integrand& fn) {
  const auto wx = simpson_weights(lat.nx);
  std::vector<double> rows(lat.nt + 1);
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(lat.nt + 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = simpson_row(lat, wx, fn, static_cast<std::size_t>(i));
    } catch (...) {
      slot.capture();
    }
  }
  slot.rethrow();
  return total(lat, rows);
}

double grid_max(const Lattice2D& lat, const Integrand& fn) {
  std::vector<double> rows(lat.nt + 1);
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(lat.nt + 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = row_max(lat, fn, static_cast<std::size_t>(i));
    } catch (...) {
      slot.capture();
    }
  }
  slot.rethrow();
  double m = -INFINITY;
  for (double r : rows) m = std::max(m, r);
  return m;
}

double max_pair_gap(std::span<const PointPair> pairs, const Integrand& fn) {
  std::vector<double> gaps(pairs.size());
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      const auto& [p, q] = pairs[k];
      gaps[k] = std::abs(fn(p[0], p[1]) - fn(q[0], q[1]));
    } catch (...) {
      slot.capture();
    }
  }
  slot.rethrow();
  double m = 0.0;
  for (double g : gaps) m = std::max(m, g);
  return m;
}

double max_pairwise_slope(std::span<const double> t, std::span<const double> values) {
  std::vector<double> rows(t.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) rows[i] = slope_row(t, values, static_cast<std::size_t>(i));
  double m = 0.0;
  for (double r : rows) m = std::max(m, r);
  return m;
}

}  // namespace omp

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  ExceptionSlot slot;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      slot.capture();
    }
  }
  slot.rethrow();
}

int configure_threads_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("CHARFLOW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) omp_set_num_threads(std::min(cap, omp_get_max_threads()));
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace charflow::kernels
