#include "charflow/quadrature.hpp"

namespace charflow {

std::vector<double> simpson_weights(std::size_t n) {
  std::vector<double> w(n + 1, 0.0);
  if (n == 0) return w;
  for (std::size_t i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  return w;
}

double simpson(const std::function<double(double)>& fn, double a, double b, std::size_t n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double sum = fn(a) + fn(b);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * fn(a + static_cast<double>(i) * h);
  return sum * h / 3.0;
}

}  // namespace charflow
