#include "charflow/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

#include "charflow/error.hpp"
#include "charflow/flux_model.hpp"
#include "charflow/kernels.hpp"
#include "charflow/low_discrepancy.hpp"

namespace charflow {

double LagrangianParam::monotonicity_defect() const {
  double defect = 0.0;
  for (std::size_t j = 0; j + 1 < columns.size(); ++j)
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      defect = std::max(defect, columns[j].x[i] - columns[j + 1].x[i]);
  return defect;
}

double LagrangianParam::coverage_radius(const Domain& domain) const {
  double radius = 0.0;
  const int n = 32;
  for (int a = 0; a < n; ++a) {
    const double t = domain.t0 + domain.duration() * a / (n - 1);
    if (columns.empty() || !columns.front().covers(t)) continue;
    for (int b = 0; b < n; ++b) {
      const double x = domain.x0 + domain.width() * b / (n - 1);
      double best = INFINITY;
      for (const auto& c : columns) best = std::min(best, std::abs(c.position_at(t) - x));
      radius = std::max(radius, best);
    }
  }
  return radius;
}

std::vector<double> rational_times(double t0, double t1, std::size_t count) {
  std::vector<double> q(count);
  for (std::size_t k = 0; k < count; ++k) q[k] = t0 + van_der_corput(k) * (t1 - t0);
  return q;
}

double theta_encode(const CharacteristicCurve& curve, std::span<const double> times) {
  double theta = 0.0, w = 1.0;
  for (double q : times) {
    if (curve.covers(q)) theta += curve.position_at(q) * w;
    w *= 0.5;
  }
  return theta;
}

std::vector<std::size_t> bisection_order(std::size_t n) {
  std::vector<std::size_t> order;
  if (n == 0) return order;
  std::deque<std::pair<std::size_t, std::size_t>> queue{{0, n - 1}};
  while (!queue.empty()) {
    auto [lo, hi] = queue.front();
    queue.pop_front();
    const std::size_t mid = lo + (hi - lo) / 2;
    order.push_back(mid);
    if (mid > lo) queue.emplace_back(lo, mid - 1);
    if (mid < hi) queue.emplace_back(mid + 1, hi);
  }
  return order;
}

std::size_t insert_ordered(std::vector<CharacteristicCurve>& ordered, CharacteristicCurve raw,
                           const SeedPoint& seed) {
  // Members at or left of the seed form a prefix of a monotone family.
  std::size_t pos = 0;
  while (pos < ordered.size() && ordered[pos].position_at(seed.t) <= seed.x) ++pos;
  const CharacteristicCurve* lower = pos > 0 ? &ordered[pos - 1] : nullptr;
  const CharacteristicCurve* upper = pos < ordered.size() ? &ordered[pos] : nullptr;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double x = raw.x[i];
    if (lower) x = std::max(x, lower->position_at(raw.t[i]));
    if (upper) x = std::min(x, upper->position_at(raw.t[i]));
    raw.x[i] = x;
  }
  ordered.insert(ordered.begin() + static_cast<std::ptrdiff_t>(pos), std::move(raw));
  return pos;
}

LagrangianParam build_parameterization(const SolutionField& field, std::span<const SeedPoint> seeds,
                                       std::span<const double> t_grid, const ParamOptions& options) {
  if (t_grid.size() < 3) throw Error(ErrorKind::InvalidInput, "t_grid needs at least 3 nodes");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::InvalidInput, "t_grid must increase");
  if (!field.domain().contains_time(t_grid.front()) || !field.domain().contains_time(t_grid.back()))
    throw Error(ErrorKind::InvalidInput, "t_grid leaves the field's time range");
  if (seeds.empty()) throw Error(ErrorKind::InvalidInput, "no seed points");

  std::vector<SeedPoint> sorted(seeds.begin(), seeds.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const SeedPoint& a, const SeedPoint& b) { return a.t < b.t || (a.t == b.t && a.x < b.x); });

  const SpeedField speed = SpeedField::of(field);
  // Raw traces are independent of each other; the merge below is sequential.
  std::vector<CharacteristicCurve> raw(sorted.size());
  kernels::parallel_for(sorted.size(), [&](std::size_t i) {
    raw[i] = trace_on_nodes(speed, sorted[i].t, sorted[i].x, t_grid, options.substeps);
  });

  std::vector<CharacteristicCurve> ordered;
  std::vector<SeedPoint> ordered_seeds;
  for (std::size_t idx : bisection_order(sorted.size())) {
    const std::size_t pos = insert_ordered(ordered, std::move(raw[idx]), sorted[idx]);
    ordered_seeds.insert(ordered_seeds.begin() + static_cast<std::ptrdiff_t>(pos), sorted[idx]);
  }

  LagrangianParam p;
  p.t_grid.assign(t_grid.begin(), t_grid.end());
  p.columns = std::move(ordered);
  p.seeds = std::move(ordered_seeds);
  const auto q = rational_times(t_grid.front(), t_grid.back(), options.theta_terms);
  std::vector<double> theta(p.columns.size());
  for (std::size_t j = 0; j < p.columns.size(); ++j) theta[j] = theta_encode(p.columns[j], q);
  const double lo = theta.front(), hi = theta.back();
  p.y.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    p.y[j] = hi > lo ? (theta[j] - lo) / (hi - lo) : (theta.size() > 1 ? double(j) / (theta.size() - 1) : 0.0);
    // Columns equal at every listed time still get distinct labels.
    if (j > 0 && p.y[j] <= p.y[j - 1]) p.y[j] = p.y[j - 1] + 1e-12;
  }
  return p;
}

std::vector<std::vector<SourceSample>> extract_lagrangian_source(const LagrangianParam& param,
                                                                 const SolutionField& field) {
  std::vector<std::vector<SourceSample>> out(param.size());
  kernels::parallel_for(param.size(), [&](std::size_t j) {
    const auto& c = param.columns[j];
    const std::size_t n = c.size();
    if (n < 3) throw Error(ErrorKind::InvalidInput, "columns need at least 3 time nodes");
    const auto U = values_along(c, field);
    auto& s = out[j];
    s.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v;
      if (i == 0) v = (U[1] - U[0]) / (c.t[1] - c.t[0]);
      else if (i + 1 == n) v = (U[n - 1] - U[n - 2]) / (c.t[n - 1] - c.t[n - 2]);
      else v = (U[i + 1] - U[i - 1]) / (c.t[i + 1] - c.t[i - 1]);
      s[i] = {c.t[i], c.x[i], v, SourceMethod::ColumnSlope, 0, static_cast<int>(j), true, false};
    }
  });
  return out;
}

std::vector<SourceSample> universal_source_sample(const SolutionField& field,
                                                  std::span<const SeedPoint> points,
                                                  double source_bound,
                                                  const UniversalOptions& options) {
  (void)source_bound;  // recorded by callers; the sample itself does not depend on it
  const FluxModel& flux = field.flux();
  const double len = flux.working_interval().length();
  const double step = options.inflection_step > 0.0 ? options.inflection_step : len / 4096.0;
  const auto cover = inflection_set(flux, step);
  const Domain& d = field.domain();

  std::vector<SourceSample> out(points.size());
  kernels::parallel_for(points.size(), [&](std::size_t k) {
    const auto [t, x] = points[k];
    SourceSample s{t, x, 0.0, SourceMethod::DiffQuot, 0, -1, true, false};
    const double u0 = field.eval_u(t, x);
    if (in_cover(cover, u0)) {
      s.n_rule = true;
      out[k] = s;
      return;
    }
    const double scale = std::min(1.0, d.t1 - t);
    if (!(scale > 0.0)) throw Error(ErrorKind::OutOfDomain, "universal source needs a point before the final time");
    double h = 0.5;
    double prev = NAN;
    s.converged = false;
    for (int n = 1; n <= options.budget; ++n, h -= h * h) {
      const double hs = h * scale;
      const auto curve = integrate_characteristic(field, t, x, t + hs, hs / 256.0);
      if (curve.truncated) continue;  // left the domain: retry with the next, shorter step
      const double q = (field.eval_u(curve.t.back(), curve.x.back()) - u0) / hs;
      s.value = q;
      s.terms = n;
      if (n > 1 && std::abs(q - prev) <= options.rel_tol * std::max(std::abs(q), std::abs(prev)) + 1e-12) {
        s.converged = true;
        break;
      }
      prev = q;
    }
    out[k] = s;
  });
  return out;
}

SingleValuedReport check_source_single_valued(const LagrangianParam& param,
                                              const SolutionField& field, double epsilon,
                                              double sigma, double touch_tol) {
  SingleValuedReport rep;
  rep.epsilon = epsilon;
  rep.sigma = sigma;
  const std::size_t m = param.size(), n = param.t_grid.size();
  const auto& t = param.t_grid;
  std::vector<std::vector<double>> centered(m, std::vector<double>(n, 0.0));
  std::vector<std::vector<char>> converged(m, std::vector<char>(n, 0));
  std::vector<std::vector<double>> values(m);
  for (std::size_t j = 0; j < m; ++j) {
    values[j] = values_along(param.columns[j], field);
    const auto& U = values[j];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double dm = (U[i] - U[i - 1]) / (t[i] - t[i - 1]);
      const double dp = (U[i + 1] - U[i]) / (t[i + 1] - t[i]);
      centered[j][i] = (U[i + 1] - U[i - 1]) / (t[i + 1] - t[i - 1]);
      converged[j][i] = std::abs(dp - dm) <= epsilon;
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      std::vector<std::size_t> hits;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        // Same point of the plane: position and value both agree.
        if (std::abs(param.columns[a].x[i] - param.columns[b].x[i]) > touch_tol) continue;
        if (std::abs(values[a][i] - values[b][i]) > touch_tol) continue;
        if (!converged[a][i] || !converged[b][i]) continue;
        if (std::abs(centered[a][i] - centered[b][i]) <= epsilon) continue;
        hits.push_back(i);
        rep.discrepancies.push_back({a, b, t[i], centered[a][i], centered[b][i]});
      }
      for (std::size_t h = 1; h < hits.size(); ++h) {
        const std::size_t i0 = hits[h - 1], i1 = hits[h];
        const double gap = t[i1] - t[i0];
        if (gap < sigma)
          rep.violations.push_back({a, b, t[i0], t[i1], {centered[a][i0], centered[b][i0]},
                                    {centered[a][i1], centered[b][i1]}, gap});
      }
    }
  }
  return rep;
}

std::vector<JacobianCell> jacobian_positivity(const LagrangianParam& param, double tol) {
  if (param.size() < 2) throw Error(ErrorKind::InvalidInput, "jacobian diagnostic needs >= 2 columns");
  std::vector<JacobianCell> cells;
  const auto& t = param.t_grid;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    for (std::size_t j = 0; j + 1 < param.size(); ++j) {
      const double w0 = param.columns[j + 1].x[i] - param.columns[j].x[i];
      const double w1 = param.columns[j + 1].x[i + 1] - param.columns[j].x[i + 1];
      const double ratio = 0.5 * (w0 + w1);  // swept area / duration
      const double dy = param.y[j + 1] - param.y[j];
      cells.push_back({i, j, ratio, dy > 0.0 ? ratio / dy : INFINITY, ratio < tol});
    }
  }
  return cells;
}

}  // namespace charflow
