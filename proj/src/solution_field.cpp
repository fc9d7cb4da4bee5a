#include "charflow/solution_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "charflow/csv.hpp"
#include "charflow/error.hpp"
#include "charflow/kernels.hpp"
#include "charflow/low_discrepancy.hpp"

namespace charflow {

namespace {

double edge_slack(double a, double b) { return 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

std::string point_str(double t, double x) {
  std::ostringstream os;
  os << "(" << t << ", " << x << ")";
  return os.str();
}

Lattice2D probe_lattice(const Domain& d, std::size_t n) {
  return {d.t0, d.duration() / static_cast<double>(n - 1), n - 1,
          d.x0, d.width() / static_cast<double>(n - 1), n - 1};
}

}  // namespace

bool Domain::contains(double t, double x) const {
  return contains_time(t) && x >= x0 - edge_slack(x0, x1) && x <= x1 + edge_slack(x0, x1);
}

bool Domain::contains_time(double t) const {
  return t >= t0 - edge_slack(t0, t1) && t <= t1 + edge_slack(t0, t1);
}

SolutionField::SolutionField(std::string name, Domain domain,
                             std::shared_ptr<const FieldEvaluator> evaluator, FluxModel flux,
                             std::optional<double> interpolation_error)
    : name_(std::move(name)),
      domain_(domain),
      evaluator_(std::move(evaluator)),
      flux_(std::move(flux)),
      interpolation_error_(interpolation_error) {
  if (!(domain_.t1 > domain_.t0) || !(domain_.x1 > domain_.x0))
    throw Error(ErrorKind::InvalidInput, "domain rectangle must have t0 < t1 and x0 < x1");
  if (!evaluator_) throw Error(ErrorKind::InvalidInput, "field evaluator missing");

  const Lattice2D probe = probe_lattice(domain_, 64);
  const auto* ev = evaluator_.get();
  range_max_ = kernels::grid_max(probe, [ev](double t, double x) {
    const double u = ev->value(t, x);
    if (!std::isfinite(u)) throw Error(ErrorKind::InvalidInput, "field is not finite at " + point_str(t, x));
    return u;
  });
  range_min_ = -kernels::grid_max(probe, [ev](double t, double x) { return -ev->value(t, x); });
  flux_.require_in_interval(range_min_, "field range minimum");
  flux_.require_in_interval(range_max_, "field range maximum");

  const FluxModel& f = flux_;
  speed_bound_ = 1.05 * kernels::grid_max(probe, [ev, &f](double t, double x) {
    return std::abs(f.df(ev->value(t, x)));
  });
  curvature_bound_ = 1.05 * kernels::grid_max(probe, [ev, &f](double t, double x) {
    return std::abs(f.d2f(ev->value(t, x)));
  });
}

double SolutionField::eval_u(double t, double x) const {
  if (!domain_.contains(t, x))
    throw Error(ErrorKind::OutOfDomain, "point " + point_str(t, x) + " outside field '" + name_ + "'");
  return evaluator_->value(t, x);
}

double SolutionField::eval_lambda(double t, double x) const {
  const double u = eval_u(t, x);
  flux_.require_in_interval(u, "solution");
  return flux_.df(u);
}

GridEvaluator::GridEvaluator(std::vector<double> t_nodes, std::vector<double> x_nodes,
                             std::vector<double> values)
    : t_(std::move(t_nodes)), x_(std::move(x_nodes)), v_(std::move(values)) {
  if (t_.size() < 2 || x_.size() < 2)
    throw Error(ErrorKind::InvalidInput, "grid field needs at least 2 nodes per axis");
  if (v_.size() != t_.size() * x_.size())
    throw Error(ErrorKind::InvalidInput, "grid field value count does not match the lattice");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw Error(ErrorKind::InvalidInput, "grid t nodes must increase");
  for (std::size_t j = 1; j < x_.size(); ++j)
    if (!(x_[j] > x_[j - 1])) throw Error(ErrorKind::InvalidInput, "grid x nodes must increase");
  for (double v : v_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "grid field has non-finite values");
}

std::shared_ptr<GridEvaluator> GridEvaluator::from_csv(const std::string& path,
                                                       const std::string& value_column) {
  const CsvTable csv = read_csv(path);
  const std::size_t it = csv.column("t"), ix = csv.column("x"), iu = csv.column(value_column);
  std::map<double, std::size_t> tmap, xmap;
  for (const auto& row : csv.rows) {
    tmap.emplace(row[it], 0);
    xmap.emplace(row[ix], 0);
  }
  std::vector<double> t, x;
  for (auto& [k, idx] : tmap) { idx = t.size(); t.push_back(k); }
  for (auto& [k, idx] : xmap) { idx = x.size(); x.push_back(k); }
  if (csv.rows.size() != t.size() * x.size())
    throw Error(ErrorKind::InvalidInput, path + ": samples do not form a rectangular lattice");
  std::vector<double> v(t.size() * x.size(), 0.0);
  std::vector<char> seen(v.size(), 0);
  for (const auto& row : csv.rows) {
    const std::size_t k = tmap[row[it]] * x.size() + xmap[row[ix]];
    if (seen[k]) throw Error(ErrorKind::InvalidInput, path + ": duplicate lattice node");
    seen[k] = 1;
    v[k] = row[iu];
  }
  return std::make_shared<GridEvaluator>(std::move(t), std::move(x), std::move(v));
}

double GridEvaluator::value(double t, double x) const {
  auto locate = [](const std::vector<double>& nodes, double q, double& w) {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), q) - nodes.begin());
    i = std::clamp<std::size_t>(i, 1, nodes.size() - 1) - 1;
    w = std::clamp((q - nodes[i]) / (nodes[i + 1] - nodes[i]), 0.0, 1.0);
    return i;
  };
  double wt = 0.0, wx = 0.0;
  const std::size_t i = locate(t_, t, wt), j = locate(x_, x, wx);
  const std::size_t nx = x_.size();
  const double a = (1.0 - wx) * v_[i * nx + j] + wx * v_[i * nx + j + 1];
  const double b = (1.0 - wx) * v_[(i + 1) * nx + j] + wx * v_[(i + 1) * nx + j + 1];
  return (1.0 - wt) * a + wt * b;
}

std::string GridEvaluator::describe() const {
  return "grid " + std::to_string(t_.size()) + "x" + std::to_string(x_.size());
}

double GridEvaluator::interpolation_error_bound() const {
  const std::size_t nt = t_.size(), nx = x_.size();
  auto at = [&](std::size_t i, std::size_t j) { return v_[i * nx + j]; };
  double bound = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      double e = 0.0;
      if (i > 0 && i + 1 < nt) e += std::abs(at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j));
      if (j > 0 && j + 1 < nx) e += std::abs(at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1));
      bound = std::max(bound, e / 8.0);
    }
  }
  return bound;
}

double ModulusEstimate::at(double d) const {
  for (std::size_t i = 0; i < deltas.size(); ++i)
    if (deltas[i] >= d) return omegas[i];
  return omegas.empty() ? 0.0 : omegas.back();
}

ModulusEstimate modulus_of_continuity(const SolutionField& field, std::span<const double> deltas,
                                      std::uint64_t seed, std::size_t pairs) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw Error(ErrorKind::InvalidInput, "deltas must be positive");
    if (i > 0 && !(deltas[i] > deltas[i - 1]))
      throw Error(ErrorKind::InvalidInput, "deltas must be ascending");
  }
  const Domain& d = field.domain();
  ModulusEstimate est;
  est.pairs_per_delta = pairs;
  est.speed_weight = std::max(field.speed_bound(), 1e-12 * d.width() / d.duration());
  const auto* ev = field.evaluator().get();
  auto u = [ev](double t, double x) { return ev->value(t, x); };

  double running = 0.0;
  std::vector<kernels::PointPair> sample(pairs);
  for (double delta : deltas) {
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto h = halton4(seed * pairs + k + 1);
      const double t = d.t0 + h[0] * d.duration();
      const double x = d.x0 + h[1] * d.width();
      double a = 2.0 * h[2] - 1.0, b = 2.0 * h[3] - 1.0;
      if (k % 2) {  // corners of the metric ball
        a = a < 0 ? -1.0 : 1.0;
        b = b < 0 ? -1.0 : 1.0;
      }
      const double t2 = std::clamp(t + a * delta, d.t0, d.t1);
      const double x2 = std::clamp(x + b * delta * est.speed_weight, d.x0, d.x1);
      sample[k] = {{t, x}, {t2, x2}};
    }
    running = std::max(running, kernels::max_pair_gap(sample, u));
    est.deltas.push_back(delta);
    est.omegas.push_back(running);
  }
  return est;
}

}  // namespace charflow
