#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/flux_model.hpp"
#include "charflow/quadrature.hpp"
#include "charflow/solution_field.hpp"
#include "charflow/source.hpp"

namespace charflow {

// Tensor bump phi(t,x) = A b((t-tc)/rt) b((x-xc)/rx), b(s) = (1-s^2)^3 on |s| <= 1.
struct TestFunction {
  double tc = 0.0, xc = 0.0;
  double rt = 1.0, rx = 1.0;
  double amplitude = 1.0;

  double value(double t, double x) const;
  double dt(double t, double x) const;
  double dx(double t, double x) const;
  bool support_inside(const Domain& domain) const;

  // Amplitude such that the integral of phi(t, xc) over t equals 1.
  static double unit_time_trace_amplitude(double rt);
};

double bump(double s);
double bump_prime(double s);

// Random test functions with supports inside the domain. When straddle_x0 is set the
// support contains x = 0 (for fields singular there).
std::vector<TestFunction> random_test_functions(const Domain& domain, std::size_t count,
                                                std::uint64_t seed, bool straddle_x0 = false);

struct ResidualReport {
  std::string testfn;
  double value = 0.0;
  double mesh = 0.0;
  double value_half = 0.0;  // value at mesh / 2
  double ratio = 0.0;       // |value_half| / |value|
  double tol = 0.0;
  bool pass = false;
};

// Simpson lattice on the support box, interval count a multiple of 16, spacing <= h.
Lattice2D support_lattice(const TestFunction& phi, double h);

// Distributional residual <u_t + f(u)_x - g, phi> at one mesh (no refinement).
double weak_residual_value(const SolutionField& field, const SourceTerm& source,
                           const TestFunction& phi, double mesh);

ResidualReport weak_residual(const SolutionField& field, const SourceTerm& source,
                             const TestFunction& phi, double mesh, double tol);

enum class EntropyKind { Linear, Quadratic, KruzkovSmoothed };

struct EntropySpec {
  EntropyKind kind = EntropyKind::Quadratic;
  double c = 0.0;
  double width = 1e-2;

  std::string label() const;
  static EntropySpec parse(const std::string& text);  // "linear", "quadratic", "kruzkov:C[:W]"
};

// eta, eta' and q with q' = eta' f'. q is tabulated once over the working interval.
class EntropyPair {
 public:
  EntropyPair(const EntropySpec& spec, const FluxModel& flux, std::size_t panels = 4096);

  double eta(double z) const;
  double deta(double z) const;
  double q(double z) const;
  const EntropySpec& spec() const { return spec_; }

 private:
  double q_integrand(double z) const;

  EntropySpec spec_;
  FluxModel flux_;
  std::vector<double> nodes_, table_;  // q at nodes_
};

double entropy_residual_value(const SolutionField& field, const SourceTerm& source,
                              const EntropyPair& pair, const TestFunction& phi, double mesh);

ResidualReport entropy_residual(const SolutionField& field, const SourceTerm& source,
                                const EntropySpec& eta, const TestFunction& phi, double mesh,
                                double tol);

struct ProbePoint {
  double t = 0.0, x = 0.0;
  double u = 0.0, v = 0.0;
};

struct MaxPrincipleReport {
  bool initial_order_ok = true;
  bool source_order_ok = true;
  std::vector<ProbePoint> violations;
  std::size_t probes = 0;
  bool ok() const { return initial_order_ok && source_order_ok && violations.empty(); }
};

MaxPrincipleReport maximum_principle_check(const SolutionField& u, const SolutionField& v,
                                           const SourceTerm& g_u, const SourceTerm& g_v,
                                           int probe_n = 64, double tol = 1e-9);

// v = f'(u) under Burgers flux with source f''(u) g.
SolutionField burgers_derived_field(const SolutionField& field);
SourceTerm burgers_derived_source(const SolutionField& field, const SourceTerm& source);

ResidualReport flux_derivative_solution_check(const SolutionField& field, const SourceTerm& source,
                                              const TestFunction& phi, double mesh, double tol);

}  // namespace charflow
