#include "doctest.h"

#include <cmath>

#include "charflow/builtins.hpp"
#include "charflow/error.hpp"
#include "charflow/eulerian.hpp"
#include "charflow/quadrature.hpp"

using namespace charflow;

TEST_CASE("bump profile") {
  CHECK(simpson(bump, -1.0, 1.0, 4096) == doctest::Approx(32.0 / 35.0).epsilon(1e-12));
  CHECK(bump(1.0) == 0.0);
  CHECK(bump_prime(1.0) == 0.0);
  CHECK(bump(0.0) == 1.0);
  const double h = 1e-6;
  for (double s = -0.95; s < 1.0; s += 0.1) CHECK(bump_prime(s) == doctest::Approx((bump(s + h) - bump(s - h)) / (2 * h)).epsilon(1e-7));
  TestFunction phi{0.5, 0.1, 0.2, 0.3, 2.0};
  for (double t : {0.35, 0.5, 0.61})
    for (double x : {-0.1, 0.05, 0.3}) {
      CHECK(phi.dt(t, x) == doctest::Approx((phi.value(t + h, x) - phi.value(t - h, x)) / (2 * h)).epsilon(1e-6));
      CHECK(phi.dx(t, x) == doctest::Approx((phi.value(t, x + h) - phi.value(t, x - h)) / (2 * h)).epsilon(1e-6));
    }
  // unit time trace normalization: integral of phi(t, xc) dt = 1
  const TestFunction n{0.5, 0.0, 0.25, 0.25, TestFunction::unit_time_trace_amplitude(0.25)};
  CHECK(simpson([&](double t) { return n.value(t, 0.0); }, 0.25, 0.75, 4096) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random test functions stay in the domain and straddle on request") {
  const Domain d{0, 1, -1, 1};
  for (const auto& phi : random_test_functions(d, 50, 7)) CHECK(phi.support_inside(d));
  for (const auto& phi : random_test_functions(d, 50, 7, true)) {
    CHECK(phi.support_inside(d));
    CHECK(phi.xc - phi.rx < 0.0);
    CHECK(phi.xc + phi.rx > 0.0);
    // x = 0 lies on the aligned lattice
    const auto lat = support_lattice(phi, 1.0 / 256);
    const double k = -lat.x_start / lat.dx;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
}

TEST_CASE("weak residual examples") {
  const auto c = make_builtin("constant");
  for (const auto& phi : random_test_functions(c.field.domain(), 10, 1))
    CHECK(std::abs(weak_residual_value(c.field, c.source, phi, 1.0 / 256)) <= 1e-10);

  const auto m = make_builtin("manufactured");
  for (const auto& phi : random_test_functions(m.field.domain(), 10, 2)) {
    const auto r = weak_residual(m.field, m.source, phi, 1.0 / 256, 1e-6);
    CHECK(r.pass);
    CHECK(r.mesh == 1.0 / 256);
    CHECK(r.value_half == doctest::Approx(weak_residual_value(m.field, m.source, phi, 1.0 / 512)));
  }

  const auto s = make_builtin("sqrt-stationary");
  for (const auto& phi : random_test_functions(s.field.domain(), 10, 3, true))
    CHECK(std::abs(weak_residual_value(s.field, s.source, phi, 1.0 / 512)) <= 1e-4);
}

TEST_CASE("residual sign: a wrong source is detected") {
  const auto a = make_builtin("affine-source");
  const TestFunction phi{0.5, 0.0, 0.25, 0.25, 1.0};
  const SourceTerm wrong{[](double, double) { return -0.5; }, 0.5, "wrong"};
  // <u_t - g, phi> with u_t = 0.5 and g = -0.5 is the integral of phi
  const double mass = (32.0 / 35.0) * (32.0 / 35.0) * 0.25 * 0.25;
  // Simpson on the degree-6 profile: O(h^4) relative error
  CHECK(weak_residual_value(a.field, wrong, phi, 1.0 / 256) == doctest::Approx(mass).epsilon(1e-7));
}

TEST_CASE("residual is linear in the test-function amplitude") {
  const auto m = make_builtin("manufactured");
  const SourceTerm off{[](double t, double x) { return x * (1 + t * t) + 0.1; }, 2.1, "offset"};
  TestFunction phi{0.5, 0.1, 0.2, 0.3, 1.0};
  const double v1 = weak_residual_value(m.field, off, phi, 1.0 / 128);
  phi.amplitude = 3.0;
  const double v3 = weak_residual_value(m.field, off, phi, 1.0 / 128);
  CHECK(std::abs(v3 - 3.0 * v1) <= 1e-12 * std::abs(v3));
}

TEST_CASE("refinement does not increase the residual on solutions") {
  for (const char* name : {"rarefaction", "manufactured", "cubic-merge"}) {
    const auto b = make_builtin(name);
    for (const auto& phi : random_test_functions(b.field.domain(), 5, 4, b.hoelder)) {
      const auto r = weak_residual(b.field, b.source, phi, 1.0 / 128, 1.0);
      CHECK(std::abs(r.value_half) <= std::abs(r.value) + 1e-12);
    }
  }
}

TEST_CASE("support outside the domain is rejected") {
  const auto c = make_builtin("constant");
  const TestFunction phi{0.1, 0.0, 0.2, 0.2, 1.0};
  CHECK_THROWS_AS(weak_residual_value(c.field, c.source, phi, 1.0 / 64), Error);
  try {
    weak_residual_value(c.field, c.source, phi, 1.0 / 64);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SupportOutOfDomain);
  }
}

TEST_CASE("entropy specs and pairs") {
  CHECK(EntropySpec::parse("linear").kind == EntropyKind::Linear);
  const auto k = EntropySpec::parse("kruzkov:0.3:0.02");
  CHECK(k.kind == EntropyKind::KruzkovSmoothed);
  CHECK(k.c == 0.3);
  CHECK(k.width == 0.02);
  CHECK(EntropySpec::parse("kruzkov:-0.5").width == 1e-2);
  CHECK_THROWS_AS(EntropySpec::parse("cubic"), Error);
  CHECK_THROWS_AS(EntropySpec::parse("kruzkov:abc"), Error);

  const auto flux = FluxModel::builtin("cubic", {-1, 1});
  for (const auto& spec : {EntropySpec::parse("quadratic"), EntropySpec::parse("kruzkov:0.2")}) {
    const EntropyPair pair(spec, flux);
    const double h = 1e-5;
    for (double z = -0.9; z < 0.9; z += 0.0731) {
      CHECK(pair.deta(z) == doctest::Approx((pair.eta(z + h) - pair.eta(z - h)) / (2 * h)).epsilon(1e-6));
      const double dq = (pair.q(z + h) - pair.q(z - h)) / (2 * h);
      CHECK(std::abs(dq - pair.deta(z) * flux.df(z)) <= 1e-6);
    }
  }
}

TEST_CASE("entropy residual examples") {
  const auto r = make_builtin("rarefaction");
  for (const auto& phi : random_test_functions(r.field.domain(), 5, 5)) {
    const double w = weak_residual_value(r.field, r.source, phi, 1.0 / 256);
    const double lin = entropy_residual_value(r.field, r.source, EntropyPair(EntropySpec::parse("linear"), r.field.flux()), phi, 1.0 / 256);
    CHECK(lin == w);
    CHECK(entropy_residual(r.field, r.source, EntropySpec::parse("quadratic"), phi, 1.0 / 256, 1e-6).pass);
  }

  // dissipative shock: q(u_r) - q(u_l) = -1/3 - 1/3 for eta = z^2/2
  const auto s = make_builtin("stationary-shock");
  const TestFunction phi{0.5, 0.0, 0.25, 0.25, TestFunction::unit_time_trace_amplitude(0.25)};
  const auto rep = entropy_residual(s.field, s.source, EntropySpec::parse("quadratic"), phi, 1.0 / 512, 1e-5);
  CHECK(rep.value == doctest::Approx(-2.0 / 3.0).epsilon(0.05));
  CHECK_FALSE(rep.pass);
  // the same field is a weak solution
  CHECK(std::abs(weak_residual_value(s.field, s.source, phi, 1.0 / 512)) <= 1e-10);
}

TEST_CASE("maximum principle pairs") {
  const auto z = make_builtin("constant", {{"c", 0.0}}, std::nullopt, FluxModel::builtin("burgers", {-1, 1.5}));
  const auto o = make_builtin("constant", {{"c", 1.0}}, std::nullopt, FluxModel::builtin("burgers", {-1, 1.5}));
  CHECK(maximum_principle_check(z.field, o.field, z.source, o.source).ok());

  const auto r = make_builtin("rarefaction");
  const auto rs = make_builtin("rarefaction", {{"offset", 0.1}});
  const auto rep = maximum_principle_check(r.field, rs.field, r.source, rs.source);
  CHECK(rep.ok());
  CHECK(rep.probes == 64 * 64);

  const auto m = make_builtin("manufactured");
  const auto ms = make_builtin("manufactured", {{"offset", 0.5}});
  CHECK(maximum_principle_check(m.field, ms.field, m.source, ms.source).ok());

  // reversed order fails the initial-order precondition
  const auto bad = maximum_principle_check(rs.field, r.field, rs.source, r.source);
  CHECK_FALSE(bad.initial_order_ok);
  CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("Burgers-derived field") {
  const auto s = make_builtin("sqrt-stationary");
  const auto v = burgers_derived_field(s.field);
  CHECK(v.eval_u(0.5, -0.36) == doctest::Approx(0.36).epsilon(1e-14));
  const auto gv = burgers_derived_source(s.field, s.source);
  CHECK(gv(0.5, -0.36) == doctest::Approx(-0.36).epsilon(1e-14));
  for (const auto& phi : random_test_functions(s.field.domain(), 5, 6, true))
    CHECK(flux_derivative_solution_check(s.field, s.source, phi, 1.0 / 512, 1e-4).pass);

  const auto c = make_builtin("constant");
  const TestFunction phi{0.5, 0.0, 0.25, 0.25, 1.0};
  CHECK(std::abs(flux_derivative_solution_check(c.field, c.source, phi, 1.0 / 256, 1e-10).value) <= 1e-10);

  const auto r = make_builtin("rarefaction");
  const TestFunction pr{1.5, 0.0, 0.25, 0.25, 1.0};
  CHECK(flux_derivative_solution_check(r.field, r.source, pr, 1.0 / 256, 1e-6).value ==
        doctest::Approx(weak_residual_value(r.field, r.source, pr, 1.0 / 256)).epsilon(1e-12));
}
