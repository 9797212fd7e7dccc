#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcl/forms.hpp"
#include "mcl/geometry.hpp"
#include "mcl/linalg.hpp"
#include "mcl/rng.hpp"

using namespace mcl;
using geometry::Chart;
using geometry::ChartPoint;
using geometry::ParamManifold;
using ocw::ConnectionPath;
using ocw::FormField;
using ocw::GaugeMap;

namespace {

MatC random_matrix(int n, CounterRng& rng) {
  MatC m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = rng.normal_complex();
  return m;
}

// Signed S3 expansion written out by hand, kept independent of the library's
// permutation loop.
Complex three_fold_oracle(const MatC& a, const MatC& b, const MatC& c) {
  return (a * b * c).trace() - (a * c * b).trace() - (b * a * c).trace() +
         (b * c * a).trace() + (c * a * b).trace() - (c * b * a).trace();
}

ParamManifold unit_square() {
  Chart chart;
  chart.lo = VecR::Zero(2);
  chart.hi = VecR::Ones(2);
  chart.orientation = +1;
  chart.periodic = {false, false};

  ParamManifold m;
  m.name = "unit-square";
  m.dim = 2;
  m.charts = {chart};
  return m;
}

// exp(i (u0 sigma_x + u1 sigma_y)) on the unit square, derivatives by finite
// differences.
GaugeMap su2_square_map(const ParamManifold& domain) {
  GaugeMap g;
  g.domain = &domain;
  g.n = 2;
  g.value = [](const ChartPoint& p) {
    MatC h(2, 2);
    h << 0.0, Complex(p.u[0], -p.u[1]), Complex(p.u[0], p.u[1]), 0.0;
    return expm(MatC(Complex(0, 1) * h));
  };
  return g;
}

// Circle map winding m times through a fixed unitary frame, with the exact
// coordinate derivative.
GaugeMap winding_map(const ParamManifold& circle, int m, const MatC& frame) {
  GaugeMap g;
  g.domain = &circle;
  g.n = 2;
  g.value = [m, frame](const ChartPoint& p) {
    MatC d = MatC::Identity(2, 2);
    d(0, 0) = std::exp(Complex(0, m * p.u[0]));
    return MatC(frame * d * frame.adjoint());
  };
  g.derivative = [m, frame](const ChartPoint& p, int) {
    MatC d = MatC::Zero(2, 2);
    d(0, 0) = Complex(0, m) * std::exp(Complex(0, m * p.u[0]));
    return MatC(frame * d * frame.adjoint());
  };
  return g;
}

}  // namespace

// ============================================================================
// Pointwise algebra
// ============================================================================

TEST_CASE("wedge trace matches the signed permutation expansion") {
  CounterRng rng(901);
  for (int trial = 0; trial < 8; ++trial) {
    const MatC a = random_matrix(2, rng);
    const MatC b = random_matrix(2, rng);
    const MatC c = random_matrix(2, rng);
    const Complex got = ocw::wedge_trace({a, b, c});
    const Complex want = three_fold_oracle(a, b, c);
    CHECK(std::abs(got - want) < 1e-12 * (1.0 + std::abs(want)));

    // Alternation: swapping two slots flips the sign.
    CHECK(std::abs(ocw::wedge_trace({b, a, c}) + got) < 1e-10);

    // Single slot degenerates to the plain trace, and two slots cancel by
    // cyclicity of the trace.
    CHECK(std::abs(ocw::wedge_trace({a}) - a.trace()) < 1e-14);
    CHECK(std::abs(ocw::wedge_trace({a, b})) < 1e-12);
  }
}

TEST_CASE("maurer-cartan coefficients are anti-hermitian and flat") {
  const ParamManifold square = unit_square();
  const GaugeMap g = su2_square_map(square);

  const double pts[][2] = {{0.3, 0.4}, {0.55, 0.2}, {0.7, 0.7}, {0.15, 0.85}};
  for (const auto& q : pts) {
    ChartPoint p;
    p.chart = 0;
    p.u = VecR::Zero(2);
    p.u << q[0], q[1];

    const auto omega = ocw::maurer_cartan(g, p);
    REQUIRE(omega.size() == 2);
    for (const auto& w : omega)
      CHECK((w + w.adjoint()).norm() < 1e-6);

    CHECK(ocw::mc_identity_residual(g, p) < 1e-5);
  }
}

// ============================================================================
// Constants
// ============================================================================

TEST_CASE("beta integrals take their closed-form values") {
  CHECK(std::abs(ocw::beta_integral(1) - 1.0) < 1e-15);
  CHECK(std::abs(ocw::beta_integral(2) + 1.0 / 6.0) < 1e-15);
  CHECK(std::abs(ocw::beta_integral(3) - 1.0 / 30.0) < 1e-15);

  for (int k = 1; k <= 8; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double want =
        sign * factorial(k - 1) * factorial(k - 1) / factorial(2 * k - 1);
    CHECK(std::abs(ocw::beta_integral(k) - want) < 1e-14);
  }
}

TEST_CASE("normalization constants and their rational skeletons") {
  const auto c1 = ocw::form_constants(1);
  CHECK(std::abs(c1.tc - kI / (2.0 * kPi)) < 1e-15);
  CHECK(std::abs(c1.tch - kI / (2.0 * kPi)) < 1e-15);

  const auto c2 = ocw::form_constants(2);
  CHECK(std::abs(c2.tc + 1.0 / (24.0 * kPi * kPi)) < 1e-15);
  CHECK(std::abs(c2.tch - 1.0 / (24.0 * kPi * kPi)) < 1e-15);

  for (int k = 1; k <= 8; ++k) {
    const auto fc = ocw::form_constants(k);
    // Both ratios sit over (2k-1)! and the numerators differ by a factor of
    // (k-1)!; everything here is integer-exact in doubles.
    CHECK(fc.tc_ratio.den == factorial(2 * k - 1));
    CHECK(fc.tch_ratio.den == fc.tc_ratio.den);
    CHECK(fc.tc_ratio.sign == +1);
    CHECK(fc.tch_ratio.sign == ((k % 2 == 1) ? +1 : -1));
    CHECK(fc.tc_ratio.num == factorial(k - 1) * fc.tch_ratio.num);

    // tc = (-1)^{k-1} (k-1)! tch as complex numbers.
    const double rel = ((k % 2 == 1) ? 1.0 : -1.0) * factorial(k - 1);
    CHECK(std::abs(fc.tc - rel * fc.tch) <=
          1e-15 * (std::abs(fc.tc) + 1.0));
  }

  CHECK_THROWS_AS(ocw::form_constants(0), std::invalid_argument);
  CHECK_THROWS_AS(ocw::form_constants(12), std::invalid_argument);
}

// ============================================================================
// Odd forms and transgression
// ============================================================================

TEST_CASE("degree-one form of a winding map integrates the winding number") {
  const ParamManifold s1 = geometry::circle();
  CounterRng rng(902);
  const MatC frame = haar_unitary(2, rng);
  const GaugeMap g = winding_map(s1, 3, frame);

  const FormField field = ocw::tc_form(g, 1);
  REQUIRE(field.degree == 1);

  // (i/2pi) tr(g^{-1} g') = (i/2pi)(3i) = -3/2pi pointwise, so the circle
  // integral is -3. Check the pointwise value here; the quadrature path is
  // exercised elsewhere.
  ChartPoint p;
  p.chart = 0;
  p.u = VecR::Constant(1, 1.1);
  std::vector<VecR> tangent{VecR::Ones(1)};
  const Complex val = field(p, tangent);
  CHECK(std::abs(val - Complex(-3.0 / (2.0 * kPi), 0.0)) < 1e-12);

  CHECK_THROWS_AS(field(p, {}), InvalidArity);
  CHECK_THROWS_AS(field(p, {tangent[0], tangent[0]}), InvalidArity);
}

TEST_CASE("transgression along a stationary path vanishes") {
  const ParamManifold s1 = geometry::circle();
  CounterRng rng(903);
  const MatC frame = haar_unitary(2, rng);
  const GaugeMap g = winding_map(s1, 2, frame);

  auto coeff = [&g](const ChartPoint& p, int i) {
    return ocw::maurer_cartan(g, p)[static_cast<size_t>(i)];
  };

  ConnectionPath path;
  path.domain = &s1;
  path.n = 2;
  path.a0 = coeff;
  path.a1 = coeff;

  for (auto kind : {ocw::CharClass::ChernCharacter, ocw::CharClass::ChernClass}) {
    const FormField tp = ocw::transgression_general(path, kind, 1);
    for (double theta : {0.3, 2.0, 5.5}) {
      ChartPoint p;
      p.chart = 0;
      p.u = VecR::Constant(1, theta);
      CHECK(std::abs(tp(p, {VecR::Ones(1)})) < 1e-12);
    }
  }
}

TEST_CASE("transgression from the trivial connection recovers the odd form") {
  const ParamManifold s1 = geometry::circle();
  CounterRng rng(904);
  const MatC frame = haar_unitary(2, rng);
  const GaugeMap g = winding_map(s1, -2, frame);

  ConnectionPath path;
  path.domain = &s1;
  path.n = 2;
  path.a0 = [](const ChartPoint&, int) { return MatC::Zero(2, 2); };
  path.a1 = [&g](const ChartPoint& p, int i) {
    return ocw::maurer_cartan(g, p)[static_cast<size_t>(i)];
  };

  const FormField tp =
      ocw::transgression_general(path, ocw::CharClass::ChernCharacter, 1);
  const FormField odd = ocw::tc_form(g, 1);

  std::vector<VecR> tangent{VecR::Ones(1)};
  for (double theta : {0.1, 1.7, 3.9, 6.0}) {
    ChartPoint p;
    p.chart = 0;
    p.u = VecR::Constant(1, theta);
    CHECK(std::abs(tp(p, tangent) - odd(p, tangent)) < 1e-8);
  }
}

TEST_CASE("chern class and character coincide in degree one") {
  const ParamManifold square = unit_square();

  // A smooth non-flat u(2) connection over the square.
  MatC h0(2, 2), h1(2, 2);
  h0 << kI * 0.4, Complex(0.2, 0.1), Complex(-0.2, 0.1), kI * -0.3;
  h1 << kI * -0.1, Complex(0.0, 0.5), Complex(0.0, 0.5), kI * 0.2;
  auto a = [&](const ChartPoint& p, int i) {
    const double s = (i == 0) ? std::cos(p.u[1]) : std::sin(p.u[0]);
    return MatC(s * (i == 0 ? h0 : h1));
  };

  const FormField cls =
      ocw::char_form(square, 2, a, ocw::CharClass::ChernClass, 1);
  const FormField chr =
      ocw::char_form(square, 2, a, ocw::CharClass::ChernCharacter, 1);
  REQUIRE(cls.degree == 2);
  REQUIRE(chr.degree == 2);

  std::vector<VecR> tangents{VecR::Unit(2, 0), VecR::Unit(2, 1)};
  bool saw_nonzero = false;
  const double pts[][2] = {{0.25, 0.5}, {0.6, 0.3}, {0.8, 0.85}};
  for (const auto& q : pts) {
    ChartPoint p;
    p.chart = 0;
    p.u = VecR::Zero(2);
    p.u << q[0], q[1];
    const Complex v1 = cls(p, tangents);
    const Complex v2 = chr(p, tangents);
    CHECK(std::abs(v1 - v2) < 1e-10);
    if (std::abs(v1) > 1e-6) saw_nonzero = true;
  }
  CHECK(saw_nonzero);
}
