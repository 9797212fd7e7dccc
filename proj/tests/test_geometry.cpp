#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mcl/forms.hpp"
#include "mcl/geometry.hpp"
#include "mcl/integration.hpp"
#include "mcl/linalg.hpp"
#include "mcl/rng.hpp"
#include "mcl/spectral.hpp"

using namespace mcl;
using geometry::ChartPoint;
using geometry::MultistartSpec;
using geometry::ParamManifold;
using geometry::QuadratureSpec;
using ocw::FormField;
using ocw::GaugeMap;
using spectral::Flag;

namespace {

QuadratureSpec gl(int order) {
  QuadratureSpec q;
  q.kind = QuadratureSpec::Kind::GaussLegendre;
  q.order = order;
  return q;
}

QuadratureSpec mc(long samples, std::uint64_t seed) {
  QuadratureSpec q;
  q.kind = QuadratureSpec::Kind::MonteCarlo;
  q.samples = samples;
  q.seed = seed;
  return q;
}

// Top form whose single coefficient is the chart volume density; integrating
// it recovers the Riemannian volume.
FormField density_form(const ParamManifold& m) {
  FormField f;
  f.degree = m.dim;
  const auto density = m.volume_density;
  f.eval = [density](const ChartPoint& p, const std::vector<VecR>& ts) {
    MatR frame(p.dim(), p.dim());
    for (int c = 0; c < p.dim(); ++c) frame.col(c) = ts[static_cast<size_t>(c)];
    return Complex(density(p) * frame.determinant(), 0.0);
  };
  return f;
}

GaugeMap phase_family(const ParamManifold& circle, int m, const MatC& frame) {
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

// Unit quaternion coordinates on the 3-sphere and the corresponding special
// unitary matrix. Kept local so the preimage test does not lean on any
// library-side parametrization.
VecR hyperspherical_embed(const VecR& u) {
  VecR e(4);
  e << std::cos(u(0)), std::sin(u(0)) * std::cos(u(1)),
      std::sin(u(0)) * std::sin(u(1)) * std::cos(u(2)),
      std::sin(u(0)) * std::sin(u(1)) * std::sin(u(2));
  return e;
}

MatC quaternion_matrix(const VecR& e) {
  MatC q(2, 2);
  q << Complex(e(0), e(1)), Complex(e(2), e(3)), Complex(-e(2), e(3)),
      Complex(e(0), -e(1));
  return q;
}

VecR hyperspherical_embed_d(const VecR& u, int i) {
  const double chi = u(0), th = u(1), ph = u(2);
  VecR e(4);
  if (i == 0)
    e << -std::sin(chi), std::cos(chi) * std::cos(th),
        std::cos(chi) * std::sin(th) * std::cos(ph),
        std::cos(chi) * std::sin(th) * std::sin(ph);
  else if (i == 1)
    e << 0.0, -std::sin(chi) * std::sin(th),
        std::sin(chi) * std::cos(th) * std::cos(ph),
        std::sin(chi) * std::cos(th) * std::sin(ph);
  else
    e << 0.0, 0.0, -std::sin(chi) * std::sin(th) * std::sin(ph),
        std::sin(chi) * std::sin(th) * std::cos(ph);
  return e;
}

GaugeMap su2_translate(const ParamManifold& s3, const MatC& u0) {
  GaugeMap g;
  g.domain = &s3;
  g.n = 2;
  g.value = [u0](const ChartPoint& p) {
    return MatC(u0 * quaternion_matrix(hyperspherical_embed(p.u)));
  };
  g.derivative = [u0](const ChartPoint& p, int i) {
    return MatC(u0 * quaternion_matrix(hyperspherical_embed_d(p.u, i)));
  };
  return g;
}

double circ_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2 * kPi);
  return std::min(d, 2 * kPi - d);
}

}  // namespace

// ============================================================================
// Quadrature
// ============================================================================

TEST_CASE("gauss-legendre integrates polynomials at the exact order") {
  std::vector<double> nodes, weights;
  geometry::gauss_legendre(3, 0.0, 1.0, nodes, weights);
  double sum = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i)
    sum += weights[i] * std::pow(nodes[i], 5);
  CHECK(std::abs(sum - 1.0 / 6.0) < 1e-15);

  geometry::gauss_legendre(2, -1.0, 2.0, nodes, weights);
  sum = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i)
    sum += weights[i] * (std::pow(nodes[i], 3) - 2.0 * nodes[i]);
  CHECK(std::abs(sum - (15.0 / 4.0 - 3.0)) < 1e-13);
}

TEST_CASE("built-in parameter spaces have the right volumes") {
  CHECK(std::abs(integrate_form(geometry::circle(),
                                density_form(geometry::circle()), gl(16)) -
                 2 * kPi) < 1e-10);
  CHECK(std::abs(integrate_form(geometry::sphere2(),
                                density_form(geometry::sphere2()), gl(24)) -
                 4 * kPi) < 1e-8);
  CHECK(std::abs(integrate_form(geometry::sphere3(),
                                density_form(geometry::sphere3()), gl(24)) -
                 2 * kPi * kPi) < 1e-8);
  // The projective line density is normalized to unit total area.
  CHECK(std::abs(integrate_form(geometry::projective_line(),
                                density_form(geometry::projective_line()),
                                gl(24)) -
                 1.0) < 1e-10);

  // Monte-Carlo cross-check on the non-constant sphere density.
  const Complex v = integrate_form(geometry::sphere2(),
                                   density_form(geometry::sphere2()),
                                   mc(100000, 7));
  CHECK(std::abs(v - 4 * kPi) < 0.15);
}

TEST_CASE("degree mismatch is rejected") {
  FormField one_form;
  one_form.degree = 1;
  one_form.eval = [](const ChartPoint&, const std::vector<VecR>&) {
    return Complex(1, 0);
  };
  CHECK_THROWS_AS(integrate_form(geometry::sphere2(), one_form, gl(8)),
                  DegreeMismatch);
}

TEST_CASE("projective line area form integrates to 6 pi i") {
  // Coefficient of 3 dS* ^ dS on the tautological section in (alpha, phi)
  // coordinates; the closed form of the integral is 6 pi i.
  FormField f;
  f.degree = 2;
  f.eval = [](const ChartPoint& p, const std::vector<VecR>& ts) {
    MatR frame(2, 2);
    frame.col(0) = ts[0];
    frame.col(1) = ts[1];
    return 3.0 * (kI / 2.0) * std::sin(p.u(0)) * frame.determinant();
  };
  const Complex v = integrate_form(geometry::projective_line(), f, gl(20));
  CHECK(std::abs(v - 6.0 * kPi * kI) < 1e-9);
}

TEST_CASE("unstable-set integrals hit the pinned values") {
  const Complex v1 = geometry::integrate_unstable(1, gl(16));
  CHECK(std::abs(v1 - Complex(0.0, -2.0 * kPi)) < 1e-9);

  const Complex v2 = geometry::integrate_unstable(2, gl(20));
  const double want = -24.0 * kPi * kPi;
  CHECK(std::abs(v2 - want) < 1e-3 * std::abs(want));

  // The normalization constants turn both into exactly one.
  CHECK(std::abs(ocw::form_constants(1).tc * v1 - 1.0) < 1e-9);
  CHECK(std::abs(ocw::form_constants(2).tc * v2 - 1.0) < 1e-3);

  CHECK_THROWS_AS(geometry::integrate_unstable(3, gl(8)),
                  UnsupportedDimension);
}

// ============================================================================
// Preimage scans
// ============================================================================

TEST_CASE("winding family preimages are complete with the right signs") {
  const ParamManifold s1 = geometry::circle();
  const Flag flag = Flag::standard(2);
  CounterRng frames(411);

  for (int m = -5; m <= 5; ++m) {
    const MatC frame = haar_unitary(2, frames);
    const GaugeMap g = phase_family(s1, m, frame);
    const auto scan =
        geometry::find_preimages(g, flag, 1, MultistartSpec{64, 17});
    CHECK(scan.starts == 64);

    if (m == 0) {
      CHECK(scan.hits.empty());
      continue;
    }

    REQUIRE(static_cast<int>(scan.hits.size()) == std::abs(m));
    CHECK(scan.converged > 0);

    int total = 0;
    for (const auto& hit : scan.hits) {
      total += hit.sign;
      CHECK(hit.sign == (m > 0 ? -1 : +1));
      CHECK(hit.residual < 1e-8);

      // Roots of e^{i m theta} = -1 sit at odd multiples of pi / |m|.
      double best = 10.0;
      for (int j = 0; j < std::abs(m); ++j)
        best = std::min(best, circ_dist(hit.point.u(0),
                                        (2.0 * j + 1.0) * kPi / std::abs(m)));
      CHECK(best < 1e-9);
    }
    CHECK(total == -m);
  }
}

TEST_CASE("maps that never meet the stratum give empty scans") {
  const ParamManifold s1 = geometry::circle();
  CounterRng rng(412);
  const MatC frame = haar_unitary(2, rng);

  GaugeMap g;
  g.domain = &s1;
  g.n = 2;
  g.value = [frame](const ChartPoint&) {
    MatC d = MatC::Zero(2, 2);
    d(0, 0) = kI;
    d(1, 1) = std::exp(Complex(0, 0.7));
    return MatC(frame * d * frame.adjoint());
  };
  const auto scan =
      geometry::find_preimages(g, Flag::standard(2), 1, MultistartSpec{32, 3});
  CHECK(scan.hits.empty());
}

TEST_CASE("left-translated quaternion chart has one positive deep hit") {
  const ParamManifold s3 = geometry::sphere3();
  MatC u0;
  for (std::uint64_t stream = 9;; ++stream) {
    CounterRng rng(413, stream);
    u0 = haar_unitary(2, rng);
    if (std::abs(u0.determinant() - 1.0) > 1e-3) break;
  }
  const GaugeMap g = su2_translate(s3, u0);

  const auto scan =
      geometry::find_preimages(g, Flag::standard(2), 2, MultistartSpec{64, 5});
  REQUIRE(scan.hits.size() == 1);
  const auto& hit = scan.hits[0];
  CHECK(hit.sign == +1);
  CHECK(hit.residual < 1e-8);

  // The deep stratum needs u0 q e2 = -e2; reading the quaternion components
  // off the target column gives the location in closed form.
  const VecC t = -(u0.inverse() * VecC::Unit(2, 1));
  VecR e(4);
  e << t(1).real(), -t(1).imag(), t(0).real(), t(0).imag();
  const double chi = std::acos(e(0));
  const double th = std::acos(e(1) / std::sin(chi));
  double ph = std::atan2(e(3), e(2));
  if (ph < 0) ph += 2 * kPi;

  CHECK(std::abs(hit.point.u(0) - chi) < 1e-6);
  CHECK(std::abs(hit.point.u(1) - th) < 1e-6);
  CHECK(circ_dist(hit.point.u(2), ph) < 1e-6);

  // Kernel vector is the second flag direction after the phase gauge.
  CHECK((hit.kernel_vector - VecC::Unit(2, 1)).norm() < 1e-6);

  // The same map integrates the second odd form to one.
  const Complex total = integrate_form(s3, ocw::tc_form(g, 2), gl(20));
  CHECK(std::abs(total - 1.0) < 1e-3);
}

// ============================================================================
// Transversality and derivatives
// ============================================================================

TEST_CASE("stratum crossings classify as expected or forbidden") {
  const ParamManifold s1 = geometry::circle();
  CounterRng rng(414);
  const MatC frame = haar_unitary(2, rng);

  const GaugeMap fine = phase_family(s1, 1, frame);
  const auto good = geometry::transversality_check(fine, Flag::standard(2), 256);
  CHECK(good.pass);
  CHECK(good.forbidden.empty());
  REQUIRE(!good.expected.empty());
  CHECK(std::abs(good.expected[0].point.u(0) - kPi) < 1e-4);
  CHECK(good.expected[0].rank_ok);
  CHECK(good.expected[0].codim == 1);

  // diag(e^{i theta}, e^{2 i theta}) pushes the kernel onto the second flag
  // line at theta = pi/2 and 3 pi/2, a codimension-3 event over a circle.
  GaugeMap powers;
  powers.domain = &s1;
  powers.n = 2;
  powers.value = [](const ChartPoint& p) {
    MatC m = MatC::Zero(2, 2);
    m(0, 0) = std::exp(kI * p.u(0));
    m(1, 1) = std::exp(2.0 * kI * p.u(0));
    return m;
  };
  const auto bad = geometry::transversality_check(powers, Flag::standard(2), 256);
  CHECK(!bad.pass);
  REQUIRE(bad.forbidden.size() >= 2);
  bool saw_half = false, saw_three_half = false;
  for (const auto& hit : bad.forbidden) {
    CHECK(hit.codim == 3);
    if (circ_dist(hit.point.u(0), kPi / 2) < 1e-6) saw_half = true;
    if (circ_dist(hit.point.u(0), 3 * kPi / 2) < 1e-6) saw_three_half = true;
  }
  CHECK(saw_half);
  CHECK(saw_three_half);
}

TEST_CASE("finite-difference exterior derivative") {
  const ParamManifold s1 = geometry::circle();

  FormField height;
  height.degree = 0;
  height.eval = [](const ChartPoint& p, const std::vector<VecR>&) {
    return Complex(std::sin(p.u(0)), 0.0);
  };
  const FormField d = geometry::fd_exterior_derivative(s1, height);
  REQUIRE(d.degree == 1);
  for (double theta : {0.2, 1.5, 4.4}) {
    ChartPoint p;
    p.chart = 0;
    p.u = VecR::Constant(1, theta);
    CHECK(std::abs(d(p, {VecR::Ones(1)}) - std::cos(theta)) < 1e-6);
  }

  // Past the top degree the derivative clamps to the zero field.
  FormField one_form;
  one_form.degree = 1;
  one_form.eval = [](const ChartPoint& p, const std::vector<VecR>& ts) {
    return Complex(std::cos(p.u(0)) * ts[0](0), 0.0);
  };
  const FormField top = geometry::fd_exterior_derivative(s1, one_form);
  REQUIRE(top.degree == 2);
  ChartPoint p;
  p.chart = 0;
  p.u = VecR::Constant(1, 0.9);
  CHECK(std::abs(top(p, {VecR::Ones(1), VecR::Ones(1)})) == 0.0);
}
