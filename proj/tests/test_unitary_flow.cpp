#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcl/linalg.hpp"
#include "mcl/rng.hpp"
#include "mcl/spectral.hpp"
#include "mcl/unitary_flow.hpp"

using namespace mcl;
using spectral::IndexSet;

TEST_CASE("objective values at the critical points") {
  const auto cfg = uflow::FlowConfig::standard(3);  // a = (1, 2, 3)
  CHECK(uflow::f_value(cfg, MatC::Identity(3, 3)) == doctest::Approx(6.0));
  const MatC u2 = spectral::critical_point(IndexSet{2}, cfg.flag);
  CHECK(uflow::f_value(cfg, u2) == doctest::Approx(1.0 - 2.0 + 3.0));
  const MatC uall = spectral::critical_point(IndexSet{1, 2, 3}, cfg.flag);
  CHECK(uflow::f_value(cfg, uall) == doctest::Approx(-6.0));
}

TEST_CASE("flow map basics") {
  const auto cfg = uflow::FlowConfig::standard(3);
  CounterRng rng(11, 0);
  const MatC u = haar_unitary(3, rng);

  CHECK((uflow::flow_at(cfg, u, 0.0) - u).norm() < 1e-14);
  CHECK_THROWS_AS(uflow::flow_at(cfg, (2.0 * u).eval(), 1.0), NotUnitary);

  // Semigroup property across the unit-step seams.
  const MatC a = uflow::flow_at(cfg, uflow::flow_at(cfg, u, 0.7), 1.9);
  const MatC b = uflow::flow_at(cfg, u, 2.6);
  CHECK((a - b).norm() < 1e-9);

  // Unitarity along a long march.
  MatC cur = u;
  for (int i = 0; i < 30; ++i) {
    cur = uflow::flow_at(cfg, cur, 1.0);
    CHECK(unitarity_residual(cur) < 1e-9);
  }
}

TEST_CASE("flow derivative equals the gradient field") {
  const auto cfg = uflow::FlowConfig::standard(3);
  for (int s = 0; s < 5; ++s) {
    CounterRng rng(12, s);
    const MatC u = haar_unitary(3, rng);
    const double t = 0.3 + 0.4 * s, h = 1e-5;
    const MatC mid = uflow::flow_at(cfg, u, t);
    const MatC fwd = uflow::flow_at(cfg, u, t + h);
    const MatC bwd = uflow::flow_at(cfg, u, t - h);
    const MatC fd = (fwd - bwd) / (2 * h);
    CHECK((fd - uflow::gradient(cfg, mid)).norm() < 1e-7);
  }
}

TEST_CASE("objective is monotone along the flow") {
  const auto cfg = uflow::FlowConfig::standard(4);
  CounterRng rng(13, 0);
  MatC cur = haar_unitary(4, rng);
  double prev = uflow::f_value(cfg, cur);
  for (int i = 0; i < 60; ++i) {
    cur = uflow::flow_at(cfg, cur, 0.5);
    const double now = uflow::f_value(cfg, cur);
    CHECK(now >= prev - 1e-10);
    prev = now;
  }
}

TEST_CASE("critical points are fixed") {
  const auto cfg = uflow::FlowConfig::standard(3);
  for (const auto& I : IndexSet::all_subsets(3)) {
    const MatC ui = spectral::critical_point(I, cfg.flag);
    CHECK((uflow::flow_at(cfg, ui, 2.5) - ui).norm() < 1e-10);
  }
}

TEST_CASE("generic seeds converge to the identity label") {
  const auto cfg = uflow::FlowConfig::standard(3);
  for (int s = 0; s < 10; ++s) {
    CounterRng rng(14, s);
    const MatC u = haar_unitary(3, rng);
    const auto lim = uflow::flow_limit(cfg, u);
    const auto cls = spectral::incidence_classify(u, cfg.flag);
    REQUIRE(cls.has_value());
    CHECK(lim.index_set == *cls);
    CHECK(lim.distance <= 1e-6);
  }
}

TEST_CASE("a tilted kernel seed converges into its stratum") {
  const auto cfg = uflow::FlowConfig::standard(2);
  MatC v(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  v << r, r, r, -r;
  VecC ev(2);
  ev << Complex(-1, 0), std::exp(kI * 0.8);
  const MatC u = spectral::unitary_with_spectrum(ev, v);

  const auto cls = spectral::incidence_classify(u, cfg.flag);
  REQUIRE(cls.has_value());
  CHECK(*cls == IndexSet{1});

  // Saddle shadowing in double precision bottoms out near 1e-5 here: the
  // unstable phase direction amplifies rounding noise as e^{2t} while the
  // kernel tilt decays as e^{-t}.
  const auto lim = uflow::flow_limit(cfg, u, 1e-4);
  CHECK(lim.index_set == IndexSet{1});
  const MatC target = spectral::critical_point(IndexSet{1}, cfg.flag);
  CHECK((uflow::flow_at(cfg, u, lim.t_reached) - target).norm() < 2e-4);
}

TEST_CASE("flow configuration validation") {
  VecR decreasing(2);
  decreasing << 2.0, 1.0;
  CHECK_THROWS_AS(uflow::FlowConfig(2, decreasing, spectral::Flag::standard(2)),
                  std::invalid_argument);
}
