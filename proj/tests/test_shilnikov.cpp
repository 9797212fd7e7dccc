#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcl/linalg.hpp"
#include "mcl/rng.hpp"
#include "mcl/shilnikov.hpp"

using namespace mcl;
using shilnikov::HyperbolicSystem;

namespace {

VecR vec1(double v) { return VecR::Constant(1, v); }

HyperbolicSystem scalar_linear() {
  return HyperbolicSystem::linear_diagonal(vec1(1.0), vec1(1.0));
}

}  // namespace

TEST_CASE("spectral gaps of the example blocks") {
  VecR s(2), u(1);
  s << 1.0, 2.0;
  u << 3.0;
  const auto sys = HyperbolicSystem::linear_diagonal(s, u);
  CHECK(sys.gaps().lambda1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sys.gaps().mu1 == doctest::Approx(3.0).epsilon(1e-12));

  // Purely expanding block: the contraction gap degenerates to the sentinel.
  const auto shear = HyperbolicSystem::shear_counterexample();
  CHECK(shear.s() == 0);
  CHECK(shear.gaps().mu1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(shear.gaps().lambda1 > 1e100);

  MatR bad(1, 1);
  bad << 0.5;  // wrong sign for a contraction block
  MatR lp(1, 1);
  lp << 1.0;
  CHECK_THROWS_AS(shilnikov::spectral_gaps(bad, lp), NotHyperbolic);
}

TEST_CASE("derivative-sum estimate hits the symbolic corner values") {
  // f = x^3, g = 0: the sum |F| + |dF/dx| + |dF/dy| peaks at the corner with
  // value eps^3 + 3 eps^2.
  auto cubic_f = [](const VecR& x, const VecR&, VecR& f, VecR& g) {
    f = VecR::Constant(1, x(0) * x(0) * x(0));
    g = VecR::Zero(1);
  };
  MatR lm(1, 1), lp(1, 1);
  lm << -1.0;
  lp << 1.0;
  const HyperbolicSystem sys(lm, lp, cubic_f);
  const double eps = 0.1;
  const double want = eps * eps * eps + 3.0 * eps * eps;
  CHECK(shilnikov::delta_estimate(sys, eps, 1) ==
        doctest::Approx(want).epsilon(1e-6));

  // The built-in straightened cubic: sqrt(2) e^3 + 2 sqrt(5) e^2.
  const auto builtin = HyperbolicSystem::cubic_straightened();
  const double symbolic = std::sqrt(2.0) * eps * eps * eps +
                          2.0 * std::sqrt(5.0) * eps * eps;
  CHECK(shilnikov::delta_estimate(builtin, eps, 1) ==
        doctest::Approx(symbolic).epsilon(0.02));
}

TEST_CASE("initial value solver reproduces linear decay") {
  const auto sys = scalar_linear();
  const auto traj = shilnikov::solve_ivp(sys, vec1(0.2), vec1(0.01), 2.0);
  CHECK(std::abs(traj.x.back()(0) - 0.2 * std::exp(-2.0)) < 1e-10);
  CHECK(std::abs(traj.y.back()(0) - 0.01 * std::exp(2.0)) < 1e-10);
  VecR xi, yi;
  traj.state_at(1.0, xi, yi);
  CHECK(std::abs(xi(0) - 0.2 * std::exp(-1.0)) < 1e-9);
}

TEST_CASE("initial value solver detects blowup") {
  const auto sys = scalar_linear();
  CHECK_THROWS_AS(shilnikov::solve_ivp(sys, vec1(0.0), vec1(1.0), 30.0),
                  Blowup);
}

TEST_CASE("boundary solver on the linear system") {
  const auto sys = scalar_linear();
  shilnikov::BvpProblem prob;
  prob.x0 = vec1(0.1);
  prob.y1 = vec1(0.1);
  prob.tau = 2.0;
  prob.epsilon = 0.5;
  const auto sol = shilnikov::solve_bvp(sys, prob);
  CHECK(std::abs(sol.x1(0) - 0.1 * std::exp(-2.0)) < 1e-10);
  CHECK(std::abs(sol.y0(0) - 0.1 * std::exp(-2.0)) < 1e-10);
  CHECK(sol.stats.hypothesis_satisfied);
  CHECK(sol.stats.bound_satisfied);

  VecR xi, yi;
  sol.traj.state_at(0.5, xi, yi);
  CHECK(std::abs(xi(0) - 0.1 * std::exp(-0.5)) < 1e-9);

  // Degenerate interval returns the data unchanged.
  prob.tau = 0.0;
  const auto zero = shilnikov::solve_bvp(sys, prob);
  CHECK(std::abs(zero.x1(0) - 0.1) < 1e-13);
  CHECK(std::abs(zero.y0(0) - 0.1) < 1e-13);

  const auto maps = shilnikov::endpoint_maps(sys, vec1(0.1), vec1(0.1), 2.0,
                                             0.5);
  CHECK(std::abs(maps.x1(0) - 0.1 * std::exp(-2.0)) < 1e-10);
  CHECK(std::abs(maps.y0(0) - 0.1 * std::exp(-2.0)) < 1e-10);
}

TEST_CASE("boundary solver matches a shooting oracle on the cubic system") {
  const auto sys = HyperbolicSystem::cubic_straightened();
  shilnikov::BvpProblem prob;
  prob.x0 = vec1(0.2);
  prob.y1 = vec1(0.2);
  prob.tau = 3.0;
  prob.epsilon = 0.3;
  const auto sol = shilnikov::solve_bvp(sys, prob);
  // This radius intentionally violates the contraction precheck; the solve
  // proceeds and records the warning.
  CHECK(!sol.stats.hypothesis_satisfied);

  double lo = 0.0, hi = 0.2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto traj = shilnikov::solve_ivp(sys, prob.x0, vec1(mid), prob.tau,
                                           5e-4);
    if (traj.y.back()(0) < prob.y1(0))
      lo = mid;
    else
      hi = mid;
  }
  CHECK(std::abs(sol.y0(0) - 0.5 * (lo + hi)) < 1e-8);
}

TEST_CASE("integral-equation identities both directions") {
  const auto sys = HyperbolicSystem::cubic_straightened();
  const double eps = 0.1;
  for (int i = 0; i < 40; ++i) {
    CounterRng rng(21, i);
    const VecR x0 = vec1(rng.uniform(-0.8 * eps, 0.8 * eps));
    const VecR y1 = vec1(rng.uniform(-0.8 * eps, 0.8 * eps));
    const double tau = rng.uniform(0.2, 4.0);

    shilnikov::BvpProblem prob;
    prob.x0 = x0;
    prob.y1 = y1;
    prob.tau = tau;
    prob.epsilon = eps;
    const auto bvp = shilnikov::solve_bvp(sys, prob);

    // Marching the recovered initial data forward must land on the boundary
    // values and match the interior of the fixed-point trajectory.
    const auto ivp = shilnikov::solve_ivp(sys, x0, bvp.y0, tau);
    CHECK(shilnikov::pair_norm(ivp.x.back() - bvp.x1, ivp.y.back() - y1) <
          1e-9);
    for (double frac : {0.3, 0.7}) {
      VecR xa, ya, xb, yb;
      ivp.state_at(frac * tau, xa, ya);
      bvp.traj.state_at(frac * tau, xb, yb);
      CHECK(shilnikov::pair_norm(xa - xb, ya - yb) < 1e-9);
    }

    // Other direction: start from initial data small enough to stay in the
    // cube, march forward, and ask the solver to recover it.
    const VecR y0s = vec1(y1(0) * std::exp(-tau));
    const auto fwd = shilnikov::solve_ivp(sys, x0, y0s, tau);
    shilnikov::BvpProblem prob2 = prob;
    prob2.y1 = fwd.y.back();
    const auto bvp2 = shilnikov::solve_bvp(sys, prob2);
    CHECK((bvp2.y0 - y0s).norm() < 1e-9);
  }
}

TEST_CASE("endpoint bound over random problems") {
  const auto sys = HyperbolicSystem::cubic_straightened();
  const double eps = 0.1;
  for (int i = 0; i < 100; ++i) {
    CounterRng rng(22, i);
    shilnikov::BvpProblem prob;
    prob.x0 = vec1(rng.uniform(-0.9 * eps, 0.9 * eps));
    prob.y1 = vec1(rng.uniform(-0.9 * eps, 0.9 * eps));
    prob.tau = rng.uniform(0.0, 6.0);
    prob.epsilon = eps;
    const auto sol = shilnikov::solve_bvp(sys, prob);
    const double data = shilnikov::pair_norm(prob.x0, prob.y1);
    CHECK(sol.stats.sup_norm <= 2.0 * data + 1e-9);
    CHECK(sol.stats.bound_satisfied);
  }
}

TEST_CASE("transit map closed forms") {
  const auto sys = scalar_linear();
  shilnikov::CubeSpec cube;
  cube.epsilon = 0.5;
  cube.gamma = 0.25;
  const VecR xw = vec1(0.5);

  const auto d = shilnikov::dulac_map(sys, cube, xw, vec1(0.2));
  CHECK(std::abs(d.transit_time - std::log(0.5 / 0.2)) < 1e-6);
  CHECK(std::abs(d.x_exit(0) - 0.2) < 1e-6);
  CHECK(std::abs(d.y_exit(0) - 0.5) < 1e-6);
  CHECK(d.max_x_norm <= 0.5 + 1e-9);

  const auto corner = shilnikov::dulac_map(sys, cube, xw, vec1(0.5));
  CHECK(corner.transit_time == 0.0);
  CHECK((corner.x_exit - xw).norm() == 0.0);

  CHECK_THROWS_AS(shilnikov::dulac_map(sys, cube, xw, vec1(0.0)),
                  OnStableManifold);

  // Transit contraction on the cubic system, several entry heights.
  const auto cubic = HyperbolicSystem::cubic_straightened();
  shilnikov::CubeSpec small;
  small.epsilon = 0.1;
  small.gamma = 0.05;
  const auto rates = shilnikov::decay_rates(cubic, 0.1);
  for (double yfrac : {0.2, 0.5, 0.8}) {
    const auto t = shilnikov::dulac_map(cubic, small, vec1(0.1),
                                        vec1(0.1 * yfrac));
    CHECK(t.x_exit.norm() <=
          0.1 * std::exp(-rates.rate() * t.transit_time) + 1e-9);
    CHECK(t.max_x_norm <= 0.1 + 1e-9);
  }
}

TEST_CASE("membership agrees with the transit gate") {
  const auto sys = scalar_linear();
  shilnikov::CubeSpec cube;
  cube.epsilon = 0.5;
  cube.gamma = 0.25;
  const VecR xw = vec1(0.5);

  CHECK(shilnikov::fundamental_membership(sys, cube, xw, vec1(0.0)).member);
  CHECK(shilnikov::fundamental_membership(sys, cube, vec1(0.0), vec1(0.3))
            .member);

  for (double yfrac : {0.3, 0.6, 0.9}) {
    const auto mem =
        shilnikov::fundamental_membership(sys, cube, xw, vec1(0.5 * yfrac));
    const auto d = shilnikov::dulac_map(sys, cube, xw, vec1(0.5 * yfrac));
    CHECK(mem.member == (d.x_exit.norm() < cube.gamma));
    CHECK(std::abs(mem.exit_gate - d.x_exit.norm()) < 1e-6);
  }
}

TEST_CASE("wall scan is clean for symmetric definite systems") {
  CHECK(shilnikov::transversality_scan(scalar_linear(), 0.5)
            .tangencies.empty());
  CHECK(shilnikov::transversality_scan(HyperbolicSystem::cubic_straightened(),
                                       0.1)
            .tangencies.empty());
}

TEST_CASE("wall scan finds the anti-diagonal tangencies of the shear block") {
  const auto shear = HyperbolicSystem::shear_counterexample();
  const double eps = 0.5;
  const auto scan = shilnikov::transversality_scan(shear, eps);
  REQUIRE(scan.tangencies.size() >= 2);
  bool saw_plus = false, saw_minus = false;
  for (const auto& t : scan.tangencies) {
    CHECK(t.wall == -1);
    CHECK(std::abs(t.y(0) + t.y(1)) < 1e-8);
    CHECK(std::abs(t.y.norm() - eps) < 1e-9);
    if (t.y(0) > 0) saw_plus = true;
    if (t.y(0) < 0) saw_minus = true;
  }
  CHECK(saw_plus);
  CHECK(saw_minus);
}

TEST_CASE("endpoint decay table slopes") {
  const auto lin = scalar_linear();
  const auto probe =
      shilnikov::graph_closure_probe(lin, 0.5, 3, {1.0, 2.0, 3.0, 4.0});
  CHECK(std::abs(probe.slope_x + 1.0) < 1e-3);
  CHECK(std::abs(probe.slope_y + 1.0) < 1e-3);
  CHECK(std::abs(probe.slope_dx + 1.0) < 1e-3);
  CHECK(std::abs(probe.slope_dy + 1.0) < 1e-3);
  CHECK(probe.max_residual < 1e-3);

  const auto cubic = HyperbolicSystem::cubic_straightened();
  const auto rates = shilnikov::decay_rates(cubic, 0.1);
  CHECK(rates.rate() > 0.7);
  const auto probe2 =
      shilnikov::graph_closure_probe(cubic, 0.1, 3, {1.0, 2.0, 3.0, 4.0, 5.0});
  const double bound = -rates.rate() + 0.05;
  CHECK(probe2.slope_x <= bound);
  CHECK(probe2.slope_y <= bound);
  CHECK(probe2.slope_dx <= bound);
  CHECK(probe2.slope_dy <= bound);
}

TEST_CASE("construction validates straightening") {
  // Nonlinear part with a linear term must be rejected.
  auto not_straight = [](const VecR& x, const VecR&, VecR& f, VecR& g) {
    f = 0.5 * x;
    g = VecR::Zero(1);
  };
  MatR lm(1, 1), lp(1, 1);
  lm << -1.0;
  lp << 1.0;
  CHECK_THROWS_AS(HyperbolicSystem(lm, lp, not_straight),
                  std::invalid_argument);
}
