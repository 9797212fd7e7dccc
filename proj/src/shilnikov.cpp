#include "mcl/shilnikov.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace mcl::shilnikov {

double pair_norm(const VecR& x, const VecR& y) {
  return std::max(x.size() ? x.norm() : 0.0, y.size() ? y.norm() : 0.0);
}

// ============================================================================
// System
// ============================================================================

SpectralGaps spectral_gaps(const MatR& lminus, const MatR& lplus) {
  SpectralGaps gaps;
  gaps.lambda1 = std::numeric_limits<double>::infinity();
  gaps.mu1 = std::numeric_limits<double>::infinity();
  if (lminus.rows() > 0) {
    const auto evs = Eigen::EigenSolver<MatR>(lminus).eigenvalues();
    for (int i = 0; i < evs.size(); ++i) {
      if (evs(i).real() >= -1e-10)
        throw NotHyperbolic("stable block has eigenvalue with Re >= -1e-10");
      gaps.lambda1 = std::min(gaps.lambda1, -evs(i).real());
    }
  }
  if (lplus.rows() > 0) {
    const auto evs = Eigen::EigenSolver<MatR>(lplus).eigenvalues();
    for (int i = 0; i < evs.size(); ++i) {
      if (evs(i).real() <= 1e-10)
        throw NotHyperbolic("unstable block has eigenvalue with Re <= 1e-10");
      gaps.mu1 = std::min(gaps.mu1, evs(i).real());
    }
  }
  return gaps;
}

HyperbolicSystem::HyperbolicSystem(MatR lminus, MatR lplus, NonlinearPart f,
                                   NonlinearJacobian jac)
    : lminus_(std::move(lminus)),
      lplus_(std::move(lplus)),
      f_(std::move(f)),
      jac_(std::move(jac)) {
  if (lminus_.rows() != lminus_.cols() || lplus_.rows() != lplus_.cols())
    throw std::invalid_argument("HyperbolicSystem: blocks must be square");
  gaps_ = spectral_gaps(lminus_, lplus_);
  symmetric_ = (lminus_ - lminus_.transpose()).norm() <= 1e-12 &&
               (lplus_ - lplus_.transpose()).norm() <= 1e-12;

  // Straightening check: F and dF vanish at the origin.
  const VecR zx = VecR::Zero(s()), zy = VecR::Zero(u());
  VecR f0(s()), g0(u());
  nonlinear(zx, zy, f0, g0);
  if (pair_norm(f0, g0) > 1e-8)
    throw std::invalid_argument("HyperbolicSystem: F(0,0) != 0");
  const MatR j0 = nonlinear_jacobian(zx, zy, 1e-4);
  if (j0.size() > 0 && j0.cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("HyperbolicSystem: dF(0,0) != 0");
}

void HyperbolicSystem::nonlinear(const VecR& x, const VecR& y, VecR& f,
                                 VecR& g) const {
  if (f_) {
    f_(x, y, f, g);
  } else {
    f = VecR::Zero(s());
    g = VecR::Zero(u());
  }
}

void HyperbolicSystem::field(const VecR& x, const VecR& y, VecR& dx,
                             VecR& dy) const {
  VecR f(s()), g(u());
  nonlinear(x, y, f, g);
  dx = lminus_ * x + f;
  dy = lplus_ * y + g;
}

MatR HyperbolicSystem::nonlinear_jacobian(const VecR& x, const VecR& y,
                                          double h) const {
  const int d = s() + u();
  if (jac_) return jac_(x, y);
  MatR j(d, d);
  VecR fp(s()), gp(u()), fm(s()), gm(u());
  for (int c = 0; c < d; ++c) {
    VecR xp = x, yp = y, xm = x, ym = y;
    if (c < s()) {
      xp(c) += h;
      xm(c) -= h;
    } else {
      yp(c - s()) += h;
      ym(c - s()) -= h;
    }
    nonlinear(xp, yp, fp, gp);
    nonlinear(xm, ym, fm, gm);
    for (int r = 0; r < s(); ++r) j(r, c) = (fp(r) - fm(r)) / (2 * h);
    for (int r = 0; r < u(); ++r) j(s() + r, c) = (gp(r) - gm(r)) / (2 * h);
  }
  return j;
}

HyperbolicSystem HyperbolicSystem::linear_diagonal(VecR s_rates, VecR u_rates) {
  MatR lm = (-s_rates).asDiagonal();
  MatR lp = u_rates.asDiagonal();
  return HyperbolicSystem(std::move(lm), std::move(lp), nullptr);
}

HyperbolicSystem HyperbolicSystem::cubic_straightened() {
  MatR lm(1, 1), lp(1, 1);
  lm << -1.0;
  lp << 1.0;
  NonlinearPart f = [](const VecR& x, const VecR& y, VecR& fo, VecR& go) {
    fo.resize(1);
    go.resize(1);
    fo(0) = x(0) * y(0) * y(0);
    go(0) = -y(0) * x(0) * x(0);
  };
  NonlinearJacobian jac = [](const VecR& x, const VecR& y) {
    MatR j(2, 2);
    j << y(0) * y(0), 2 * x(0) * y(0), -2 * x(0) * y(0), -x(0) * x(0);
    return j;
  };
  return HyperbolicSystem(std::move(lm), std::move(lp), std::move(f),
                          std::move(jac));
}

HyperbolicSystem HyperbolicSystem::shear_counterexample() {
  MatR lm(0, 0);
  MatR lp(2, 2);
  lp << 1.0, 2.0, 0.0, 1.0;
  return HyperbolicSystem(std::move(lm), std::move(lp), nullptr);
}

// ============================================================================
// Derivative budget
// ============================================================================

namespace {

// Grid over the max-of-Euclidean-norms region { |x|<=eps, |y|<=eps }: cube
// grid with each block rescaled onto its sphere when it pokes outside, so
// boundary extremes are sampled.
std::vector<std::pair<VecR, VecR>> region_grid(int s, int u, double eps,
                                               int grid) {
  const int d = s + u;
  std::vector<std::pair<VecR, VecR>> pts;
  std::vector<int> idx(d, 0);
  const int npts = grid < 2 ? 1 : grid;
  while (true) {
    VecR z(d);
    for (int c = 0; c < d; ++c)
      z(c) = npts == 1 ? 0.0 : -eps + 2.0 * eps * idx[c] / (npts - 1);
    VecR x = z.head(s), y = z.tail(u);
    if (x.size() && x.norm() > eps) x *= eps / x.norm();
    if (y.size() && y.norm() > eps) y *= eps / y.norm();
    pts.emplace_back(std::move(x), std::move(y));
    int c = 0;
    for (; c < d; ++c) {
      if (++idx[c] < npts) break;
      idx[c] = 0;
    }
    if (c == d) break;
    if (d == 0) break;
  }
  if (d == 0) pts.emplace_back(VecR(0), VecR(0));
  return pts;
}

}  // namespace

double delta_estimate(const HyperbolicSystem& sys, double eps, int k,
                      int grid_per_axis) {
  if (k < 0 || k > 2)
    throw std::invalid_argument("delta_estimate: k must be 0, 1 or 2");
  const int s = sys.s(), u = sys.u(), d = s + u;
  const double h1 = 1e-5, h2 = 1e-4;

  auto evalF = [&](const VecR& z) {
    VecR f(s), g(u);
    sys.nonlinear(z.head(s), z.tail(u), f, g);
    VecR out(d);
    out.head(s) = f;
    out.tail(u) = g;
    return out;
  };

  double sup = 0.0;
  for (const auto& [x, y] : region_grid(s, u, eps, grid_per_axis)) {
    VecR z(d);
    z.head(s) = x;
    z.tail(u) = y;
    double sum = evalF(z).norm();  // |m| = 0
    if (k >= 1) {
      MatR j;
      if (sys.has_jacobian()) {
        j = sys.nonlinear_jacobian(z.head(s), z.tail(u));
      } else {
        j.resize(d, d);
        for (int c = 0; c < d; ++c) {
          VecR zp = z, zm = z;
          zp(c) += h1;
          zm(c) -= h1;
          j.col(c) = (evalF(zp) - evalF(zm)) / (2 * h1);
        }
      }
      for (int c = 0; c < d; ++c) sum += j.col(c).norm();
      if (k >= 2) {
        for (int a = 0; a < d; ++a)
          for (int b = a; b < d; ++b) {
            VecR der(d);
            if (sys.has_jacobian()) {
              VecR zp = z, zm = z;
              zp(a) += h2;
              zm(a) -= h2;
              der = (sys.nonlinear_jacobian(zp.head(s), zp.tail(u)).col(b) -
                     sys.nonlinear_jacobian(zm.head(s), zm.tail(u)).col(b)) /
                    (2 * h2);
            } else if (a == b) {
              VecR zp = z, zm = z;
              zp(a) += h2;
              zm(a) -= h2;
              der = (evalF(zp) - 2 * evalF(z) + evalF(zm)) / (h2 * h2);
            } else {
              VecR zpp = z, zpm = z, zmp = z, zmm = z;
              zpp(a) += h2;
              zpp(b) += h2;
              zpm(a) += h2;
              zpm(b) -= h2;
              zmp(a) -= h2;
              zmp(b) += h2;
              zmm(a) -= h2;
              zmm(b) -= h2;
              der = (evalF(zpp) - evalF(zpm) - evalF(zmp) + evalF(zmm)) /
                    (4 * h2 * h2);
            }
            sum += der.norm();
          }
      }
    }
    sup = std::max(sup, sum);
  }
  return sup;
}

DecayRates decay_rates(const HyperbolicSystem& sys, double eps) {
  DecayRates r;
  const double slowest = std::min(sys.gaps().lambda1, sys.gaps().mu1);
  r.alpha = slowest * (1.0 - 1e-3);
  r.delta = delta_estimate(sys, 2.0 * eps, 1);
  return r;
}

// ============================================================================
// Trajectories
// ============================================================================

namespace {

// 4-point Lagrange weights at fractional position s in [0, 3] over nodes
// 0..3.
void lagrange4(double sfrac, double w[4]) {
  const double n0 = 0, n1 = 1, n2 = 2, n3 = 3;
  w[0] = (sfrac - n1) * (sfrac - n2) * (sfrac - n3) /
         ((n0 - n1) * (n0 - n2) * (n0 - n3));
  w[1] = (sfrac - n0) * (sfrac - n2) * (sfrac - n3) /
         ((n1 - n0) * (n1 - n2) * (n1 - n3));
  w[2] = (sfrac - n0) * (sfrac - n1) * (sfrac - n3) /
         ((n2 - n0) * (n2 - n1) * (n2 - n3));
  w[3] = (sfrac - n0) * (sfrac - n1) * (sfrac - n2) /
         ((n3 - n0) * (n3 - n1) * (n3 - n2));
}

}  // namespace

void Trajectory::state_at(double t, VecR& x_out, VecR& y_out) const {
  const int n = size();
  if (n == 0) throw std::invalid_argument("Trajectory::state_at: empty");
  if (n == 1) {
    x_out = x[0];
    y_out = y[0];
    return;
  }
  const double t0 = times(0), h = times(1) - times(0);
  double pos = (t - t0) / h;
  pos = std::clamp(pos, 0.0, double(n - 1));
  int base = static_cast<int>(std::floor(pos)) - 1;
  base = std::clamp(base, 0, n - 4 >= 0 ? n - 4 : 0);
  const int m = std::min(4, n);
  if (m < 4) {
    // Degenerate short grids: linear interpolation.
    int j = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 2);
    const double w = pos - j;
    x_out = (1 - w) * x[j] + w * x[j + 1];
    y_out = (1 - w) * y[j] + w * y[j + 1];
    return;
  }
  double w[4];
  lagrange4(pos - base, w);
  x_out = w[0] * x[base] + w[1] * x[base + 1] + w[2] * x[base + 2] +
          w[3] * x[base + 3];
  y_out = w[0] * y[base] + w[1] * y[base + 1] + w[2] * y[base + 2] +
          w[3] * y[base + 3];
}

namespace {

void rk4_step(const HyperbolicSystem& sys, VecR& x, VecR& y, double h) {
  VecR k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
  sys.field(x, y, k1x, k1y);
  sys.field(x + 0.5 * h * k1x, y + 0.5 * h * k1y, k2x, k2y);
  sys.field(x + 0.5 * h * k2x, y + 0.5 * h * k2y, k3x, k3y);
  sys.field(x + h * k3x, y + h * k3y, k4x, k4y);
  x += (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
  y += (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y);
}

}  // namespace

Trajectory solve_ivp(const HyperbolicSystem& sys, const VecR& x0,
                     const VecR& y0, double t_end, double dt) {
  if (x0.size() != sys.s() || y0.size() != sys.u())
    throw std::invalid_argument("solve_ivp: state size mismatch");
  if (t_end < 0 || dt <= 0) throw std::invalid_argument("solve_ivp: times");
  const int n_steps = std::max(1, static_cast<int>(std::ceil(t_end / dt)));
  const double h = t_end / n_steps;
  Trajectory traj;
  traj.times.resize(n_steps + 1);
  traj.x.reserve(n_steps + 1);
  traj.y.reserve(n_steps + 1);
  VecR x = x0, y = y0;
  traj.times(0) = 0.0;
  traj.x.push_back(x);
  traj.y.push_back(y);
  for (int i = 1; i <= n_steps; ++i) {
    rk4_step(sys, x, y, h);
    if (pair_norm(x, y) > 1e6)
      throw Blowup("solve_ivp: norm exceeded 1e6 at t=" +
                   std::to_string(i * h));
    traj.times(i) = i * h;
    traj.x.push_back(x);
    traj.y.push_back(y);
  }
  return traj;
}

// ============================================================================
// Boundary value solver
// ============================================================================

BvpSolution solve_bvp(const HyperbolicSystem& sys, const BvpProblem& problem,
                      double tol, int max_iter) {
  const int s = sys.s(), u = sys.u();
  if (problem.x0.size() != s || problem.y1.size() != u)
    throw std::invalid_argument("solve_bvp: data size mismatch");
  if (problem.tau < 0) throw std::invalid_argument("solve_bvp: tau < 0");

  BvpSolution sol;
  sol.stats.hypothesis_satisfied = true;
  if (problem.epsilon > 0) {
    const double delta1 = delta_estimate(sys, 2.0 * problem.epsilon, 1);
    const double slowest = std::min(sys.gaps().lambda1, sys.gaps().mu1);
    // Contraction hypothesis; when it fails we warn through the stats and
    // attempt the sweep anyway.
    sol.stats.hypothesis_satisfied = delta1 < slowest;
  }

  const double data_norm = pair_norm(problem.x0, problem.y1);

  if (problem.tau == 0.0) {
    sol.traj.times.resize(1);
    sol.traj.times(0) = 0.0;
    sol.traj.x.push_back(problem.x0);
    sol.traj.y.push_back(problem.y1);
    sol.x1 = problem.x0;
    sol.y0 = problem.y1;
    sol.stats.sup_norm = data_norm;
    sol.stats.bound_satisfied = true;
    return sol;
  }

  const int nodes =
      std::max(33, static_cast<int>(std::ceil(200.0 * problem.tau)) + 1);
  const int n = nodes;
  const double h = problem.tau / (n - 1);

  const MatR em_h = expm(MatR(h * sys.lminus()));
  const MatR em_h2 = expm(MatR(0.5 * h * sys.lminus()));
  const MatR ep_mh = expm(MatR(-h * sys.lplus()));
  const MatR ep_mh2 = expm(MatR(-0.5 * h * sys.lplus()));

  // Zeroth iterate: pure linear propagation from each boundary.
  std::vector<VecR> X(n), Y(n);
  X[0] = problem.x0;
  for (int j = 1; j < n; ++j) X[j] = em_h * X[j - 1];
  Y[n - 1] = problem.y1;
  for (int j = n - 2; j >= 0; --j) Y[j] = ep_mh * Y[j + 1];

  std::vector<VecR> f(n), g(n), fm(n - 1), gm(n - 1);
  std::vector<VecR> Xn(n), Yn(n);
  double update = 0.0;
  int iter = 0;
  bool converged = false;

  auto interp_mid = [&](const std::vector<VecR>& v, int j) -> VecR {
    // Value at the midpoint of [j, j+1] from the 4-node stencil around it.
    int base = std::clamp(j - 1, 0, n - 4 >= 0 ? n - 4 : 0);
    if (n < 4) return 0.5 * (v[j] + v[j + 1]);
    double w[4];
    lagrange4((j + 0.5) - base, w);
    return (w[0] * v[base] + w[1] * v[base + 1] + w[2] * v[base + 2] +
            w[3] * v[base + 3])
        .eval();
  };

  for (iter = 1; iter <= max_iter; ++iter) {
    for (int j = 0; j < n; ++j) {
      f[j].resize(s);
      g[j].resize(u);
      sys.nonlinear(X[j], Y[j], f[j], g[j]);
    }
    for (int j = 0; j + 1 < n; ++j) {
      const VecR xm = interp_mid(X, j), ym = interp_mid(Y, j);
      fm[j].resize(s);
      gm[j].resize(u);
      sys.nonlinear(xm, ym, fm[j], gm[j]);
    }

    // Forward sweep for x: variation of constants with per-step Simpson.
    Xn[0] = problem.x0;
    for (int j = 0; j + 1 < n; ++j)
      Xn[j + 1] = em_h * Xn[j] +
                  (h / 6.0) * (em_h * f[j] + 4.0 * (em_h2 * fm[j]) + f[j + 1]);
    // Backward sweep for y.
    Yn[n - 1] = problem.y1;
    for (int j = n - 2; j >= 0; --j)
      Yn[j] = ep_mh * Yn[j + 1] -
              (h / 6.0) * (g[j] + 4.0 * (ep_mh2 * gm[j]) + ep_mh * g[j + 1]);

    update = 0.0;
    for (int j = 0; j < n; ++j) {
      update = std::max(update, pair_norm(Xn[j] - X[j], Yn[j] - Y[j]));
    }
    X.swap(Xn);
    Y.swap(Yn);
    if (update < tol) {
      converged = true;
      break;
    }
    double supn = 0.0;
    for (int j = 0; j < n; ++j) supn = std::max(supn, pair_norm(X[j], Y[j]));
    if (supn > 1e6) throw Blowup("solve_bvp: iterate norm exceeded 1e6");
  }
  if (!converged)
    throw NoConvergence("solve_bvp: no contraction after " +
                        std::to_string(max_iter) + " sweeps, last update " +
                        std::to_string(update));

  sol.traj.times.resize(n);
  for (int j = 0; j < n; ++j) sol.traj.times(j) = j * h;
  sol.traj.x = X;
  sol.traj.y = Y;
  sol.x1 = X[n - 1];
  sol.y0 = Y[0];
  sol.stats.iterations = iter;
  sol.stats.final_update = update;
  double supn = 0.0;
  for (int j = 0; j < n; ++j) supn = std::max(supn, pair_norm(X[j], Y[j]));
  sol.stats.sup_norm = supn;
  sol.stats.bound_satisfied = supn <= 2.0 * data_norm + 1e-9;
  return sol;
}

EndpointMaps endpoint_maps(const HyperbolicSystem& sys, const VecR& x0,
                           const VecR& y1, double tau, double epsilon) {
  BvpProblem p;
  p.x0 = x0;
  p.y1 = y1;
  p.tau = tau;
  p.epsilon = epsilon;
  const auto sol = solve_bvp(sys, p);
  return EndpointMaps{sol.x1, sol.y0};
}

// ============================================================================
// Dulac map and cube geometry
// ============================================================================

DulacResult dulac_map(const HyperbolicSystem& sys, const CubeSpec& cube,
                      const VecR& x0, const VecR& y0, double dt) {
  const double eps = cube.epsilon;
  if (eps <= 0) throw std::invalid_argument("dulac_map: epsilon");
  if (x0.size() != sys.s() || y0.size() != sys.u())
    throw std::invalid_argument("dulac_map: state size mismatch");
  const double xn = x0.size() ? x0.norm() : 0.0;
  const double yn = y0.size() ? y0.norm() : 0.0;
  if (std::abs(xn - eps) > 1e-9)
    throw std::invalid_argument("dulac_map: start not on the entry wall");
  if (yn > eps + 1e-12)
    throw std::invalid_argument("dulac_map: start outside the cube");
  if (yn < 1e-14)
    throw OnStableManifold("dulac_map: start has y = 0, no exit");
  if (yn >= eps - 1e-12)
    return DulacResult{x0, y0, 0.0, xn};  // corner, identity transit

  VecR x = x0, y = y0;
  double t = 0.0;
  double max_x = xn;
  const long max_steps = 1000000;
  for (long step = 0; step < max_steps; ++step) {
    const VecR px = x, py = y;
    rk4_step(sys, x, y, dt);
    t += dt;
    max_x = std::max(max_x, x.size() ? x.norm() : 0.0);
    if ((y.size() ? y.norm() : 0.0) >= eps) {
      // Bisection on the step size from the pre-event node; the event time
      // is localized to 1e-10.
      double lo = 0.0, hi = dt;
      VecR bx = px, by = py;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        VecR cx = px, cy = py;
        rk4_step(sys, cx, cy, mid);
        if ((cy.size() ? cy.norm() : 0.0) >= eps) {
          hi = mid;
        } else {
          lo = mid;
          bx = cx;
          by = cy;
        }
      }
      VecR ex = px, ey = py;
      rk4_step(sys, ex, ey, hi);
      max_x = std::max(max_x, ex.size() ? ex.norm() : 0.0);
      return DulacResult{ex, ey, t - dt + hi, max_x};
    }
    if (pair_norm(x, y) > 1e3 * eps)
      throw NumericalBreakdown("dulac_map: trajectory left the cube scale");
  }
  throw NumericalBreakdown("dulac_map: no exit within the step budget");
}

// ============================================================================
// Transversality scan
// ============================================================================

namespace {

// Parametrized wall point: sphere factor of radius eps in dimension nd from
// angles, ball factor elsewhere.
VecR sphere_point(int nd, double eps, const std::vector<double>& ang) {
  VecR p(nd);
  if (nd == 1) {
    p(0) = ang[0] < kPi ? eps : -eps;  // two-point sphere, angle as a switch
  } else if (nd == 2) {
    p(0) = eps * std::cos(ang[0]);
    p(1) = eps * std::sin(ang[0]);
  } else if (nd == 3) {
    p(0) = eps * std::cos(ang[0]);
    p(1) = eps * std::sin(ang[0]) * std::cos(ang[1]);
    p(2) = eps * std::sin(ang[0]) * std::sin(ang[1]);
  } else {
    throw UnsupportedDimension("transversality_scan: sphere dimension > 3");
  }
  return p;
}

struct WallGeometry {
  int sphere_dim = 0;  // dimension of the sphere factor carrier
  int ball_dim = 0;
  double eps = 0.0;
  bool entry = false;  // true: sphere in x, ball in y

  int params() const {
    return (sphere_dim == 1 ? 1 : sphere_dim - 1) + ball_dim;
  }

  void split(const HyperbolicSystem& sys, const std::vector<double>& w, VecR& x,
             VecR& y) const {
    const int na = sphere_dim == 1 ? 1 : sphere_dim - 1;
    std::vector<double> ang(w.begin(), w.begin() + na);
    VecR sp = sphere_point(sphere_dim, eps, ang);
    VecR bp(ball_dim);
    for (int i = 0; i < ball_dim; ++i) bp(i) = w[na + i];
    if (entry) {
      x = sp;
      y = bp;
    } else {
      x = bp;
      y = sp;
    }
    (void)sys;
  }
};

double wall_value(const HyperbolicSystem& sys, const WallGeometry& geo,
                  const std::vector<double>& w) {
  VecR x, y;
  geo.split(sys, w, x, y);
  VecR dx, dy;
  sys.field(x, y, dx, dy);
  return geo.entry ? dx.dot(x) : dy.dot(y);
}

// Golden-section minimization of |h| along coordinate c.
void golden_refine(const HyperbolicSystem& sys, const WallGeometry& geo,
                   std::vector<double>& w, int c, double lo, double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  auto val = [&](double v) {
    std::vector<double> ww = w;
    ww[c] = v;
    return std::abs(wall_value(sys, geo, ww));
  };
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 90 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = val(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = val(x2);
    }
  }
  w[c] = 0.5 * (a + b);
}

void bisect_refine(const HyperbolicSystem& sys, const WallGeometry& geo,
                   std::vector<double>& w, int c, double lo, double hi) {
  auto val = [&](double v) {
    std::vector<double> ww = w;
    ww[c] = v;
    return wall_value(sys, geo, ww);
  };
  double flo = val(lo);
  for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = val(mid);
    if ((flo <= 0) == (fmid <= 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  w[c] = 0.5 * (lo + hi);
}

void scan_wall(const HyperbolicSystem& sys, const WallGeometry& geo, int grid,
               double accept, std::vector<Tangency>& out, double& min_abs) {
  const int np = geo.params();
  const int na = geo.sphere_dim == 1 ? 1 : geo.sphere_dim - 1;

  // Per-coordinate 1-d grids. Angle coordinates cover their period; ball
  // coordinates cover [-eps, eps].
  std::vector<std::vector<double>> axes(np);
  for (int c = 0; c < np; ++c) {
    const bool angle = c < na;
    const bool full_circle =
        angle && (geo.sphere_dim == 1 || geo.sphere_dim == 2 ||
                  (geo.sphere_dim == 3 && c == 1));
    double lo = full_circle ? 0.0 : (angle ? 0.0 : -geo.eps);
    double hi = full_circle ? 2 * kPi : (angle ? kPi : geo.eps);
    const int count = (geo.sphere_dim == 1 && angle) ? 2 : grid;
    axes[c].resize(count);
    for (int i = 0; i < count; ++i)
      axes[c][i] = lo + (hi - lo) * (count == 1 ? 0.5 : double(i) / (count - 1));
  }

  // Iterate the product grid; along each coordinate line, bracket sign
  // changes and refine interior minima of |h| (tangencies may touch zero
  // without crossing).
  std::vector<int> idx(np, 0);
  auto point_at = [&](const std::vector<int>& ix) {
    std::vector<double> w(np);
    for (int c = 0; c < np; ++c) w[c] = axes[c][ix[c]];
    return w;
  };

  std::vector<std::vector<double>> candidates;
  while (true) {
    std::vector<double> w = point_at(idx);
    const bool inside_ball =
        geo.ball_dim == 0 ||
        VecR::Map(w.data() + na, geo.ball_dim).norm() <= geo.eps + 1e-12;
    if (inside_ball) {
      const double h0 = wall_value(sys, geo, w);
      min_abs = std::min(min_abs, std::abs(h0));
      for (int c = 0; c < np; ++c) {
        if (idx[c] + 1 >= static_cast<int>(axes[c].size())) continue;
        std::vector<int> nxt = idx;
        ++nxt[c];
        std::vector<double> wn = point_at(nxt);
        const double h1 = wall_value(sys, geo, wn);
        if ((h0 <= 0) != (h1 <= 0)) {
          std::vector<double> wr = w;
          bisect_refine(sys, geo, wr, c, w[c], wn[c]);
          candidates.push_back(wr);
        }
        // Interior minimum of |h| along c.
        if (idx[c] >= 1) {
          std::vector<int> prv = idx;
          --prv[c];
          std::vector<double> wp = point_at(prv);
          const double hp = std::abs(wall_value(sys, geo, wp));
          if (std::abs(h0) <= hp && std::abs(h0) <= std::abs(h1)) {
            std::vector<double> wr = w;
            golden_refine(sys, geo, wr, c, wp[c], wn[c]);
            candidates.push_back(wr);
          }
        }
      }
    }
    int c = 0;
    for (; c < np; ++c) {
      if (++idx[c] < static_cast<int>(axes[c].size())) break;
      idx[c] = 0;
    }
    if (c == np) break;
  }

  // Coordinate-descent polish, then accept small |h|.
  for (auto& w : candidates) {
    for (int round = 0; round < 3; ++round)
      for (int c = 0; c < np; ++c) {
        const double span =
            (c < na ? kPi : geo.eps) / std::max(4, grid);
        golden_refine(sys, geo, w, c, w[c] - span, w[c] + span);
      }
    const double hv = wall_value(sys, geo, w);
    min_abs = std::min(min_abs, std::abs(hv));
    if (std::abs(hv) < accept) {
      VecR x, y;
      geo.split(sys, w, x, y);
      if (geo.ball_dim > 0) {
        const VecR ball = geo.entry ? y : x;
        if (ball.norm() > geo.eps + 1e-9) continue;
      }
      Tangency tan;
      tan.x = x;
      tan.y = y;
      tan.wall = geo.entry ? +1 : -1;
      tan.value = hv;
      bool dup = false;
      for (const auto& prev : out) {
        if (prev.wall == tan.wall && (prev.x - tan.x).norm() < 1e-5 &&
            (prev.y - tan.y).norm() < 1e-5) {
          dup = true;
          break;
        }
      }
      if (!dup) out.push_back(std::move(tan));
    }
  }
}

}  // namespace

ScanResult transversality_scan(const HyperbolicSystem& sys, double eps,
                               int grid) {
  if (eps <= 0) throw std::invalid_argument("transversality_scan: epsilon");
  ScanResult res;
  res.min_abs_entry = std::numeric_limits<double>::infinity();
  res.min_abs_exit = std::numeric_limits<double>::infinity();
  const double accept = 1e-8;

  if (sys.s() >= 1) {
    WallGeometry geo;
    geo.sphere_dim = sys.s();
    geo.ball_dim = sys.u();
    geo.eps = eps;
    geo.entry = true;
    scan_wall(sys, geo, grid, accept, res.tangencies, res.min_abs_entry);
  }
  if (sys.u() >= 1) {
    WallGeometry geo;
    geo.sphere_dim = sys.u();
    geo.ball_dim = sys.s();
    geo.eps = eps;
    geo.entry = false;
    scan_wall(sys, geo, grid, accept, res.tangencies, res.min_abs_exit);
  }
  return res;
}

// ============================================================================
// Fundamental neighborhoods
// ============================================================================

MembershipResult fundamental_membership(const HyperbolicSystem& sys,
                                        const CubeSpec& cube, const VecR& x0,
                                        const VecR& y0, double dt) {
  const double eps = cube.epsilon;
  MembershipResult res;
  const double xn = x0.size() ? x0.norm() : 0.0;
  const double yn = y0.size() ? y0.norm() : 0.0;
  if (xn > eps + 1e-12 || yn > eps + 1e-12)
    throw std::invalid_argument("fundamental_membership: point outside cube");

  // Local stable/unstable set of the straightened system.
  if (xn * yn < 1e-10) {
    res.member = true;
    return res;
  }

  VecR x = x0, y = y0;
  const long max_steps = 1000000;
  for (long step = 0; step < max_steps; ++step) {
    const VecR px = x, py = y;
    rk4_step(sys, x, y, dt);
    if (x.size() && x.norm() > eps * (1.0 + 1e-12)) {
      res.exits_upstream = true;
      res.member = false;
      return res;
    }
    if (y.size() && y.norm() >= eps) {
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        VecR cx = px, cy = py;
        rk4_step(sys, cx, cy, mid);
        if (cy.norm() >= eps)
          hi = mid;
        else
          lo = mid;
      }
      VecR ex = px, ey = py;
      rk4_step(sys, ex, ey, hi);
      res.exit_gate = ex.size() ? ex.norm() : 0.0;
      res.member = res.exit_gate < cube.gamma;
      return res;
    }
  }
  throw NumericalBreakdown("fundamental_membership: no exit in step budget");
}

// ============================================================================
// Graph closure probe
// ============================================================================

namespace {

void affine_fit(const std::vector<double>& ts, const std::vector<double>& vs,
                double& slope, double& max_resid) {
  const int n = static_cast<int>(ts.size());
  double st = 0, sv = 0, stt = 0, stv = 0;
  for (int i = 0; i < n; ++i) {
    st += ts[i];
    sv += vs[i];
    stt += ts[i] * ts[i];
    stv += ts[i] * vs[i];
  }
  const double denom = n * stt - st * st;
  slope = (n * stv - st * sv) / denom;
  const double intercept = (sv - slope * st) / n;
  for (int i = 0; i < n; ++i)
    max_resid =
        std::max(max_resid, std::abs(vs[i] - slope * ts[i] - intercept));
}

}  // namespace

GraphProbe graph_closure_probe(const HyperbolicSystem& sys, double eps,
                               int grid, const std::vector<double>& taus) {
  if (sys.s() != 1 || sys.u() != 1)
    throw std::invalid_argument("graph_closure_probe: scalar systems only");
  if (taus.size() < 2)
    throw std::invalid_argument("graph_closure_probe: need >= 2 tau values");

  GraphProbe probe;
  probe.slope_x = probe.slope_y = probe.slope_dx = probe.slope_dy =
      -std::numeric_limits<double>::infinity();
  const double hfd = 1e-5 * eps;

  auto endpoints = [&](double x0v, double y1v, double tau) {
    BvpProblem p;
    p.x0 = VecR::Constant(1, x0v);
    p.y1 = VecR::Constant(1, y1v);
    p.tau = tau;
    p.epsilon = eps;
    const auto sol = solve_bvp(sys, p);
    return std::pair<double, double>(sol.x1(0), sol.y0(0));
  };

  for (int ix = 1; ix <= grid; ++ix)
    for (int iy = 1; iy <= grid; ++iy) {
      const double x0v = eps * ix / grid;
      const double y1v = eps * iy / grid;
      std::vector<double> lx, ly, ldx, ldy, ts;
      for (double tau : taus) {
        const auto [x1, y0] = endpoints(x0v, y1v, tau);
        const auto [x1p, y0p] = endpoints(x0v + hfd, y1v, tau);
        const auto [x1m, y0m] = endpoints(x0v - hfd, y1v, tau);
        const auto [x1q, y0q] = endpoints(x0v, y1v + hfd, tau);
        const auto [x1r, y0r] = endpoints(x0v, y1v - hfd, tau);
        ProbeRow row;
        row.x0 = x0v;
        row.y1 = y1v;
        row.tau = tau;
        row.abs_x1 = std::abs(x1);
        row.abs_y0 = std::abs(y0);
        row.dx1_dx0 = (x1p - x1m) / (2 * hfd);
        row.dy0_dy1 = (y0q - y0r) / (2 * hfd);
        probe.rows.push_back(row);
        ts.push_back(tau);
        lx.push_back(std::log(row.abs_x1));
        ly.push_back(std::log(row.abs_y0));
        ldx.push_back(std::log(std::abs(row.dx1_dx0)));
        ldy.push_back(std::log(std::abs(row.dy0_dy1)));
      }
      double slope = 0;
      affine_fit(ts, lx, slope, probe.max_residual);
      probe.slope_x = std::max(probe.slope_x, slope);
      affine_fit(ts, ly, slope, probe.max_residual);
      probe.slope_y = std::max(probe.slope_y, slope);
      affine_fit(ts, ldx, slope, probe.max_residual);
      probe.slope_dx = std::max(probe.slope_dx, slope);
      affine_fit(ts, ldy, slope, probe.max_residual);
      probe.slope_dy = std::max(probe.slope_dy, slope);
    }
  return probe;
}

}  // namespace mcl::shilnikov
