#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/linalg.hpp"

namespace mcl::shilnikov {

// Throughout, the state norm is |x,y| = max(|x|_2, |y|_2) with Euclidean
// norms on the stable and unstable components separately.
double pair_norm(const VecR& x, const VecR& y);

// Nonlinear part evaluator: (x, y) -> (f, g), sizes (s, u).
using NonlinearPart =
    std::function<void(const VecR& x, const VecR& y, VecR& f, VecR& g)>;
// Optional analytic Jacobian d(f,g)/d(x,y), (s+u) x (s+u).
using NonlinearJacobian = std::function<MatR(const VecR& x, const VecR& y)>;

struct SpectralGaps {
  double lambda1 = 0.0;  // slowest contraction rate of L-
  double mu1 = 0.0;      // slowest expansion rate of L+
};

// x' = L- x + f(x,y), y' = L+ y + g(x,y), with the equilibrium at the origin
// straightened to second order: f, g and their first derivatives vanish at 0
// (checked numerically at 1e-8 on construction).
class HyperbolicSystem {
 public:
  HyperbolicSystem(MatR lminus, MatR lplus, NonlinearPart f,
                   NonlinearJacobian jac = nullptr);

  int s() const { return static_cast<int>(lminus_.rows()); }
  int u() const { return static_cast<int>(lplus_.rows()); }
  const MatR& lminus() const { return lminus_; }
  const MatR& lplus() const { return lplus_; }
  const SpectralGaps& gaps() const { return gaps_; }
  bool symmetric() const { return symmetric_; }
  bool has_jacobian() const { return static_cast<bool>(jac_); }

  // Nonlinear part and full vector field.
  void nonlinear(const VecR& x, const VecR& y, VecR& f, VecR& g) const;
  void field(const VecR& x, const VecR& y, VecR& dx, VecR& dy) const;
  MatR nonlinear_jacobian(const VecR& x, const VecR& y, double h = 1e-5) const;

  // Built-in example systems.
  // Pure linear system with L- = diag(-s_rates), L+ = diag(u_rates).
  static HyperbolicSystem linear_diagonal(VecR s_rates, VecR u_rates);
  // Scalar saddle with f = x y^2, g = -y x^2 (straightened, symmetric).
  static HyperbolicSystem cubic_straightened();
  // s = 0, u = 2, L+ = [[1,2],[0,1]]: expanding but not symmetric, the wall
  // inner product (y1+y2)^2 has tangency rays on the anti-diagonal.
  static HyperbolicSystem shear_counterexample();

 private:
  MatR lminus_, lplus_;
  NonlinearPart f_;
  NonlinearJacobian jac_;
  SpectralGaps gaps_;
  bool symmetric_ = false;
};

// Slowest rates; NotHyperbolic if some eigenvalue of L-/L+ has real part on
// the wrong side (within 1e-10 of the axis counts as failing).
SpectralGaps spectral_gaps(const MatR& lminus, const MatR& lplus);

// sup over |x,y| <= eps of the sum over multi-indices |m| <= k of |d^m F|,
// sampled on a grid_per_axis^(s+u) grid of the cube (corners included),
// derivatives by central differences unless the analytic Jacobian covers
// them. k in {0, 1, 2}.
double delta_estimate(const HyperbolicSystem& sys, double eps, int k,
                      int grid_per_axis = 9);

// Decay window for the endpoint-map estimates: alpha just under
// min(lambda1, mu1), delta = delta^1 over the doubled cube.
struct DecayRates {
  double alpha = 0.0;
  double delta = 0.0;
  double rate() const { return alpha - delta; }
};
DecayRates decay_rates(const HyperbolicSystem& sys, double eps);

struct Trajectory {
  VecR times;
  std::vector<VecR> x, y;

  int size() const { return static_cast<int>(times.size()); }
  // Cubic (4-point Lagrange) interpolation on the uniform grid.
  void state_at(double t, VecR& x_out, VecR& y_out) const;
};

// Fixed-step RK4 for the initial value problem. Blowup past norm 1e6.
Trajectory solve_ivp(const HyperbolicSystem& sys, const VecR& x0,
                     const VecR& y0, double t_end, double dt = 1e-3);

struct BvpProblem {
  VecR x0;  // stable component at t = 0
  VecR y1;  // unstable component at t = tau
  double tau = 0.0;
  double epsilon = 0.0;  // cube radius for the contraction precheck
};

struct SolverStats {
  int iterations = 0;
  double final_update = 0.0;       // sup-norm of the last Picard update
  double sup_norm = 0.0;           // sup_t |x(t), y(t)|
  bool hypothesis_satisfied = true; // delta^1_{2eps} < min(lambda1, mu1)
  bool bound_satisfied = true;      // sup_norm <= 2 |x0, y1| (+ 1e-9 slack)
};

struct BvpSolution {
  Trajectory traj;
  VecR x1;  // x(tau)
  VecR y0;  // y(0)
  SolverStats stats;
};

// Picard iteration on the boundary-value integral equations, uniform grid
// with at least 200 nodes per unit time. When the contraction hypothesis
// fails the solve is still attempted and stats.hypothesis_satisfied records
// the warning. NoConvergence after max_iter sweeps.
BvpSolution solve_bvp(const HyperbolicSystem& sys, const BvpProblem& problem,
                      double tol = 1e-10, int max_iter = 200);

struct EndpointMaps {
  VecR x1, y0;
};
EndpointMaps endpoint_maps(const HyperbolicSystem& sys, const VecR& x0,
                           const VecR& y1, double tau, double epsilon);

struct CubeSpec {
  double epsilon = 0.0;
  double gamma = 0.0;  // entry-gate radius on the stable wall
};

struct DulacResult {
  VecR x_exit, y_exit;
  double transit_time = 0.0;
  double max_x_norm = 0.0;  // sup of |x| along the transit (convexity check)
};

// Transit map from the entry wall |x| = eps to the exit wall |y| = eps by
// dense RK4 sampling and bisection on the exit event (time localized to
// 1e-10). Corner starts (|y0| = eps) return immediately with time 0;
// y0 = 0 throws OnStableManifold.
DulacResult dulac_map(const HyperbolicSystem& sys, const CubeSpec& cube,
                      const VecR& x0, const VecR& y0, double dt = 1e-3);

struct Tangency {
  VecR x, y;
  int wall = 0;      // +1 entry wall |x| = eps, -1 exit wall |y| = eps
  double value = 0.0;  // wall inner product at the located point
};

struct ScanResult {
  std::vector<Tangency> tangencies;
  double min_abs_entry = 0.0;  // min |<X1, x>| seen on the entry wall
  double min_abs_exit = 0.0;   // min |<X2, y>| seen on the exit wall
};

// Samples the wall inner products <x' , x> on |x| = eps and <y', y> on
// |y| = eps; refines both sign changes and interior minima of the absolute
// value (tangencies may touch zero without crossing). Points with
// |inner product| < 1e-8 after refinement are reported.
ScanResult transversality_scan(const HyperbolicSystem& sys, double eps,
                               int grid = 64);

struct MembershipResult {
  bool member = false;
  bool exits_upstream = false;  // trajectory left through the entry wall
  double exit_gate = 0.0;       // |x| at the exit-wall crossing, if any
};

// Membership in the fundamental neighborhood V_gamma^eps: points of the
// local stable/unstable set (|x|*|y| below tolerance) are members; otherwise
// the forward trajectory must exit the cube through |y| = eps with gate
// coordinate |x| < gamma.
MembershipResult fundamental_membership(const HyperbolicSystem& sys,
                                        const CubeSpec& cube, const VecR& x0,
                                        const VecR& y0, double dt = 1e-3);

struct ProbeRow {
  double x0 = 0.0, y1 = 0.0, tau = 0.0;
  double abs_x1 = 0.0, abs_y0 = 0.0;
  double dx1_dx0 = 0.0, dy0_dy1 = 0.0;
};

struct GraphProbe {
  std::vector<ProbeRow> rows;
  double slope_x = 0.0;        // fitted slope of log|x1*| against tau
  double slope_y = 0.0;        // fitted slope of log|y0*| against tau
  double slope_dx = 0.0;       // fitted slope of log|dx1/dx0|
  double slope_dy = 0.0;
  double max_residual = 0.0;   // worst deviation from the affine fits
};

// Endpoint decay table over a (x0, y1) grid and a ladder of tau values;
// scalar systems only. Derivatives by central differences of repeated
// solves.
GraphProbe graph_closure_probe(const HyperbolicSystem& sys, double eps,
                               int grid, const std::vector<double>& taus);

}  // namespace mcl::shilnikov
