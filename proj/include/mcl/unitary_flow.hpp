#pragma once

#include "mcl/spectral.hpp"

namespace mcl::uflow {

// Gradient flow of U |-> Re tr(A U) on U(n), with A positive diagonal in the
// flag basis. Default coefficients a_i = i give pairwise-distinct sums, which
// keeps every Hessian nondegenerate.
struct FlowConfig {
  int n = 0;
  VecR a;              // strictly increasing, positive
  spectral::Flag flag; // basis in which A is diagonal

  static FlowConfig standard(int n);
  FlowConfig(int n_, VecR a_, spectral::Flag flag_);
};

// Objective Re tr(A U).
double f_value(const FlowConfig& cfg, const MatC& u);

// Riemannian gradient A - U A U (tangent to U(n) at U after left trivialization
// it is anti-hermitian times U; we return the ambient representative).
MatC gradient(const FlowConfig& cfg, const MatC& u);

// Time-t flow map. Closed form per unit step,
//   Phi_t(U) = (sinh(tA) + cosh(tA) U)(cosh(tA) + sinh(tA) U)^{-1},
// composed over increments of at most 1.0 so the hyperbolic factors stay
// well conditioned. NumericalBreakdown if a single step is ill conditioned
// beyond 1e12. NotUnitary on bad input.
MatC flow_at(const FlowConfig& cfg, const MatC& u, double t);

struct LimitResult {
  spectral::IndexSet index_set;  // label of the limiting critical point
  double t_reached = 0.0;
  double distance = 0.0;         // Frobenius distance at acceptance
};

// Follows the flow in unit steps until within tol (Frobenius) of one of the
// 2^n critical points; SlowConvergence past the horizon.
LimitResult flow_limit(const FlowConfig& cfg, const MatC& u, double tol = 1e-6,
                       double horizon = 200.0);

}  // namespace mcl::uflow
