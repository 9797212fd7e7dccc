#pragma once

#include <functional>
#include <vector>

#include "mcl/geometry.hpp"

namespace mcl::ocw {

using geometry::ChartPoint;
using geometry::ParamManifold;

// Differential form of fixed degree on a parametrized manifold, held as an
// evaluator on chart points and coordinate tangent vectors. Immutable and
// value-like: safe to evaluate concurrently.
struct FormField {
  int degree = 0;
  std::function<Complex(const ChartPoint&, const std::vector<VecR>&)> eval;

  Complex operator()(const ChartPoint& p, const std::vector<VecR>& tangents) const;
};

// Smooth map from a parametrized manifold into a matrix group, with an
// optional analytic coordinate derivative. Finite differences (central,
// step h) fill in when the derivative is absent.
struct GaugeMap {
  const ParamManifold* domain = nullptr;
  int n = 0;  // target matrix size
  std::function<MatC(const ChartPoint&)> value;
  std::function<MatC(const ChartPoint&, int)> derivative;  // d/du_i, optional
  double h = 1e-5;

  MatC operator()(const ChartPoint& p) const { return value(p); }
  MatC d(const ChartPoint& p, int i) const;  // analytic if given, else FD
};

// ============================================================================
// Pointwise algebra
// ============================================================================

// Alternating trace in the determinant convention (no factorial weights):
// sum over permutations of sgn(s) tr(m_{s(1)} ... m_{s(q)}).
Complex wedge_trace(const std::vector<MatC>& ms);

// Coefficient matrices of omega = g^{-1} dg at p, one per chart direction.
std::vector<MatC> maurer_cartan(const GaugeMap& g, const ChartPoint& p);

// Max Frobenius norm over index pairs of (d omega + omega ^ omega)_{ij},
// the flatness defect of the Maurer-Cartan form; derivative of omega by
// central differences at step h.
double mc_identity_residual(const GaugeMap& g, const ChartPoint& p,
                            double h = 1e-4);

// ============================================================================
// Constants
// ============================================================================

// int_0^1 (t^2 - t)^{k-1} dt by Gauss-Legendre of exact polynomial order.
double beta_integral(int k);

// Exact rational (-1)^{k-1} [(k-1)!]^2 / (2k-1)! represented as a sign and a
// 53-bit-exact numerator/denominator pair.
struct Rational {
  double num = 1.0;
  double den = 1.0;
  int sign = +1;
};

struct FormConstants {
  Complex tc;    // (i/2pi)^k [(k-1)!]^2 / (2k-1)!
  Complex tch;   // (-1)^{k-1} (i/2pi)^k (k-1)! / (2k-1)!
  Rational tc_ratio;   // tc   = (i/2pi)^k * tc_ratio
  Rational tch_ratio;  // tch  = (i/2pi)^k * tch_ratio (sign included)
};
FormConstants form_constants(int k);

// ============================================================================
// Fields
// ============================================================================

// constant * tr wedge^{2k-1}(g^{-1} dg) as a (2k-1)-form field. Domains of
// dimension < 2k-1 yield the zero field.
FormField wedge_power_form(const GaugeMap& g, int k, Complex constant);

// The odd (2k-1)-form tc_k(g) = (i/2pi)^k [(k-1)!]^2/(2k-1)! tr wedge^{2k-1} omega
// pulled back through g. Domains of dimension < 2k-1 yield the zero field.
FormField tc_form(const GaugeMap& g, int k);

// Even characteristic forms of a curvature 2-form given by coefficient data;
// see transgression_general. kind selects Chern character ch_k (i/2pi)^k
// tr(F^k)/k! or Chern class c_k via Newton's identities.
enum class CharClass { ChernCharacter, ChernClass };

// Connection path A_t = (1-t) A0 + t A1 between two connection 1-forms on a
// trivial bundle over the domain manifold, with coefficient evaluators
// (point, direction) -> matrix. q_t is the Gauss-Legendre order of the
// t-integration.
struct ConnectionPath {
  const ParamManifold* domain = nullptr;
  int n = 0;
  std::function<MatC(const ChartPoint&, int)> a0;
  std::function<MatC(const ChartPoint&, int)> a1;
  int q_t = 8;
  double h = 1e-5;  // step for coefficient derivatives
};

// Odd transgression form TP(A0, A1) of degree 2k-1: the dt-component of
// P(F(nabla-tilde)) on [0,1] x B integrated over t. InvalidArity if the
// evaluation arity does not match 2k-1.
FormField transgression_general(const ConnectionPath& path, CharClass kind,
                                int k);

// P(F(nabla)) for the single connection A as a 2k-form field (used to check
// d TP = P(F1) - P(F0)).
FormField char_form(const ParamManifold& domain, int n,
                    const std::function<MatC(const ChartPoint&, int)>& a,
                    CharClass kind, int k, double h = 1e-5);

}  // namespace mcl::ocw
