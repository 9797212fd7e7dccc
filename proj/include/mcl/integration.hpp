#pragma once

#include "mcl/forms.hpp"
#include "mcl/spectral.hpp"

namespace mcl::geometry {

using ocw::FormField;
using ocw::GaugeMap;

// Integral of a top-degree form over all charts, orientation signs applied.
// Product Gauss-Legendre or Monte Carlo, selected by the quadrature spec.
// DegreeMismatch unless field.degree == manifold.dim.
Complex integrate_form(const ParamManifold& manifold, const FormField& field,
                       const QuadratureSpec& quad);

// Integral of tr wedge^{2k-1}(g^{-1} dg) over the unstable set of the k-th
// basic critical point, computed in the standard parametrization (circle
// times projective space, orientation-reversed). k = 1 integrates over the
// circle, k = 2 over circle x projective line with analytic derivatives.
// UnsupportedDimension for k >= 3. Expected values: -2 pi i at k = 1,
// -24 pi^2 at k = 2; multiplying by tc_ratio of form_constants(k) gives 1.
Complex integrate_unstable(int k, const QuadratureSpec& quad);

struct PreimageHit {
  ChartPoint point;
  int sign = 0;          // orientation sign of the intersection
  double residual = 0.0; // |(1 + g) w| at the accepted point
  VecC kernel_vector;    // unit kernel direction, phase-fixed
};

struct PreimageScan {
  std::vector<PreimageHit> hits;
  int starts = 0;
  int converged = 0;  // Newton runs that reached the residual target
};

struct MultistartSpec {
  int count = 64;
  std::uint64_t seed = 0;
};

// Finds the isolated preimages of the codimension-(2k-1) stratum (kernel
// profile = single drop at step k) under g, by damped Newton on the defining
// map (eigenphase - pi, Re<e_1, w>, Im<e_1, w>, ..., Re<e_{k-1}, w>,
// Im<e_{k-1}, w>) from seeded multistarts, deduplicated at radius 1e-5.
// Requires domain dimension == 2k-1. The intersection sign is
// -sign(det D Psi), calibrated on the circle family.
PreimageScan find_preimages(const GaugeMap& g, const spectral::Flag& flag,
                            int k, const MultistartSpec& multistart,
                            double tol = 1e-10);

struct StratumHit {
  ChartPoint point;
  spectral::IndexSet stratum;
  int codim = 0;
  double jac_min_sv = 0.0;  // smallest singular value of D Psi (singleton k)
  bool rank_ok = true;
};

struct TransversalityReport {
  bool pass = true;
  std::vector<StratumHit> forbidden;  // strata with codim > dim B
  std::vector<StratumHit> expected;   // codim == dim B, rank-checked
  double min_second_sv = 0.0;  // proximity to deeper strata over the samples
};

// Grid-samples the kernel profile of g along the flag, locating stratum
// crossings. Hits of strata deeper than dim B fail the check; hits of
// codimension exactly dim B get a Jacobian rank test. samples is the grid
// count per axis.
TransversalityReport transversality_check(const GaugeMap& g,
                                          const spectral::Flag& flag,
                                          int samples = 64);

// Exterior derivative by central differences of coefficient evaluations at
// step h (degree clamps to the zero field past the manifold dimension).
FormField fd_exterior_derivative(const ParamManifold& manifold,
                                 const FormField& field, double h = 1e-4);

}  // namespace mcl::geometry
