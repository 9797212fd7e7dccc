#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/linalg.hpp"

namespace mcl::geometry {

// Point in chart coordinates.
struct ChartPoint {
  int chart = 0;
  VecR u;

  int dim() const { return static_cast<int>(u.size()); }
};

// Rectangular coordinate chart [lo, hi]^d with an orientation sign. periodic
// marks axes glued end to end (used when deduplicating and when wrapping
// Newton iterates). The optional embedding sends chart coordinates to the
// model space the gauge maps consume (unit quaternions for the 3-sphere and
// so on).
struct Chart {
  VecR lo, hi;
  int orientation = +1;
  std::vector<bool> periodic;
  std::function<VecR(const VecR&)> embed;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  // Wraps periodic coordinates into [lo, hi); clamps nothing else.
  VecR wrap(const VecR& u) const;
};

// Parametrized manifold: a list of charts assumed to overlap only on measure
// zero, so integrals are plain sums over charts.
struct ParamManifold {
  std::string name;
  int dim = 0;
  std::vector<Chart> charts;

  // Density of the Riemannian volume form in chart coordinates (used by the
  // volume cross-checks, not by form integration).
  std::function<double(const ChartPoint&)> volume_density;
};

// Built-in parameter spaces. Circle: theta in [0, 2pi). Sphere: polar/azimuth
// with density sin(theta). Three-sphere: hyperspherical (chi, theta, phi),
// density sin^2(chi) sin(theta), embedded as unit quaternions
// (cos chi, sin chi cos theta, sin chi sin theta cos phi, ...). Projective
// line: (alpha, phi) with the complex orientation, embedded as the unit
// vector (cos(alpha/2), sin(alpha/2) e^{i phi}) stored as 4 reals.
ParamManifold circle();
ParamManifold sphere2();
ParamManifold sphere3();
ParamManifold projective_line();
// Product S^1 x CP^1 in chart order (theta, alpha, phi).
ParamManifold circle_times_projective_line();

struct QuadratureSpec {
  enum class Kind { GaussLegendre, MonteCarlo } kind = Kind::GaussLegendre;
  int order = 16;            // nodes per axis (GaussLegendre)
  long samples = 100000;     // point count (MonteCarlo)
  std::uint64_t seed = 0;    // MonteCarlo stream
};

// Nodes and weights of the n-point Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace mcl::geometry
