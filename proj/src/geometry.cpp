#include "mcl/geometry.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace mcl::geometry {

double Chart::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= hi(i) - lo(i);
  return v;
}

VecR Chart::wrap(const VecR& u) const {
  VecR w = u;
  for (int i = 0; i < dim(); ++i) {
    if (i < static_cast<int>(periodic.size()) && periodic[i]) {
      const double period = hi(i) - lo(i);
      double v = std::fmod(w(i) - lo(i), period);
      if (v < 0) v += period;
      w(i) = lo(i) + v;
    }
  }
  return w;
}

namespace {

Chart box_chart(std::initializer_list<double> lo,
                std::initializer_list<double> hi,
                std::initializer_list<bool> periodic) {
  Chart c;
  c.lo.resize(static_cast<int>(lo.size()));
  c.hi.resize(static_cast<int>(hi.size()));
  int i = 0;
  for (double v : lo) c.lo(i++) = v;
  i = 0;
  for (double v : hi) c.hi(i++) = v;
  c.periodic.assign(periodic.begin(), periodic.end());
  return c;
}

}  // namespace

ParamManifold circle() {
  ParamManifold m;
  m.name = "circle";
  m.dim = 1;
  Chart c = box_chart({0.0}, {2 * kPi}, {true});
  c.embed = [](const VecR& u) {
    VecR e(2);
    e << std::cos(u(0)), std::sin(u(0));
    return e;
  };
  m.charts.push_back(std::move(c));
  m.volume_density = [](const ChartPoint&) { return 1.0; };
  return m;
}

ParamManifold sphere2() {
  ParamManifold m;
  m.name = "sphere2";
  m.dim = 2;
  Chart c = box_chart({0.0, 0.0}, {kPi, 2 * kPi}, {false, true});
  c.embed = [](const VecR& u) {
    VecR e(3);
    e << std::sin(u(0)) * std::cos(u(1)), std::sin(u(0)) * std::sin(u(1)),
        std::cos(u(0));
    return e;
  };
  m.charts.push_back(std::move(c));
  m.volume_density = [](const ChartPoint& p) { return std::sin(p.u(0)); };
  return m;
}

ParamManifold sphere3() {
  ParamManifold m;
  m.name = "sphere3";
  m.dim = 3;
  Chart c = box_chart({0.0, 0.0, 0.0}, {kPi, kPi, 2 * kPi},
                      {false, false, true});
  // Unit quaternion (cos chi, sin chi cos theta, sin chi sin theta cos phi,
  // sin chi sin theta sin phi).
  c.embed = [](const VecR& u) {
    const double chi = u(0), th = u(1), ph = u(2);
    VecR e(4);
    e << std::cos(chi), std::sin(chi) * std::cos(th),
        std::sin(chi) * std::sin(th) * std::cos(ph),
        std::sin(chi) * std::sin(th) * std::sin(ph);
    return e;
  };
  m.charts.push_back(std::move(c));
  m.volume_density = [](const ChartPoint& p) {
    const double s = std::sin(p.u(0));
    return s * s * std::sin(p.u(1));
  };
  return m;
}

ParamManifold projective_line() {
  ParamManifold m;
  m.name = "projective_line";
  m.dim = 2;
  Chart c = box_chart({0.0, 0.0}, {kPi, 2 * kPi}, {false, true});
  // Line spanned by (cos(alpha/2), sin(alpha/2) e^{i phi}), packed as
  // (Re v1, Im v1, Re v2, Im v2). The (alpha, phi) order carries the complex
  // orientation.
  c.embed = [](const VecR& u) {
    const double ca = std::cos(0.5 * u(0)), sa = std::sin(0.5 * u(0));
    VecR e(4);
    e << ca, 0.0, sa * std::cos(u(1)), sa * std::sin(u(1));
    return e;
  };
  m.charts.push_back(std::move(c));
  // Normalized so the total area is 1.
  m.volume_density = [](const ChartPoint& p) {
    return std::sin(p.u(0)) / (4 * kPi);
  };
  return m;
}

ParamManifold circle_times_projective_line() {
  ParamManifold m;
  m.name = "circle_x_projective_line";
  m.dim = 3;
  Chart c = box_chart({0.0, 0.0, 0.0}, {2 * kPi, kPi, 2 * kPi},
                      {true, false, true});
  m.charts.push_back(std::move(c));
  m.volume_density = [](const ChartPoint& p) {
    return std::sin(p.u(1)) / (4 * kPi);
  };
  return m;
}

// ============================================================================
// Quadrature
// ============================================================================

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order");

  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
      cache;
  std::pair<std::vector<double>, std::vector<double>> base;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) {
      base = it->second;
    } else {
      // Roots of the Legendre polynomial by Newton iteration from the
      // Chebyshev guesses; standard three-term recurrence for values.
      std::vector<double> x(n), w(n);
      for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
          double p0 = 1.0, p1 = 0.0;
          for (int j = 0; j < n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
          }
          pp = n * (z * p0 - p1) / (z * z - 1.0);
          const double dz = p0 / pp;
          z -= dz;
          if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
      }
      base = {x, w};
      cache[n] = base;
    }
  }

  nodes.resize(n);
  weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    nodes[i] = mid + half * base.first[i];
    weights[i] = half * base.second[i];
  }
}

}  // namespace mcl::geometry
