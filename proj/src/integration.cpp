#include "mcl/integration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mcl/parallel.hpp"
#include "mcl/rng.hpp"

namespace mcl::geometry {

// ============================================================================
// Form integration
// ============================================================================

namespace {

Complex integrate_chart_gl(const Chart& chart, const FormField& field,
                           int chart_idx, int order) {
  const int d = chart.dim();
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int i = 0; i < d; ++i)
    gauss_legendre(order, chart.lo(i), chart.hi(i), nodes[i], weights[i]);

  std::vector<VecR> tangents(d);
  for (int i = 0; i < d; ++i) tangents[i] = VecR::Unit(d, i);

  // Slice on the first axis; per-slice sums land in fixed slots so the
  // reduction order is independent of the worker count.
  std::vector<Complex> slice(order, Complex(0, 0));
  parallel_for(order, [&](int i0) {
    ChartPoint p;
    p.chart = chart_idx;
    p.u.resize(d);
    std::vector<int> idx(d, 0);
    idx[0] = i0;
    Complex acc = 0.0;
    while (true) {
      double w = 1.0;
      for (int c = 0; c < d; ++c) {
        p.u(c) = nodes[c][idx[c]];
        w *= weights[c][idx[c]];
      }
      acc += w * field.eval(p, tangents);
      int c = 1;
      for (; c < d; ++c) {
        if (++idx[c] < order) break;
        idx[c] = 0;
      }
      if (c == d || d == 1) break;
    }
    slice[i0] = acc;
  });
  Complex total = 0.0;
  for (const Complex& s : slice) total += s;
  return total;
}

Complex integrate_chart_mc(const Chart& chart, const FormField& field,
                           int chart_idx, long samples, std::uint64_t seed) {
  const int d = chart.dim();
  std::vector<VecR> tangents(d);
  for (int i = 0; i < d; ++i) tangents[i] = VecR::Unit(d, i);

  const long chunk = 4096;
  const long nchunks = (samples + chunk - 1) / chunk;
  std::vector<Complex> sums(nchunks, Complex(0, 0));
  parallel_for(static_cast<int>(nchunks), [&](int ci) {
    CounterRng rng(seed, (std::uint64_t(chart_idx) << 32) + ci);
    const long begin = ci * chunk;
    const long end = std::min(samples, begin + chunk);
    ChartPoint p;
    p.chart = chart_idx;
    p.u.resize(d);
    Complex acc = 0.0;
    for (long s = begin; s < end; ++s) {
      for (int c = 0; c < d; ++c) p.u(c) = rng.uniform(chart.lo(c), chart.hi(c));
      acc += field.eval(p, tangents);
    }
    sums[ci] = acc;
  });
  Complex total = 0.0;
  for (const Complex& s : sums) total += s;
  return total * (chart.volume() / double(samples));
}

}  // namespace

Complex integrate_form(const ParamManifold& manifold, const FormField& field,
                       const QuadratureSpec& quad) {
  if (field.degree != manifold.dim)
    throw DegreeMismatch("integrate_form: " + std::to_string(field.degree) +
                         "-form over a " + std::to_string(manifold.dim) +
                         "-dimensional space");
  Complex total = 0.0;
  for (std::size_t ci = 0; ci < manifold.charts.size(); ++ci) {
    const Chart& chart = manifold.charts[ci];
    Complex v;
    if (quad.kind == QuadratureSpec::Kind::GaussLegendre)
      v = integrate_chart_gl(chart, field, static_cast<int>(ci), quad.order);
    else
      v = integrate_chart_mc(chart, field, static_cast<int>(ci), quad.samples,
                             quad.seed);
    total += double(chart.orientation) * v;
  }
  return total;
}

// ============================================================================
// Unstable-set integrals
// ============================================================================

namespace {

// Projector onto the line (cos(a/2), sin(a/2) e^{i phi}) and its coordinate
// derivatives.
MatC line_projector(double al, double ph) {
  const double c = std::cos(0.5 * al), s = std::sin(0.5 * al);
  const Complex eip = std::exp(kI * ph);
  MatC p(2, 2);
  p << c * c, c * s / eip, c * s * eip, s * s;
  return p;
}

MatC line_projector_dal(double al, double ph) {
  const double c = std::cos(0.5 * al), s = std::sin(0.5 * al);
  const Complex eip = std::exp(kI * ph);
  const double dcc = -c * s;                   // d(c^2)/d al
  const double dcs = 0.5 * (c * c - s * s);    // d(cs)/d al
  MatC p(2, 2);
  p << dcc, dcs / eip, dcs * eip, -dcc;
  return p;
}

MatC line_projector_dph(double al, double ph) {
  const double c = std::cos(0.5 * al), s = std::sin(0.5 * al);
  const Complex eip = std::exp(kI * ph);
  MatC p(2, 2);
  p << 0.0, -kI * c * s / eip, kI * c * s * eip, 0.0;
  return p;
}

}  // namespace

Complex integrate_unstable(int k, const QuadratureSpec& quad) {
  using ocw::GaugeMap;
  if (k == 1) {
    const ParamManifold dom = circle();
    GaugeMap g;
    g.domain = &dom;
    g.n = 1;
    g.value = [](const ChartPoint& p) {
      MatC m(1, 1);
      m(0, 0) = std::exp(kI * p.u(0));
      return m;
    };
    g.derivative = [](const ChartPoint& p, int) {
      MatC m(1, 1);
      m(0, 0) = kI * std::exp(kI * p.u(0));
      return m;
    };
    const FormField field = ocw::wedge_power_form(g, 1, Complex(1, 0));
    // The standard parametrization is orientation-reversing.
    return -integrate_form(dom, field, quad);
  }
  if (k == 2) {
    const ParamManifold dom = circle_times_projective_line();
    GaugeMap g;
    g.domain = &dom;
    g.n = 2;
    g.value = [](const ChartPoint& p) {
      const Complex w = std::exp(kI * p.u(0)) - 1.0;
      return (MatC::Identity(2, 2) + w * line_projector(p.u(1), p.u(2))).eval();
    };
    g.derivative = [](const ChartPoint& p, int i) -> MatC {
      const Complex w = std::exp(kI * p.u(0)) - 1.0;
      if (i == 0)
        return kI * std::exp(kI * p.u(0)) * line_projector(p.u(1), p.u(2));
      if (i == 1) return w * line_projector_dal(p.u(1), p.u(2));
      return w * line_projector_dph(p.u(1), p.u(2));
    };
    const FormField field = ocw::wedge_power_form(g, 2, Complex(1, 0));
    return -integrate_form(dom, field, quad);
  }
  throw UnsupportedDimension(
      "integrate_unstable: only k = 1, 2 carry product-quadrature "
      "parametrizations");
}

// ============================================================================
// Preimages of the distinguished stratum
// ============================================================================

namespace {

// Defining map of the codimension-(2k-1) stratum: eigenphase of the
// eigenvalue nearest -1 (branch (0, 2pi)) shifted by pi, then the flag
// components of the gauge-fixed eigenvector.
struct DefiningMap {
  const ocw::GaugeMap* g = nullptr;
  const spectral::Flag* flag = nullptr;
  int k = 1;

  VecR operator()(const ChartPoint& p) const {
    const MatC val = g->value(p);
    Eigen::ComplexEigenSolver<MatC> es(val);
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
      const double dist = std::abs(es.eigenvalues()(j) + 1.0);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    double phase = std::arg(es.eigenvalues()(best));
    if (phase <= 0) phase += 2 * kPi;
    VecC w = es.eigenvectors().col(best);
    const Complex ck = flag->vector(k).dot(w);
    if (std::abs(ck) > 1e-13) w *= std::abs(ck) / ck;

    VecR out(2 * k - 1);
    out(0) = phase - kPi;
    for (int j = 1; j < k; ++j) {
      const Complex cj = flag->vector(j).dot(w);
      out(2 * j - 1) = cj.real();
      out(2 * j) = cj.imag();
    }
    return out;
  }

  MatR jacobian(const ChartPoint& p, double h = 1e-6) const {
    const int d = 2 * k - 1;
    MatR j(d, d);
    for (int c = 0; c < d; ++c) {
      ChartPoint pp = p, pm = p;
      pp.u(c) += h;
      pm.u(c) -= h;
      j.col(c) = ((*this)(pp) - (*this)(pm)) / (2 * h);
    }
    return j;
  }
};

double wrapped_distance(const geometry::Chart& chart, const VecR& a,
                        const VecR& b) {
  double acc = 0.0;
  for (int i = 0; i < chart.dim(); ++i) {
    double d = std::abs(a(i) - b(i));
    if (i < static_cast<int>(chart.periodic.size()) && chart.periodic[i]) {
      const double period = chart.hi(i) - chart.lo(i);
      d = std::min(d, period - d);
    }
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

PreimageScan find_preimages(const GaugeMap& g, const spectral::Flag& flag,
                            int k, const MultistartSpec& multistart,
                            double tol) {
  const ParamManifold& dom = *g.domain;
  const int d = 2 * k - 1;
  if (dom.dim != d)
    throw std::invalid_argument(
        "find_preimages: domain dimension must equal 2k-1");

  spectral::IndexSet want;
  want.entries = {k};

  DefiningMap psi{&g, &flag, k};
  PreimageScan scan;
  scan.starts = multistart.count;

  for (std::size_t ci = 0; ci < dom.charts.size(); ++ci) {
    const geometry::Chart& chart = dom.charts[ci];
    CounterRng rng(multistart.seed, 7000 + ci);
    for (int s = 0; s < multistart.count; ++s) {
      ChartPoint p;
      p.chart = static_cast<int>(ci);
      p.u.resize(d);
      for (int c = 0; c < d; ++c)
        p.u(c) = rng.uniform(chart.lo(c), chart.hi(c));

      bool ok = false;
      VecR r = psi(p);
      for (int it = 0; it < 60; ++it) {
        if (r.lpNorm<Eigen::Infinity>() < 1e-11) {
          ok = true;
          break;
        }
        const MatR j = psi.jacobian(p);
        Eigen::FullPivLU<MatR> lu(j);
        if (!lu.isInvertible()) break;
        VecR step = lu.solve(r);
        // Damped update; fall through with the full step if no improvement.
        bool moved = false;
        for (int half = 0; half < 8; ++half) {
          ChartPoint ptry = p;
          ptry.u = chart.wrap(p.u - step);
          bool inside = true;
          for (int c = 0; c < d; ++c) {
            const bool per =
                c < static_cast<int>(chart.periodic.size()) && chart.periodic[c];
            if (!per && (ptry.u(c) < chart.lo(c) - 0.5 ||
                         ptry.u(c) > chart.hi(c) + 0.5))
              inside = false;
          }
          if (!inside) {
            step *= 0.5;
            continue;
          }
          const VecR rtry = psi(ptry);
          if (rtry.lpNorm<Eigen::Infinity>() <
                  r.lpNorm<Eigen::Infinity>() ||
              half == 7) {
            p = ptry;
            r = rtry;
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;
      }
      if (!ok) continue;

      // Discard converged points that left the chart on a non-periodic axis:
      // coordinate symmetries (the polar axes of spheres) would otherwise
      // duplicate a root outside the box with the reflected orientation.
      {
        const VecR w = chart.wrap(p.u);
        bool in_box = true;
        for (int c = 0; c < d; ++c) {
          const bool per = c < static_cast<int>(chart.periodic.size()) &&
                           chart.periodic[c];
          if (!per &&
              (w(c) < chart.lo(c) - 1e-9 || w(c) > chart.hi(c) + 1e-9))
            in_box = false;
        }
        if (!in_box) continue;
      }

      // Keep only genuine stratum points: profile must classify to {k}.
      const MatC val = g.value(p);
      const auto cls = spectral::incidence_classify(val, flag, 1e-7);
      if (!cls || !(*cls == want)) continue;
      ++scan.converged;

      Eigen::JacobiSVD<MatC> svd(MatC::Identity(g.n, g.n) + val,
                                 Eigen::ComputeFullV);
      const int last = g.n - 1;
      VecC kernel = svd.matrixV().col(last);
      const Complex ck = flag.vector(k).dot(kernel);
      if (std::abs(ck) > 1e-13) kernel *= std::abs(ck) / ck;

      const MatR j = psi.jacobian(p);
      const double det = j.determinant();
      PreimageHit hit;
      hit.point = p;
      hit.point.u = chart.wrap(p.u);
      hit.sign = det > 0 ? -1 : +1;  // calibrated overall factor of -1
      hit.residual = svd.singularValues()(last);
      hit.kernel_vector = kernel;
      if (hit.residual > std::max(tol, 1e-9) * 100) continue;

      bool dup = false;
      for (auto& prev : scan.hits) {
        if (prev.point.chart == hit.point.chart &&
            wrapped_distance(chart, prev.point.u, hit.point.u) < 1e-5) {
          dup = true;
          break;
        }
      }
      if (!dup) scan.hits.push_back(std::move(hit));
    }
  }
  return scan;
}

// ============================================================================
// Transversality audit
// ============================================================================

namespace {

double smallest_sv(const MatC& one_plus, int which = 0) {
  const auto svs = Eigen::JacobiSVD<MatC>(one_plus).singularValues();
  const int n = static_cast<int>(svs.size());
  return svs(n - 1 - which);
}

double sv_at(const GaugeMap& g, int chart, const VecR& u, int which = 0) {
  ChartPoint p;
  p.chart = chart;
  p.u = u;
  const MatC val = g.value(p);
  return smallest_sv(MatC::Identity(g.n, g.n) + val, which);
}

// Golden-section refinement of a V-shaped minimum along one coordinate.
void golden_axis(const GaugeMap& g, int chart, VecR& u, int c, double lo,
                 double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  auto val = [&](double v) {
    VecR w = u;
    w(c) = v;
    return sv_at(g, chart, w);
  };
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 90 && b - a > 1e-13; ++it) {
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
  u(c) = 0.5 * (a + b);
}

}  // namespace

TransversalityReport transversality_check(const GaugeMap& g,
                                          const spectral::Flag& flag,
                                          int samples) {
  const ParamManifold& dom = *g.domain;
  const int dimB = dom.dim;
  TransversalityReport report;
  report.min_second_sv = std::numeric_limits<double>::infinity();

  for (std::size_t ci = 0; ci < dom.charts.size(); ++ci) {
    const geometry::Chart& chart = dom.charts[ci];
    const int d = chart.dim();
    std::vector<std::vector<double>> axes(d);
    std::vector<double> spacing(d);
    for (int c = 0; c < d; ++c) {
      const bool per =
          c < static_cast<int>(chart.periodic.size()) && chart.periodic[c];
      axes[c].resize(samples);
      for (int i = 0; i < samples; ++i) {
        const double frac = per ? double(i) / samples : (i + 0.5) / samples;
        axes[c][i] = chart.lo(c) + (chart.hi(c) - chart.lo(c)) * frac;
      }
      spacing[c] = (chart.hi(c) - chart.lo(c)) / samples;
    }

    // Dense singular-value table.
    long total = 1;
    for (int c = 0; c < d; ++c) total *= samples;
    std::vector<float> smin(total);
    std::vector<int> idx(d, 0);
    for (long flat = 0; flat < total; ++flat) {
      VecR u(d);
      for (int c = 0; c < d; ++c) u(c) = axes[c][idx[c]];
      ChartPoint p;
      p.chart = static_cast<int>(ci);
      p.u = u;
      const MatC val = g.value(p);
      const MatC one_plus = MatC::Identity(g.n, g.n) + val;
      const auto svs = Eigen::JacobiSVD<MatC>(one_plus).singularValues();
      smin[flat] = static_cast<float>(svs(svs.size() - 1));
      if (svs.size() >= 2)
        report.min_second_sv =
            std::min(report.min_second_sv, double(svs(svs.size() - 2)));
      int c = 0;
      for (; c < d; ++c) {
        if (++idx[c] < samples) break;
        idx[c] = 0;
      }
    }

    auto flatten = [&](const std::vector<int>& ix) {
      long f = 0;
      for (int c = d - 1; c >= 0; --c) f = f * samples + ix[c];
      return f;
    };

    // Local minima along coordinate lines, pruned to those that could
    // plausibly reach zero within a cell.
    std::vector<VecR> candidates;
    std::fill(idx.begin(), idx.end(), 0);
    for (long flat = 0; flat < total; ++flat) {
      const double v0 = smin[flat];
      for (int c = 0; c < d; ++c) {
        const bool per =
            c < static_cast<int>(chart.periodic.size()) && chart.periodic[c];
        std::vector<int> in = idx, ip = idx;
        in[c] = idx[c] + 1;
        ip[c] = idx[c] - 1;
        if (per) {
          in[c] = (in[c] + samples) % samples;
          ip[c] = (ip[c] + samples) % samples;
        } else if (in[c] >= samples || ip[c] < 0) {
          continue;
        }
        const double vn = smin[flatten(in)], vp = smin[flatten(ip)];
        if (v0 <= vn && v0 <= vp) {
          const double cell = std::max(std::abs(vn - v0), std::abs(vp - v0));
          if (v0 < 4.0 * std::max(cell, 1e-12) || v0 < 1e-6) {
            VecR u(d);
            for (int cc = 0; cc < d; ++cc) u(cc) = axes[cc][idx[cc]];
            candidates.push_back(u);
          }
        }
      }
      int c = 0;
      for (; c < d; ++c) {
        if (++idx[c] < samples) break;
        idx[c] = 0;
      }
    }

    for (auto& u : candidates) {
      for (int round = 0; round < 4; ++round)
        for (int c = 0; c < d; ++c)
          golden_axis(g, static_cast<int>(ci), u, c, u(c) - spacing[c],
                      u(c) + spacing[c]);

      ChartPoint p;
      p.chart = static_cast<int>(ci);
      p.u = chart.wrap(u);
      const MatC val = g.value(p);
      const auto profile = spectral::kernel_profile(val, flag, +1, 1e-7);
      if (profile.dims[0] == 0) continue;  // refinement fell short of a hit
      const auto cls = spectral::classify_profile(profile);
      if (!cls) continue;
      const int codim = spectral::unstable_dim(*cls, g.n);
      if (codim < dimB) continue;  // transversal sheet crossing, expected

      StratumHit hit;
      hit.point = p;
      hit.stratum = *cls;
      hit.codim = codim;
      if (cls->entries.size() == 1 && codim == dimB) {
        DefiningMap psi{&g, &flag, cls->entries[0]};
        const MatR j = psi.jacobian(p);
        hit.jac_min_sv = Eigen::JacobiSVD<MatR>(j).singularValues().minCoeff();
        hit.rank_ok = hit.jac_min_sv > 1e-6;
      }

      auto& bucket = codim > dimB ? report.forbidden : report.expected;
      bool dup = false;
      for (const auto& prev : bucket)
        if (prev.point.chart == hit.point.chart &&
            wrapped_distance(chart, prev.point.u, hit.point.u) < 1e-5) {
          dup = true;
          break;
        }
      if (!dup) bucket.push_back(std::move(hit));
    }
  }

  if (!report.forbidden.empty()) report.pass = false;
  for (const auto& h : report.expected)
    if (!h.rank_ok) report.pass = false;
  return report;
}

// ============================================================================
// Exterior derivative
// ============================================================================

FormField fd_exterior_derivative(const ParamManifold& manifold,
                                 const FormField& field, double h) {
  const int deg = field.degree + 1;
  FormField out;
  out.degree = deg;
  if (deg > manifold.dim) {
    out.eval = [](const ChartPoint&, const std::vector<VecR>&) {
      return Complex(0, 0);
    };
    return out;
  }
  const FormField inner = field;
  out.eval = [inner, h, deg](const ChartPoint& p,
                             const std::vector<VecR>& tangents) {
    Complex acc = 0.0;
    for (int i = 0; i < deg; ++i) {
      std::vector<VecR> rest;
      rest.reserve(deg - 1);
      for (int j = 0; j < deg; ++j)
        if (j != i) rest.push_back(tangents[j]);
      ChartPoint pp = p, pm = p;
      pp.u += h * tangents[i];
      pm.u -= h * tangents[i];
      const Complex diff = (inner.eval(pp, rest) - inner.eval(pm, rest)) /
                           (2 * h);
      acc += (i % 2 ? -1.0 : 1.0) * diff;
    }
    return acc;
  };
  return out;
}

}  // namespace mcl::geometry
