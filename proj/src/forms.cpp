#include "mcl/forms.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <bit>
#include <numeric>

namespace mcl::ocw {

Complex FormField::operator()(const ChartPoint& p,
                              const std::vector<VecR>& tangents) const {
  if (static_cast<int>(tangents.size()) != degree)
    throw InvalidArity("FormField: expected " + std::to_string(degree) +
                       " tangent vectors, got " +
                       std::to_string(tangents.size()));
  return eval(p, tangents);
}

MatC GaugeMap::d(const ChartPoint& p, int i) const {
  if (derivative) return derivative(p, i);
  ChartPoint pp = p, pm = p;
  pp.u(i) += h;
  pm.u(i) -= h;
  return (value(pp) - value(pm)) / (2.0 * h);
}

// ============================================================================
// Pointwise algebra
// ============================================================================

Complex wedge_trace(const std::vector<MatC>& ms) {
  const int q = static_cast<int>(ms.size());
  if (q == 0) throw std::invalid_argument("wedge_trace: empty list");
  std::vector<int> idx(q);
  std::iota(idx.begin(), idx.end(), 0);
  Complex acc = 0.0;
  do {
    int inversions = 0;
    for (int a = 0; a < q; ++a)
      for (int b = a + 1; b < q; ++b)
        if (idx[a] > idx[b]) ++inversions;
    MatC prod = ms[idx[0]];
    for (int j = 1; j < q; ++j) prod = prod * ms[idx[j]];
    acc += (inversions % 2 ? -1.0 : 1.0) * prod.trace();
  } while (std::next_permutation(idx.begin(), idx.end()));
  return acc;
}

std::vector<MatC> maurer_cartan(const GaugeMap& g, const ChartPoint& p) {
  const MatC val = g.value(p);
  Eigen::PartialPivLU<MatC> lu(val);
  const int d = p.dim();
  std::vector<MatC> omega(d);
  for (int i = 0; i < d; ++i) omega[i] = lu.solve(g.d(p, i));
  return omega;
}

double mc_identity_residual(const GaugeMap& g, const ChartPoint& p, double h) {
  const int d = p.dim();
  // d omega_{ij} = d_i omega_j - d_j omega_i by central differences of the
  // coefficient matrices, plus the quadratic term.
  std::vector<std::vector<MatC>> shifted_p(d), shifted_m(d);
  for (int i = 0; i < d; ++i) {
    ChartPoint pp = p, pm = p;
    pp.u(i) += h;
    pm.u(i) -= h;
    shifted_p[i] = maurer_cartan(g, pp);
    shifted_m[i] = maurer_cartan(g, pm);
  }
  const auto omega = maurer_cartan(g, p);
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const MatC domega =
          (shifted_p[i][j] - shifted_m[i][j]) / (2 * h) -
          (shifted_p[j][i] - shifted_m[j][i]) / (2 * h);
      const MatC quad = omega[i] * omega[j] - omega[j] * omega[i];
      worst = std::max(worst, (domega + quad).norm());
    }
  return worst;
}

// ============================================================================
// Constants
// ============================================================================

double beta_integral(int k) {
  if (k < 1) throw std::invalid_argument("beta_integral: k >= 1");
  std::vector<double> nodes, weights;
  geometry::gauss_legendre(std::max(k, 4), 0.0, 1.0, nodes, weights);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = nodes[i];
    acc += weights[i] * std::pow(t * t - t, k - 1);
  }
  return acc;
}

FormConstants form_constants(int k) {
  if (k < 1 || k > 9)
    throw std::invalid_argument("form_constants: k in 1..9 (factorials stay "
                                "exact in 53 bits)");
  // (i / 2pi)^k with the i-power kept exact.
  static const Complex ipow[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                  Complex(0, -1)};
  const Complex pw = ipow[k % 4] * std::pow(2.0 * kPi, -k);

  FormConstants fc;
  const double km1 = factorial(k - 1);
  const double top = factorial(2 * k - 1);
  fc.tc_ratio = Rational{km1 * km1, top, +1};
  fc.tch_ratio = Rational{km1, top, (k % 2 == 1) ? +1 : -1};
  fc.tc = pw * (fc.tc_ratio.sign * fc.tc_ratio.num / fc.tc_ratio.den);
  fc.tch = pw * (fc.tch_ratio.sign * fc.tch_ratio.num / fc.tch_ratio.den);
  return fc;
}

// ============================================================================
// Fields
// ============================================================================

namespace {

FormField zero_field(int degree) {
  FormField f;
  f.degree = degree;
  f.eval = [](const ChartPoint&, const std::vector<VecR>&) {
    return Complex(0, 0);
  };
  return f;
}

}  // namespace

// Shared builder: constant * tr wedge^{2k-1}(g^{-1} dg).
FormField wedge_power_form(const GaugeMap& g, int k, Complex constant) {
  const int deg = 2 * k - 1;
  if (g.domain->dim < deg) return zero_field(deg);
  FormField f;
  f.degree = deg;
  f.eval = [g, deg, constant](const ChartPoint& p,
                              const std::vector<VecR>& tangents) {
    const auto omega = maurer_cartan(g, p);
    std::vector<MatC> contracted(deg);
    for (int j = 0; j < deg; ++j) {
      MatC m = MatC::Zero(g.n, g.n);
      for (int i = 0; i < p.dim(); ++i) m += tangents[j](i) * omega[i];
      contracted[j] = std::move(m);
    }
    return constant * wedge_trace(contracted);
  };
  return f;
}

FormField tc_form(const GaugeMap& g, int k) {
  return wedge_power_form(g, k, form_constants(k).tc);
}

// ============================================================================
// Alternating-tensor scratchpad for the transgression algebra
// ============================================================================
//
// Forms are evaluated on one fixed ordered tuple of <= 12 vectors, so a
// q-form at a point is fully described by its values on bitmask-indexed
// subsets of the tuple. Wedge products become shuffle sums over submasks.

namespace {

int shuffle_sign(unsigned a, unsigned b) {
  // Parity of the permutation sorting the concatenation (a-bits, b-bits);
  // counts pairs (x in a, y in b) with y < x.
  int inv = 0;
  for (unsigned bit_a = a; bit_a; bit_a &= bit_a - 1) {
    const int pos = std::countr_zero(bit_a);
    inv += std::popcount(b & ((1u << pos) - 1u));
  }
  return inv % 2 ? -1 : +1;
}

struct ScalarAlt {
  int deg = 0;
  int nv = 0;
  std::vector<Complex> vals;  // indexed by bitmask over the tuple

  explicit ScalarAlt(int deg_, int nv_)
      : deg(deg_), nv(nv_), vals(std::size_t(1) << nv_, Complex(0, 0)) {}
};

struct MatrixAlt {
  int deg = 0;
  int nv = 0;
  int n = 0;
  std::vector<MatC> vals;

  MatrixAlt(int deg_, int nv_, int n_)
      : deg(deg_), nv(nv_), n(n_),
        vals(std::size_t(1) << nv_, MatC::Zero(n_, n_)) {}
};

ScalarAlt wedge(const ScalarAlt& a, const ScalarAlt& b) {
  ScalarAlt out(a.deg + b.deg, a.nv);
  for (unsigned m = 0; m < out.vals.size(); ++m) {
    if (std::popcount(m) != out.deg) continue;
    Complex acc = 0.0;
    unsigned s = m;
    while (true) {
      if (std::popcount(s) == a.deg)
        acc += double(shuffle_sign(s, m ^ s)) * a.vals[s] * b.vals[m ^ s];
      if (s == 0) break;
      s = (s - 1) & m;
    }
    out.vals[m] = acc;
  }
  return out;
}

MatrixAlt wedge(const MatrixAlt& a, const MatrixAlt& b) {
  MatrixAlt out(a.deg + b.deg, a.nv, a.n);
  for (unsigned m = 0; m < out.vals.size(); ++m) {
    if (std::popcount(m) != out.deg) continue;
    MatC acc = MatC::Zero(a.n, a.n);
    unsigned s = m;
    while (true) {
      if (std::popcount(s) == a.deg)
        acc += double(shuffle_sign(s, m ^ s)) * (a.vals[s] * b.vals[m ^ s]);
      if (s == 0) break;
      s = (s - 1) & m;
    }
    out.vals[m] = acc;
  }
  return out;
}

ScalarAlt trace_of(const MatrixAlt& a) {
  ScalarAlt out(a.deg, a.nv);
  for (unsigned m = 0; m < a.vals.size(); ++m)
    if (std::popcount(m) == a.deg) out.vals[m] = a.vals[m].trace();
  return out;
}

// P(curvature) evaluated on the full tuple, from the pairwise values of the
// curvature 2-form. curv(i, j) for i < j over nv vectors.
Complex char_value(const std::function<MatC(int, int)>& curv, int nv, int n,
                   CharClass kind, int k) {
  MatrixAlt f2(2, nv, n);
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      const MatC fij = curv(i, j);
      f2.vals[(1u << i) | (1u << j)] = fij;
    }
  const unsigned full = (nv >= 32) ? ~0u : ((1u << nv) - 1u);

  if (kind == CharClass::ChernCharacter) {
    MatrixAlt acc = f2;
    for (int j = 1; j < k; ++j) acc = wedge(acc, f2);
    static const Complex ipow[4] = {Complex(1, 0), Complex(0, 1),
                                    Complex(-1, 0), Complex(0, -1)};
    const Complex c = ipow[k % 4] * std::pow(2.0 * kPi, -k) / factorial(k);
    return c * acc.vals[full].trace();
  }

  // Chern class by Newton's identities from the power sums
  // p_j = tr((i/2pi F)^j).
  static const Complex ipow[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                  Complex(0, -1)};
  std::vector<ScalarAlt> p;  // p[j], degree 2(j+1)
  {
    MatrixAlt power = f2;
    for (int j = 1; j <= k; ++j) {
      ScalarAlt pj = trace_of(power);
      const Complex scale = ipow[j % 4] * std::pow(2.0 * kPi, -j);
      for (auto& v : pj.vals) v *= scale;
      p.push_back(std::move(pj));
      if (j < k) power = wedge(power, f2);
    }
  }
  std::vector<ScalarAlt> e;  // e[m], degree 2m
  e.emplace_back(0, nv);
  e[0].vals[0] = 1.0;
  for (int m = 1; m <= k; ++m) {
    ScalarAlt em(2 * m, nv);
    for (int j = 1; j <= m; ++j) {
      ScalarAlt term = wedge(e[m - j], p[j - 1]);
      const double sgn = (j % 2 == 1) ? 1.0 : -1.0;
      for (unsigned mask = 0; mask < em.vals.size(); ++mask)
        em.vals[mask] += sgn * term.vals[mask] / double(m);
    }
    e.push_back(std::move(em));
  }
  return e[k].vals[full];
}

}  // namespace

FormField transgression_general(const ConnectionPath& path, CharClass kind,
                                int k) {
  if (k < 1) throw std::invalid_argument("transgression_general: k >= 1");
  const int deg = 2 * k - 1;
  if (path.domain->dim < deg) return zero_field(deg);

  FormField f;
  f.degree = deg;
  const ConnectionPath pth = path;  // captured by value
  f.eval = [pth, kind, k, deg](const ChartPoint& p,
                               const std::vector<VecR>& tangents) {
    const int d = p.dim();
    const int n = pth.n;
    const int nv = deg + 1;  // slot 0 is the path direction d/dt

    // Coefficients and their coordinate derivatives at p (central FD).
    std::vector<MatC> a0(d), a1(d);
    std::vector<std::vector<MatC>> da0(d, std::vector<MatC>(d)),
        da1(d, std::vector<MatC>(d));
    for (int j = 0; j < d; ++j) {
      a0[j] = pth.a0(p, j);
      a1[j] = pth.a1(p, j);
    }
    for (int i = 0; i < d; ++i) {
      ChartPoint pp = p, pm = p;
      pp.u(i) += pth.h;
      pm.u(i) -= pth.h;
      for (int j = 0; j < d; ++j) {
        da0[i][j] = (pth.a0(pp, j) - pth.a0(pm, j)) / (2 * pth.h);
        da1[i][j] = (pth.a1(pp, j) - pth.a1(pm, j)) / (2 * pth.h);
      }
    }

    // Contractions with the given tangent tuple.
    auto contract = [&](const std::vector<MatC>& coeff, const VecR& v) {
      MatC m = MatC::Zero(n, n);
      for (int i = 0; i < d; ++i) m += v(i) * coeff[i];
      return m;
    };
    // d A (v, w) = sum_{i,j} v_i w_j (d_i A_j - d_j A_i).
    auto dcontract = [&](const std::vector<std::vector<MatC>>& dcoeff,
                         const VecR& v, const VecR& w) {
      MatC m = MatC::Zero(n, n);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          m += v(i) * w(j) * (dcoeff[i][j] - dcoeff[j][i]);
      return m;
    };

    std::vector<double> tn, tw;
    geometry::gauss_legendre(pth.q_t, 0.0, 1.0, tn, tw);

    Complex acc = 0.0;
    for (std::size_t q = 0; q < tn.size(); ++q) {
      const double t = tn[q];
      auto at = [&](const VecR& v) {
        return ((1.0 - t) * contract(a0, v) + t * contract(a1, v)).eval();
      };
      auto dat = [&](const VecR& v, const VecR& w) {
        return ((1.0 - t) * dcontract(da0, v, w) + t * dcontract(da1, v, w))
            .eval();
      };
      // Curvature of the path connection on [0,1] x B evaluated pairwise:
      // slot 0 against v gives dt-part A1 - A0, spatial pairs give
      // dA_t + A_t ^ A_t.
      auto curv = [&](int i, int j) -> MatC {
        if (i == 0) {
          const VecR& v = tangents[j - 1];
          return contract(a1, v) - contract(a0, v);
        }
        const VecR& v = tangents[i - 1];
        const VecR& w = tangents[j - 1];
        const MatC av = at(v), aw = at(w);
        return dat(v, w) + av * aw - aw * av;
      };
      acc += tw[q] * char_value(curv, nv, n, kind, k);
    }
    return acc;
  };
  return f;
}

FormField char_form(const ParamManifold& domain, int n,
                    const std::function<MatC(const ChartPoint&, int)>& a,
                    CharClass kind, int k, double h) {
  const int deg = 2 * k;
  FormField f;
  f.degree = deg;
  if (domain.dim < deg) return zero_field(deg);
  f.eval = [a, n, kind, k, deg, h](const ChartPoint& p,
                                   const std::vector<VecR>& tangents) {
    const int d = p.dim();
    std::vector<MatC> coeff(d);
    std::vector<std::vector<MatC>> dcoeff(d, std::vector<MatC>(d));
    for (int j = 0; j < d; ++j) coeff[j] = a(p, j);
    for (int i = 0; i < d; ++i) {
      ChartPoint pp = p, pm = p;
      pp.u(i) += h;
      pm.u(i) -= h;
      for (int j = 0; j < d; ++j)
        dcoeff[i][j] = (a(pp, j) - a(pm, j)) / (2 * h);
    }
    auto contract = [&](const VecR& v) {
      MatC m = MatC::Zero(n, n);
      for (int i = 0; i < d; ++i) m += v(i) * coeff[i];
      return m;
    };
    auto curv = [&](int i, int j) -> MatC {
      const VecR& v = tangents[i];
      const VecR& w = tangents[j];
      MatC dm = MatC::Zero(n, n);
      for (int ii = 0; ii < d; ++ii)
        for (int jj = 0; jj < d; ++jj)
          dm += v(ii) * w(jj) * (dcoeff[ii][jj] - dcoeff[jj][ii]);
      const MatC av = contract(v), aw = contract(w);
      return dm + av * aw - aw * av;
    };
    return char_value(curv, deg, n, kind, k);
  };
  return f;
}

}  // namespace mcl::ocw
