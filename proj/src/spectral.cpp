#include "mcl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>

namespace mcl::spectral {

// ============================================================================
// Flag / IndexSet / ReductionSplit
// ============================================================================

Flag::Flag(MatC basis) : basis_(std::move(basis)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() == 0)
    throw InvalidFrame("Flag: basis must be square and nonempty");
  if (!is_orthonormal(basis_, 1e-12))
    throw InvalidFrame("Flag: basis columns not orthonormal at 1e-12");
}

Flag Flag::standard(int n) { return Flag(MatC::Identity(n, n)); }

VecC Flag::vector(int i) const {
  if (i < 1 || i > n()) throw std::invalid_argument("Flag::vector: index");
  return basis_.col(i - 1);
}

MatC Flag::subspace(int m) const {
  if (m < 0 || m > n()) throw std::invalid_argument("Flag::subspace: index");
  return basis_.rightCols(n() - m);
}

void IndexSet::validate(int n) const {
  int prev = 0;
  for (int i : entries) {
    if (i < 1 || i > n)
      throw InvalidIndexSet("index " + std::to_string(i) + " outside 1.." +
                            std::to_string(n));
    if (i <= prev) throw InvalidIndexSet("indices must strictly increase");
    prev = i;
  }
}

bool IndexSet::contains(int i) const {
  return std::find(entries.begin(), entries.end(), i) != entries.end();
}

std::vector<IndexSet> IndexSet::all_subsets(int n) {
  std::vector<IndexSet> out;
  out.reserve(std::size_t(1) << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    IndexSet s;
    for (int i = 1; i <= n; ++i)
      if (mask & (1u << (i - 1))) s.entries.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

void ReductionSplit::validate() const {
  if (w_basis.rows() != perp_basis.rows())
    throw InvalidFrame("ReductionSplit: ambient dimensions differ");
  const auto n = w_basis.rows();
  if (w_basis.cols() + perp_basis.cols() != n)
    throw InvalidFrame("ReductionSplit: subspace dimensions do not sum to n");
  if (!is_orthonormal(w_basis, 1e-9) || !is_orthonormal(perp_basis, 1e-9))
    throw InvalidFrame("ReductionSplit: frames not orthonormal");
  if ((w_basis.adjoint() * perp_basis).norm() > 1e-9)
    throw InvalidFrame("ReductionSplit: frames not mutually orthogonal");
}

// ============================================================================
// Operations
// ============================================================================

MatC critical_point(const IndexSet& I, const Flag& flag) {
  const int n = flag.n();
  I.validate(n);
  VecC d = VecC::Ones(n);
  for (int i : I.entries) d(i - 1) = Complex(-1.0, 0.0);
  return flag.basis() * d.asDiagonal() * flag.basis().adjoint();
}

KernelProfile kernel_profile(const MatC& u, const Flag& flag, int sign,
                             double tol) {
  require_unitary(u, 1e-9, "kernel_profile");
  if (u.rows() != flag.n())
    throw std::invalid_argument("kernel_profile: size mismatch with flag");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("kernel_profile: sign must be +-1");

  const int n = flag.n();
  const MatC one_plus =
      MatC::Identity(n, n) + static_cast<double>(sign) * u;

  // Threshold scale from the unrestricted matrix, floored at 1 so a zero
  // matrix still classifies cleanly.
  const double smax =
      Eigen::JacobiSVD<MatC>(one_plus).singularValues().maxCoeff();
  const double cut = tol * std::max(smax, 1.0);

  KernelProfile prof;
  prof.sign = sign;
  prof.dims.assign(n + 1, 0);
  for (int m = 0; m < n; ++m) {
    const MatC restricted = one_plus * flag.subspace(m);
    const auto svs = Eigen::JacobiSVD<MatC>(restricted).singularValues();
    int small = 0;
    for (int i = 0; i < svs.size(); ++i)
      if (svs(i) < cut) ++small;
    prof.dims[m] = small;
  }
  prof.dims[n] = 0;
  return prof;
}

std::optional<IndexSet> classify_profile(const KernelProfile& profile) {
  const int n = static_cast<int>(profile.dims.size()) - 1;
  IndexSet I;
  for (int m = 1; m <= n; ++m) {
    const int drop = profile.dims[m - 1] - profile.dims[m];
    if (drop < 0 || drop >= 2) return std::nullopt;
    if (drop == 1) I.entries.push_back(m);
  }
  if (static_cast<int>(I.entries.size()) != profile.dims[0]) return std::nullopt;
  return I;
}

std::optional<IndexSet> incidence_classify(const MatC& u, const Flag& flag,
                                           double tol) {
  return classify_profile(kernel_profile(u, flag, +1, tol));
}

int unstable_dim(const IndexSet& I, int n) {
  I.validate(n);
  int d = 0;
  for (int i : I.entries) d += 2 * i - 1;
  return d;
}

int morse_index(const IndexSet& I, const Flag& flag, const VecR& a_diag) {
  const int n = flag.n();
  I.validate(n);
  if (a_diag.size() != n)
    throw std::invalid_argument("morse_index: coefficient size mismatch");

  // Everything is diagonal in the flag basis, so work there: U_I = diag(s),
  // A = diag(a). Hessian quadratic form Q(H) = Re tr(A U_I H^2) on the real
  // n^2-dimensional space of anti-hermitian H.
  VecR s = VecR::Ones(n);
  for (int i : I.entries) s(i - 1) = -1.0;

  std::vector<MatC> basis;
  basis.reserve(n * n);
  for (int p = 0; p < n; ++p) {
    MatC h = MatC::Zero(n, n);
    h(p, p) = kI;
    basis.push_back(h);
  }
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      MatC h = MatC::Zero(n, n);
      h(p, q) = 1.0;
      h(q, p) = -1.0;
      basis.push_back(h);
      h = MatC::Zero(n, n);
      h(p, q) = kI;
      h(q, p) = kI;
      basis.push_back(h);
    }

  const int d = static_cast<int>(basis.size());
  MatC au = MatC::Zero(n, n);
  for (int i = 0; i < n; ++i) au(i, i) = a_diag(i) * s(i);

  MatR q(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      const Complex tr =
          (au * (basis[a] * basis[b] + basis[b] * basis[a])).trace();
      q(a, b) = q(b, a) = 0.5 * tr.real();
    }

  Eigen::SelfAdjointEigenSolver<MatR> es(q);
  int positive = 0;
  for (int i = 0; i < d; ++i) {
    const double ev = es.eigenvalues()(i);
    if (std::abs(ev) <= 1e-9)
      throw DegenerateHessian(
          "morse_index: eigenvalue within 1e-9 of zero (repeated "
          "coefficients?)");
    if (ev > 0) ++positive;
  }
  return positive;
}

MatC symplectic_reduce(const MatC& u, const ReductionSplit& split) {
  require_unitary(u, 1e-9, "symplectic_reduce");
  split.validate();
  if (u.rows() != split.w_basis.rows())
    throw std::invalid_argument("symplectic_reduce: size mismatch");

  const MatC& w = split.w_basis;
  const MatC& p = split.perp_basis;
  const MatC x = w.adjoint() * u * w;
  const MatC y = w.adjoint() * u * p;
  const MatC z = p.adjoint() * u * w;
  const MatC t = p.adjoint() * u * p;

  const auto pdim = x.rows();
  const MatC one_plus_x = MatC::Identity(pdim, pdim) + x;
  Eigen::JacobiSVD<MatC> svd(one_plus_x, Eigen::ComputeThinU |
                                              Eigen::ComputeThinV);
  if (pdim > 0 && svd.singularValues().minCoeff() <= 1e-9)
    throw NotInDomain("symplectic_reduce: 1 + X singular, kernel meets W");

  if (pdim == 0) return t;
  return t - z * one_plus_x.partialPivLu().solve(y);
}

MatC unitary_with_spectrum(const VecC& eigenvalues, const MatC& eigenvectors) {
  const auto n = eigenvectors.rows();
  if (eigenvectors.cols() != n || eigenvalues.size() != n)
    throw std::invalid_argument("unitary_with_spectrum: size mismatch");
  for (int i = 0; i < n; ++i)
    if (std::abs(std::abs(eigenvalues(i)) - 1.0) > 1e-9)
      throw std::invalid_argument(
          "unitary_with_spectrum: eigenvalue off the unit circle");
  if (!is_orthonormal(eigenvectors, 1e-9))
    throw InvalidFrame("unitary_with_spectrum: eigenvector frame");
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
}

}  // namespace mcl::spectral
