#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mcl/linalg.hpp"
#include "mcl/rng.hpp"
#include "mcl/spectral.hpp"
#include "mcl/unitary_flow.hpp"

using namespace mcl;
using spectral::Flag;
using spectral::IndexSet;

TEST_CASE("flag basics and validation") {
  const Flag f = Flag::standard(3);
  CHECK(f.n() == 3);
  CHECK((f.vector(1) - VecC::Unit(3, 0)).norm() == 0.0);
  CHECK(f.subspace(1).cols() == 2);
  CHECK(f.subspace(3).cols() == 0);

  MatC bad = MatC::Identity(2, 2);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS((void)Flag(bad), InvalidFrame);
}

TEST_CASE("index sets enumerate and validate") {
  const auto all = IndexSet::all_subsets(3);
  CHECK(all.size() == 8);
  CHECK(all.front().entries.empty());

  IndexSet bad{2, 1};
  CHECK_THROWS_AS(bad.validate(3), InvalidIndexSet);
  IndexSet out_of_range{4};
  CHECK_THROWS_AS(out_of_range.validate(3), InvalidIndexSet);
  IndexSet ok{1, 3};
  CHECK_NOTHROW(ok.validate(3));
  CHECK(ok.contains(3));
  CHECK(!ok.contains(2));
}

TEST_CASE("critical points in the flag basis") {
  const Flag f = Flag::standard(2);
  const MatC u1 = spectral::critical_point(IndexSet{1}, f);
  MatC want(2, 2);
  want << -1, 0, 0, 1;
  CHECK((u1 - want).norm() < 1e-15);
  CHECK((spectral::critical_point(IndexSet{}, f) - MatC::Identity(2, 2))
            .norm() < 1e-15);
  CHECK_THROWS_AS(spectral::critical_point(IndexSet{3}, f), InvalidIndexSet);
}

TEST_CASE("kernel profiles and classification") {
  const Flag f3 = Flag::standard(3);

  VecC d(3);
  d << -1, -1, 1;
  const auto prof = spectral::kernel_profile(d.asDiagonal().toDenseMatrix(),
                                             f3, +1);
  REQUIRE(prof.dims.size() == 4);
  CHECK(prof.dims[0] == 2);
  CHECK(prof.dims[1] == 1);
  CHECK(prof.dims[2] == 0);
  const auto cls = spectral::classify_profile(prof);
  REQUIRE(cls.has_value());
  CHECK(*cls == IndexSet{1, 2});

  // Eigenvector tilted out of the flag line: kernel avoids W_1.
  MatC v(2, 2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0),
      -1.0 / std::sqrt(2.0);
  VecC ev(2);
  ev << -1, 1;
  const MatC u = spectral::unitary_with_spectrum(ev, v);
  const auto cls2 = spectral::incidence_classify(u, Flag::standard(2));
  REQUIRE(cls2.has_value());
  CHECK(*cls2 == IndexSet{1});

  // A drop of two in one step cannot be read as a stratum label.
  spectral::KernelProfile ambiguous;
  ambiguous.dims = {2, 0, 0};
  CHECK(!spectral::classify_profile(ambiguous).has_value());

  spectral::KernelProfile empty;
  empty.dims = {0, 0, 0};
  const auto cls3 = spectral::classify_profile(empty);
  REQUIRE(cls3.has_value());
  CHECK(cls3->entries.empty());

  CHECK_THROWS_AS(
      spectral::kernel_profile((2.0 * MatC::Identity(2, 2)).eval(), Flag::standard(2), +1),
      NotUnitary);
}

TEST_CASE("prescribed spectrum construction") {
  MatC v(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  v << r, r, r, -r;
  VecC ev(2);
  ev << -1, 1;
  const MatC u = spectral::unitary_with_spectrum(ev, v);
  MatC want(2, 2);
  want << 0, -1, -1, 0;
  CHECK((u - want).norm() < 1e-14);

  VecC off(2);
  off << 2.0, 1.0;
  CHECK_THROWS_AS(spectral::unitary_with_spectrum(off, v),
                  std::invalid_argument);
  MatC skew = v;
  skew(0, 0) = 0.9;
  CHECK_THROWS_AS(spectral::unitary_with_spectrum(ev, skew), InvalidFrame);
}

TEST_CASE("unstable dimension closed form") {
  CHECK(spectral::unstable_dim(IndexSet{}, 3) == 0);
  CHECK(spectral::unstable_dim(IndexSet{1}, 3) == 1);
  CHECK(spectral::unstable_dim(IndexSet{2}, 3) == 3);
  CHECK(spectral::unstable_dim(IndexSet{1, 2, 3}, 3) == 9);
}

namespace {

// Independent Hessian oracle: second difference of the objective
// f(U) = Re tr(A U) along one-parameter subgroups exp(t H) U_I through a
// fixed anti-hermitian basis, diagonalized as a quadratic form.
int hessian_positive_count(const IndexSet& I, int n, const VecR& a) {
  const Flag f = Flag::standard(n);
  const MatC ui = spectral::critical_point(I, f);
  const MatC amat = a.cast<Complex>().asDiagonal();

  std::vector<MatC> basis;
  for (int i = 0; i < n; ++i) {
    MatC h = MatC::Zero(n, n);
    h(i, i) = kI;
    basis.push_back(h);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MatC h = MatC::Zero(n, n);
      h(i, j) = 1.0;
      h(j, i) = -1.0;
      basis.push_back(h / std::sqrt(2.0));
      h(i, j) = kI;
      h(j, i) = kI;
      basis.push_back(h / std::sqrt(2.0));
    }

  auto f_at = [&](const MatC& u) { return (amat * u).trace().real(); };
  auto q = [&](const MatC& h) {
    const double t = 1e-4;
    const MatC fwd = expm((t * h).eval()) * ui;
    const MatC bwd = expm((-t * h).eval()) * ui;
    return (f_at(fwd) - 2.0 * f_at(ui) + f_at(bwd)) / (t * t);
  };

  const int dim = static_cast<int>(basis.size());
  MatR gram(dim, dim);
  for (int aidx = 0; aidx < dim; ++aidx)
    for (int b = aidx; b < dim; ++b) {
      const double qpp = q((basis[aidx] + basis[b]).eval());
      const double qmm = q((basis[aidx] - basis[b]).eval());
      gram(aidx, b) = gram(b, aidx) = (qpp - qmm) / 4.0;
    }
  Eigen::SelfAdjointEigenSolver<MatR> es(gram);
  int positive = 0;
  for (int i = 0; i < dim; ++i)
    if (es.eigenvalues()(i) > 1e-6) ++positive;
  return positive;
}

}  // namespace

TEST_CASE("morse index matches the finite-difference Hessian") {
  for (int n = 2; n <= 3; ++n) {
    const auto cfg = uflow::FlowConfig::standard(n);
    for (const auto& I : IndexSet::all_subsets(n)) {
      const int direct = spectral::morse_index(I, cfg.flag, cfg.a);
      CHECK(direct == hessian_positive_count(I, n, cfg.a));
      CHECK(direct == spectral::unstable_dim(I, n));
    }
  }
}

TEST_CASE("morse index rejects degenerate coefficient tables") {
  VecR a(2);
  a << 1.0, 1.0;
  CHECK_THROWS_AS(spectral::morse_index(IndexSet{1}, Flag::standard(2), a),
                  DegenerateHessian);
}

TEST_CASE("reduction exact cases and raw block formula") {
  MatC swap(2, 2);
  swap << 0, 1, 1, 0;
  spectral::ReductionSplit split;
  split.w_basis = MatC::Identity(2, 2).leftCols(1);
  split.perp_basis = MatC::Identity(2, 2).rightCols(1);
  const MatC r = spectral::symplectic_reduce(swap, split);
  REQUIRE(r.rows() == 1);
  CHECK(std::abs(r(0, 0) - Complex(-1, 0)) < 1e-14);

  CHECK_THROWS_AS(
      spectral::symplectic_reduce((-MatC::Identity(2, 2)).eval(), split),
      NotInDomain);

  // Random splits against the compression formula written out inline.
  for (int trial = 0; trial < 25; ++trial) {
    CounterRng rng(99, trial);
    const int n = 3 + static_cast<int>(rng.next_u64() % 3);
    const int p = 1 + static_cast<int>(rng.next_u64() % (n - 1));
    const MatC u = haar_unitary(n, rng);
    const MatC frame = haar_unitary(n, rng);
    spectral::ReductionSplit s;
    s.w_basis = frame.leftCols(p);
    s.perp_basis = frame.rightCols(n - p);

    const MatC x = s.w_basis.adjoint() * u * s.w_basis;
    const MatC y = s.w_basis.adjoint() * u * s.perp_basis;
    const MatC z = s.perp_basis.adjoint() * u * s.w_basis;
    const MatC t = s.perp_basis.adjoint() * u * s.perp_basis;
    const MatC inv = (MatC::Identity(p, p) + x).inverse();
    const MatC oracle = t - z * inv * y;

    const MatC red = spectral::symplectic_reduce(u, s);
    CHECK((red - oracle).norm() < 1e-10);
    CHECK(unitarity_residual(red) < 1e-10);
  }
}

TEST_CASE("reduction split validation") {
  spectral::ReductionSplit s;
  s.w_basis = MatC::Identity(3, 3).leftCols(2);
  s.perp_basis = MatC::Identity(3, 3).leftCols(1);  // not orthogonal to W
  CHECK_THROWS_AS(s.validate(), InvalidFrame);
}

TEST_CASE("kernel dimension survives reduction by a tail subspace") {
  CounterRng rng(7, 0);
  // Eigenvalue -1 with eigenvector inside the kept coordinates.
  VecC v = VecC::Zero(4);
  v(0) = std::cos(0.4);
  v(1) = std::sin(0.4) * std::exp(kI * 0.3);
  Eigen::HouseholderQR<MatC> qr(v);
  MatC q = qr.householderQ();
  MatC vecs(4, 4);
  vecs.col(0) = v;
  vecs.rightCols(3) = q.rightCols(3) * haar_unitary(3, rng);
  VecC ev(4);
  ev << Complex(-1, 0), std::exp(kI * 0.9), std::exp(kI * 2.0),
      std::exp(kI * -1.2);
  const MatC u = spectral::unitary_with_spectrum(ev, vecs);

  spectral::ReductionSplit split;
  split.w_basis = MatC::Identity(4, 4).rightCols(2);
  split.perp_basis = MatC::Identity(4, 4).leftCols(2);
  const MatC red = spectral::symplectic_reduce(u, split);
  const auto before = spectral::kernel_profile(u, Flag::standard(4), +1);
  const auto after = spectral::kernel_profile(red, Flag::standard(2), +1);
  CHECK(before.dims[0] == 1);
  CHECK(after.dims[0] == 1);
}
