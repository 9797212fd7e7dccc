#pragma once

#include <optional>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/linalg.hpp"

namespace mcl::spectral {

// ============================================================================
// Flags, index sets, kernel profiles
// ============================================================================

// Complete flag W_0 > W_1 > ... > W_n = 0 on C^n, stored as an orthonormal
// basis e_1..e_n (columns); W_m = span{e_{m+1}, ..., e_n}.
class Flag {
 public:
  explicit Flag(MatC basis);
  static Flag standard(int n);

  int n() const { return static_cast<int>(basis_.cols()); }
  const MatC& basis() const { return basis_; }
  VecC vector(int i) const;   // e_i, 1-based
  MatC subspace(int m) const; // orthonormal basis of W_m, n x (n-m)

 private:
  MatC basis_;
};

// Strictly increasing subset I of {1..n}; indices are 1-based.
struct IndexSet {
  std::vector<int> entries;

  IndexSet() = default;
  IndexSet(std::initializer_list<int> v) : entries(v) {}
  explicit IndexSet(std::vector<int> v) : entries(std::move(v)) {}

  void validate(int n) const;
  bool contains(int i) const;
  bool operator==(const IndexSet& o) const { return entries == o.entries; }

  static std::vector<IndexSet> all_subsets(int n);
};

// dims[m] = dim(Ker(1 + sign*U) cap W_m), m = 0..n.
struct KernelProfile {
  std::vector<int> dims;
  int sign = +1;
};

// Splitting C^n = W + Wperp by two mutually orthogonal orthonormal frames.
struct ReductionSplit {
  MatC w_basis;     // n x p
  MatC perp_basis;  // n x q, p + q = n

  void validate() const;  // InvalidFrame on any violation
};

// ============================================================================
// Operations
// ============================================================================

// The critical point -id on span{e_i : i in I} and +id on the complement,
// expressed in the flag basis. InvalidIndexSet on malformed I.
MatC critical_point(const IndexSet& I, const Flag& flag);

// Kernel dimension profile of 1 + sign*U along the flag. Singular values
// below tol * max(sigma_max(1 + sign*U), 1) count as zero. NotUnitary if U
// fails the unitarity check at 1e-9.
KernelProfile kernel_profile(const MatC& u, const Flag& flag, int sign,
                             double tol = 1e-7);

// Reads the stratum off a raw profile: d_0 = |I| and d drops by exactly one
// at each m in I. nullopt when a step drops by two or more (tolerance-
// ambiguous input).
std::optional<IndexSet> classify_profile(const KernelProfile& profile);

// classify_profile(kernel_profile(u, flag, +1, tol)).
std::optional<IndexSet> incidence_classify(const MatC& u, const Flag& flag,
                                           double tol = 1e-7);

// Codimension of the stratum labeled I, sum of (2i - 1) over i in I. Equals
// the dimension of the unstable set of the critical point U_I.
int unstable_dim(const IndexSet& I, int n);

// Number of positive eigenvalues of the Hessian quadratic form
// H |-> Re tr(A U_I H^2) on anti-hermitian H, computed in the flag basis.
// a_diag holds the diagonal of A (the flow's coefficient matrix).
// DegenerateHessian if some Hessian eigenvalue is within 1e-9 of zero
// (signals repeated entries in a_diag).
int morse_index(const IndexSet& I, const Flag& flag, const VecR& a_diag);

// Compression T - Z (1+X)^{-1} Y of U = [[X,Y],[Z,T]] with respect to the
// split; returns a unitary on Wperp. NotInDomain when 1+X is singular
// (smallest singular value <= 1e-9).
MatC symplectic_reduce(const MatC& u, const ReductionSplit& split);

// Unitary with prescribed spectrum: V diag(eigenvalues) V*. InvalidFrame if
// the eigenvector frame is not orthonormal, std::invalid_argument if some
// |eigenvalue| differs from 1 by more than 1e-9.
MatC unitary_with_spectrum(const VecC& eigenvalues, const MatC& eigenvectors);

}  // namespace mcl::spectral
