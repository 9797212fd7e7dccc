#include "mcl/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

MatR expm(const MatR& a) {
  if (a.rows() == 0) return a;
  return a.exp();
}
MatC expm(const MatC& a) {
  if (a.rows() == 0) return a;
  return a.exp();
}

double unitarity_residual(const MatC& u) {
  const MatC gram = u.adjoint() * u;
  return (gram - MatC::Identity(u.cols(), u.cols())).norm();
}

void require_unitary(const MatC& u, double tol, const char* who) {
  if (u.rows() != u.cols())
    throw NotUnitary(std::string(who) + ": matrix is not square");
  const double r = unitarity_residual(u);
  if (!(r <= tol))
    throw NotUnitary(std::string(who) + ": unitarity residual " +
                     std::to_string(r));
}

bool is_orthonormal(const MatC& v, double tol) {
  const MatC gram = v.adjoint() * v;
  return (gram - MatC::Identity(v.cols(), v.cols())).norm() <= tol;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

MatC haar_unitary(int n, CounterRng& rng) {
  MatC z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = rng.normal_complex();
  Eigen::HouseholderQR<MatC> qr(z);
  MatC q = qr.householderQ();
  const MatC r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    const double m = std::abs(d);
    q.col(j) *= (m > 0) ? d / m : Complex(1, 0);
  }
  return q;
}

}  // namespace mcl
