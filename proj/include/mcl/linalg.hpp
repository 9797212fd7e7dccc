#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mcl {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Matrix exponential (scaling and squaring, Pade order 13). Thin wrapper so
// callers do not depend on the backing implementation.
MatR expm(const MatR& a);
MatC expm(const MatC& a);

// Frobenius distance from unitarity, |U*U - I|_F.
double unitarity_residual(const MatC& u);

// Throws NotUnitary if unitarity_residual(u) > tol.
void require_unitary(const MatC& u, double tol, const char* who);

// Columns orthonormal within tol (Frobenius norm of V*V - I).
bool is_orthonormal(const MatC& v, double tol);

// Exact factorial as double; n <= 18 stays integer-exact in 53 bits.
double factorial(int n);

}  // namespace mcl
