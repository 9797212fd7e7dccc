#include "mcl/unitary_flow.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace mcl::uflow {

FlowConfig::FlowConfig(int n_, VecR a_, spectral::Flag flag_)
    : n(n_), a(std::move(a_)), flag(std::move(flag_)) {
  if (flag.n() != n || a.size() != n)
    throw std::invalid_argument("FlowConfig: size mismatch");
  for (int i = 0; i < n; ++i) {
    if (a(i) <= 0.0)
      throw std::invalid_argument("FlowConfig: coefficients must be positive");
    if (i > 0 && a(i) <= a(i - 1))
      throw std::invalid_argument(
          "FlowConfig: coefficients must strictly increase");
  }
}

FlowConfig FlowConfig::standard(int n) {
  VecR a(n);
  for (int i = 0; i < n; ++i) a(i) = i + 1;
  return FlowConfig(n, std::move(a), spectral::Flag::standard(n));
}

namespace {

MatC coeff_matrix(const FlowConfig& cfg, const VecR& diag) {
  return cfg.flag.basis() * diag.asDiagonal().toDenseMatrix().cast<Complex>() *
         cfg.flag.basis().adjoint();
}

// One closed-form step of the flow; |t| expected moderate.
MatC flow_step(const FlowConfig& cfg, const MatC& u, double t) {
  VecR sh(cfg.n), ch(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    sh(i) = std::sinh(t * cfg.a(i));
    ch(i) = std::cosh(t * cfg.a(i));
  }
  const MatC s = coeff_matrix(cfg, sh);
  const MatC c = coeff_matrix(cfg, ch);
  const MatC den = c + s * u;
  const auto svs = Eigen::JacobiSVD<MatC>(den).singularValues();
  const double smin = svs.minCoeff(), smax = svs.maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e12)
    throw NumericalBreakdown(
        "flow_at: denominator condition exceeds 1e12 in a single step");
  // Right division (s + c u) den^{-1} via the transposed system.
  const MatC num = s + c * u;
  const MatC raw = den.transpose()
      .partialPivLu()
      .solve(num.transpose())
      .transpose();
  // Snap back to the group through the polar factor. The ambient dynamics
  // expands directions transverse to the unitary group near every saddle
  // (rate up to e^{2 a_n} per unit time), so composed steps otherwise carry
  // rounding off the group exponentially fast.
  Eigen::JacobiSVD<MatC> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

double f_value(const FlowConfig& cfg, const MatC& u) {
  require_unitary(u, 1e-9, "f_value");
  return (coeff_matrix(cfg, cfg.a) * u).trace().real();
}

MatC gradient(const FlowConfig& cfg, const MatC& u) {
  require_unitary(u, 1e-9, "gradient");
  const MatC a = coeff_matrix(cfg, cfg.a);
  return a - u * a * u;
}

MatC flow_at(const FlowConfig& cfg, const MatC& u, double t) {
  require_unitary(u, 1e-9, "flow_at");
  if (u.rows() != cfg.n) throw std::invalid_argument("flow_at: size mismatch");

  // Compose unit-size increments; the hyperbolic factors of a single long
  // step overflow and the denominator degenerates.
  MatC cur = u;
  double remaining = t;
  const double step_cap = 1.0;
  while (std::abs(remaining) > 1e-15) {
    const double step =
        std::copysign(std::min(std::abs(remaining), step_cap), remaining);
    cur = flow_step(cfg, cur, step);
    remaining -= step;
  }
  return cur;
}

LimitResult flow_limit(const FlowConfig& cfg, const MatC& u, double tol,
                       double horizon) {
  require_unitary(u, 1e-9, "flow_limit");
  const auto subsets = spectral::IndexSet::all_subsets(cfg.n);
  std::vector<MatC> crits;
  crits.reserve(subsets.size());
  for (const auto& I : subsets)
    crits.push_back(spectral::critical_point(I, cfg.flag));

  MatC cur = u;
  double t = 0.0;
  while (true) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < crits.size(); ++i) {
      const double d = (cur - crits[i]).norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    if (best_dist < tol)
      return LimitResult{subsets[best], t, best_dist};
    if (t >= horizon)
      throw SlowConvergence("flow_limit: horizon " + std::to_string(horizon) +
                            " reached, nearest distance " +
                            std::to_string(best_dist));
    cur = flow_at(cfg, cur, 1.0);
    t += 1.0;
  }
}

}  // namespace mcl::uflow
