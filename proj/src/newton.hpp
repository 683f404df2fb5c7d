#pragma once

#include <cmath>

#include <Eigen/LU>

#include "fracmix/nonlinear.hpp"

namespace fracmix::detail {

// Newton on A u - W F(u) = 0 with the Jacobian A - W F'(u), which may be
// indefinite; the step is damped until the sup residual drops.
template <class Source, class Slope>
NewtonResult damped_newton(const GagliardoForm& form, Field u, const Source& source, const Slope& slope,
                           double tol, int max_iter) {
  const Eigen::MatrixXd& A = form.matrix();
  const Eigen::VectorXd& w = form.mass();
  const long n = u.size();
  auto residual_vec = [&](const Field& v) {
    Eigen::VectorXd r = A * v;
    for (long i = 0; i < n; ++i) r[i] -= w[i] * source(v[i]);
    return r;
  };
  auto sup = [&](const Eigen::VectorXd& r) { return r.cwiseQuotient(w).cwiseAbs().maxCoeff(); };
  NewtonResult out;
  Eigen::VectorXd r = residual_vec(u);
  out.residual = sup(r);
  Eigen::MatrixXd J(n, n);
  for (int it = 0; it < max_iter && out.residual > tol; ++it) {
    J = A;
    for (long i = 0; i < n; ++i) J(i, i) -= w[i] * slope(u[i]);
    const Eigen::VectorXd du = J.partialPivLu().solve(-r);
    if (!du.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-6) {
      Field trial = u + alpha * du;
      Eigen::VectorXd rt = residual_vec(trial);
      const double res = sup(rt);
      if (std::isfinite(res) && res < (1.0 - 1e-4 * alpha) * out.residual) {
        u = std::move(trial);
        r = std::move(rt);
        out.residual = res;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.converged = out.residual <= tol;
  out.u = std::move(u);
  return out;
}

}  // namespace fracmix::detail
