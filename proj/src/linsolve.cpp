#include "fracmix/linsolve.hpp"

#include <algorithm>
#include <cmath>

namespace fracmix {

namespace {

LinearSolveResult dense_solve(const GagliardoForm& form, const Eigen::LLT<Eigen::MatrixXd>& llt,
                              const Eigen::VectorXd& b, double tol) {
  const Eigen::MatrixXd& A = form.matrix();
  LinearSolveResult out;
  out.dense = true;
  out.u = llt.solve(b);
  const double bn = b.norm();
  Eigen::VectorXd r = b - A * out.u;
  out.relative_residual = r.norm() / bn;
  // A couple of refinement sweeps recover digits lost to conditioning.
  for (int k = 0; k < 3 && out.relative_residual > tol; ++k) {
    out.u += llt.solve(r);
    r = b - A * out.u;
    out.relative_residual = r.norm() / bn;
    ++out.iterations;
  }
  return out;
}

// Preconditioned conjugate residual with the Jacobi preconditioner. The
// residual decreases monotonically in the M^{-1} norm.
LinearSolveResult pcr_solve(const GagliardoForm& form, const Eigen::VectorXd& b, const SolveOptions& opts) {
  const Eigen::MatrixXd& A = form.matrix();
  const Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  LinearSolveResult out;
  out.u = Eigen::VectorXd::Zero(b.size());
  const double bn = b.norm();
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd Az = A * z;
  Eigen::VectorXd p = z;
  Eigen::VectorXd Ap = Az;
  double zAz = z.dot(Az);
  out.history.push_back(std::sqrt(r.dot(z)));
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd MAp = dinv.cwiseProduct(Ap);
    const double denom = Ap.dot(MAp);
    if (!(denom > 0.0)) break;
    const double alpha = zAz / denom;
    out.u += alpha * p;
    r -= alpha * Ap;
    z -= alpha * MAp;
    out.iterations = it;
    out.history.push_back(std::sqrt(std::max(0.0, r.dot(z))));
    if (r.norm() <= opts.tol * bn) break;
    Az.noalias() = A * z;
    const double zAz_new = z.dot(Az);
    const double beta = zAz_new / zAz;
    zAz = zAz_new;
    p = z + beta * p;
    Ap = Az + beta * Ap;
  }
  out.relative_residual = (b - A * out.u).norm() / bn;
  if (!(out.relative_residual <= opts.tol)) {
    throw NumericalError("iterative solver did not converge: relative residual " +
                             std::to_string(out.relative_residual),
                         out.history);
  }
  return out;
}

}  // namespace

LinearSolveResult solve_system(const GagliardoForm& form, const Eigen::VectorXd& b, const SolveOptions& opts) {
  if (b.size() != form.size()) throw std::invalid_argument("right-hand side size mismatch");
  if (!form.discretization().dirichlet_present) {
    throw UnsupportedConfiguration("pure Neumann exterior: the linear problem is not coercive");
  }
  if (!b.allFinite()) throw std::domain_error("right-hand side is not finite");
  if (!(opts.tol > 0.0)) throw ConfigurationError("tolerance must be positive");
  if (b.norm() == 0.0) {
    LinearSolveResult out;
    out.u = Eigen::VectorXd::Zero(b.size());
    out.dense = true;
    return out;
  }
  const bool small = form.size() <= opts.dense_threshold;
  if (opts.method == LinearMethod::iterative || (opts.method == LinearMethod::automatic && !small)) {
    return pcr_solve(form, b, opts);
  }
  if (form.size() <= opts.dense_threshold) {
    if (const auto* llt = form.factor()) return dense_solve(form, *llt, b, opts.tol);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(form.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("dense factorization failed");
  return dense_solve(form, llt, b, opts.tol);
}

LinearSolveResult solve_linear(const GagliardoForm& form, const Field& f, const SolveOptions& opts) {
  if (f.size() != form.size()) throw std::invalid_argument("right-hand side size mismatch");
  return solve_system(form, form.mass().cwiseProduct(f), opts);
}

EigenPair min_eigen(const Eigen::MatrixXd& A, const Eigen::VectorXd& weight, const Eigen::VectorXd& mass,
                    const EigenOptions& opts) {
  const long n = A.rows();
  if (weight.size() != n || mass.size() != n) throw std::invalid_argument("eigen weight size mismatch");
  if (!weight.allFinite() || (weight.array() < 0.0).any()) {
    throw std::invalid_argument("eigen weight must be finite and nonnegative");
  }
  if (!mass.allFinite() || (mass.array() <= 0.0).any()) throw std::invalid_argument("eigen mass must be positive");
  const Eigen::VectorXd isq = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd C = isq.asDiagonal() * A * isq.asDiagonal();
  C.diagonal() -= weight;
  C = 0.5 * (C + C.transpose()).eval();

  // Bracket the bottom of the spectrum: Gershgorin below, a Rayleigh quotient above.
  double lo = kInf;
  for (long i = 0; i < n; ++i) lo = std::min(lo, C(i, i) - (C.row(i).cwiseAbs().sum() - std::abs(C(i, i))));
  Eigen::VectorXd x = mass.cwiseSqrt().normalized();
  double hi = x.dot(C * x);
  hi = std::min(hi, C.diagonal().minCoeff());
  // Successful Cholesky certifies the shift lies below the smallest eigenvalue.
  const int sweeps = n > 600 ? 24 : 48;
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  Eigen::MatrixXd shifted(n, n);
  for (int k = 0; k < sweeps && hi - lo > 1e-13 * scale; ++k) {
    const double mid = 0.5 * (lo + hi);
    shifted = C;
    shifted.diagonal().array() -= mid;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double sigma = lo;
  shifted = C;
  shifted.diagonal().array() -= sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  while (llt.info() != Eigen::Success) {
    sigma -= 1e-8 * scale;
    shifted = C;
    shifted.diagonal().array() -= sigma;
    llt.compute(shifted);
  }

  EigenPair out;
  double mu = x.dot(C * x);
  for (int it = 1; it <= opts.max_iter; ++it) {
    x = llt.solve(x);
    x.normalize();
    const Eigen::VectorXd Cx = C * x;
    mu = x.dot(Cx);
    out.residual = (Cx - mu * x).norm() / std::max(1.0, std::abs(mu));
    out.iterations = it;
    if (out.residual <= 1e-2 * opts.tol) break;
  }
  if (!(out.residual <= opts.tol)) {
    throw NumericalError("inverse iteration did not converge: residual " + std::to_string(out.residual));
  }
  if (x.sum() < 0.0) x = -x;
  out.value = mu;
  out.vector = isq.cwiseProduct(x);
  return out;
}

EigenPair min_eigen(const GagliardoForm& form, const Eigen::VectorXd& weight, const EigenOptions& opts) {
  return min_eigen(form.matrix(), weight, form.mass(), opts);
}

SobolevEstimate sobolev_constant(const GagliardoForm& form, double r) {
  if (!(r >= 2.0) || !std::isfinite(r)) throw std::invalid_argument("Sobolev exponent must be finite and >= 2");
  const Eigen::ArrayXd w = form.mass().array();
  auto rnorm = [&](const Eigen::VectorXd& u) { return std::pow((w * u.array().abs().pow(r)).sum(), 1.0 / r); };
  SobolevEstimate out;
  Eigen::VectorXd u = solve_linear(form, Eigen::VectorXd::Ones(form.size())).u;
  u /= rnorm(u);
  double best = form.energy_norm_sq(u);
  out.minimizer = u;
  // Nonlinear inverse power iteration; the quotient is nonincreasing.
  for (int it = 1; it <= 2000; ++it) {
    const Eigen::VectorXd src = (w * u.array().abs().pow(r - 2.0) * u.array()).matrix();
    u = solve_system(form, src).u;
    u /= rnorm(u);
    const double value = form.energy_norm_sq(u);
    out.iterations = it;
    const bool stalled = best - value <= 1e-13 * best;
    if (value < best) {
      best = value;
      out.minimizer = u;
    }
    if (stalled) break;
  }
  out.constant = best;
  return out;
}

StampacchiaBound stampacchia_linfty_bound(const GagliardoForm& form, const Field& f, double m) {
  const Discretization& d = form.discretization();
  const int N = d.dimension();
  const double s = d.kernel.s;
  if (!(m > N / (2.0 * s))) throw std::invalid_argument("integrability exponent must exceed N/(2s)");
  if (f.size() != form.size()) throw std::invalid_argument("right-hand side size mismatch");
  StampacchiaBound out;
  // With N == 2s every finite exponent embeds; pick one that keeps beta > 1.
  out.exponent = N > 2.0 * s ? 2.0 * N / (N - 2.0 * s)
                             : std::max(4.0, std::isfinite(m) ? 4.0 * m / (m - 1.0) : 4.0);
  const double r = out.exponent;
  const double inv_m = std::isfinite(m) ? 1.0 / m : 0.0;
  out.beta = r * (1.0 - 1.0 / r - inv_m);
  if (!(out.beta > 1.0)) throw std::invalid_argument("level-set exponent does not exceed 1");
  const Eigen::ArrayXd w = form.mass().array();
  const double fm = std::isfinite(m) ? std::pow((w * f.array().abs().pow(m)).sum(), 1.0 / m)
                                     : f.cwiseAbs().maxCoeff();
  if (fm == 0.0) return out;
  out.sobolev = sobolev_constant(form, r).constant;
  const double beta = out.beta;
  out.bound = fm / out.sobolev * std::pow(d.omega_measure(), (beta - 1.0) / r) * std::pow(2.0, beta / (beta - 1.0));
  return out;
}

}  // namespace fracmix
