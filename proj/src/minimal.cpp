#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracmix/nonlinear.hpp"

namespace fracmix {

namespace {

Eigen::VectorXd source_term(const ProblemParams& params, const Field& v) {
  const Eigen::ArrayXd vp = v.array().max(0.0);
  return (params.lambda * vp.pow(params.q) + vp.pow(params.p)).matrix();
}

void annotate(const GagliardoForm& form, const ProblemParams& params, SolutionRecord& rec) {
  rec.lambda = params.lambda;
  rec.residual = strong_residual(form, params, rec.field);
  rec.energy = energy_J(form, params, rec.field);
  rec.sup_norm = rec.field.cwiseAbs().maxCoeff();
}

}  // namespace

IterateResult monotone_iterate(const GagliardoForm& form, const ProblemParams& params, const Field& v0,
                               const Field* cap, const NonlinearOptions& opts, bool keep_history) {
  params.validate();
  if (v0.size() != form.size()) throw std::invalid_argument("initial field size mismatch");
  if ((v0.array() < 0.0).any()) throw std::invalid_argument("initial field must be nonnegative");
  if (cap && cap->size() != form.size()) throw std::invalid_argument("cap field size mismatch");
  const Eigen::VectorXd& w = form.mass();
  const double threshold = opts.blowup_factor * (1.0 + v0.maxCoeff());
  IterateResult out;
  Field v = v0;
  if (keep_history) out.history.push_back(v);
  double sup = v.maxCoeff();
  for (int n = 1; n <= opts.max_iterations; ++n) {
    Field next = solve_system(form, w.cwiseProduct(source_term(params, v))).u;
    const double next_sup = next.cwiseAbs().maxCoeff();
    if (cap) {
      const double excess = (next - *cap).maxCoeff();
      if (excess > 1e-10 * (1.0 + cap->cwiseAbs().maxCoeff())) {
        std::ostringstream msg;
        msg << "iterate " << n << " exceeds the supersolution cap by " << excess;
        throw ComparisonFailure(msg.str());
      }
    }
    const double step = (next - v).cwiseAbs().maxCoeff();
    const bool growing = next_sup > sup;
    v = std::move(next);
    sup = next_sup;
    if (keep_history) out.history.push_back(v);
    out.record.iterations = n;
    if (!std::isfinite(sup) || sup > threshold) {
      out.diagnostic = "sup norm exceeded the blow-up threshold";
      out.record.sup_norm = sup;
      return out;
    }
    if (step < opts.step_tol * std::max(1.0, sup)) {
      out.status = IterateStatus::converged;
      out.record.kind = SolutionKind::minimal;
      out.record.field = v;
      annotate(form, params, out.record);
      return out;
    }
    if (n >= opts.growth_iterations && growing) {
      out.diagnostic = "iteration cap reached while the sup norm was still growing";
      out.record.sup_norm = sup;
      return out;
    }
  }
  out.diagnostic = "iteration cap reached";
  out.record.sup_norm = sup;
  return out;
}

MinimalAttempt attempt_minimal(const GagliardoForm& form, const ProblemParams& params,
                               const NonlinearOptions& opts) {
  params.validate();
  if (!(params.lambda > 0.0)) throw std::invalid_argument("minimal solutions need lambda > 0");
  const SolutionRecord z = solve_concave(form, params.q, params.lambda, opts);
  IterateResult it = monotone_iterate(form, params, z.field, nullptr, opts);
  MinimalAttempt out;
  out.iterations = it.record.iterations;
  out.last_sup = it.record.sup_norm;
  if (it.status != IterateStatus::converged) {
    out.diagnostic = it.diagnostic;
    return out;
  }
  SolutionRecord rec = std::move(it.record);
  if (rec.residual > 1e-2 * opts.residual_tol) {
    NewtonResult nr = newton_polish(form, params, rec.field, 1e-2 * opts.residual_tol, opts.newton_iterations);
    if (nr.residual < rec.residual) {
      rec.field = std::move(nr.u);
      annotate(form, params, rec);
    }
  }
  if (!(rec.residual <= opts.residual_tol)) {
    out.diagnostic = "monotone iteration converged but the residual tolerance was not met";
    return out;
  }
  out.last_sup = rec.sup_norm;
  out.record = std::move(rec);
  return out;
}

SolutionRecord find_minimal(const GagliardoForm& form, const ProblemParams& params, const NonlinearOptions& opts) {
  MinimalAttempt at = attempt_minimal(form, params, opts);
  if (!at.record) throw Diverged("no minimal solution: " + at.diagnostic, at.iterations, at.last_sup);
  SolutionRecord rec = std::move(*at.record);
  rec.mu1 = mu1_linearized(form, rec.field, params, &rec.floored);
  if (!(rec.energy < 0.0)) throw NumericalError("minimal solution has nonnegative energy");
  if (!(rec.mu1 >= -opts.eig_tol)) throw NumericalError("minimal solution is linearly unstable");
  return rec;
}

double mu1_linearized(const GagliardoForm& form, const Field& u, const ProblemParams& params, bool* floored,
                      const EigenOptions& eopts) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  if ((u.array() <= 0.0).any()) throw std::domain_error("linearized weight needs a strictly positive field");
  const Eigen::ArrayXd uf = u.array().max(1e-14);
  if (floored) *floored = (u.array() < 1e-14).any();
  const Eigen::VectorXd weight =
      (params.lambda * params.q * uf.pow(params.q - 1.0) + params.p * uf.pow(params.p - 1.0)).matrix();
  return min_eigen(form, weight, eopts).value;
}

double lambda_star(const GagliardoForm& form, const Field& z, double p) {
  if (z.size() != form.size()) throw std::invalid_argument("field size mismatch");
  if ((z.array() <= 0.0).any()) throw std::domain_error("concave solution must be strictly positive");
  const Eigen::VectorXd mass = form.mass().cwiseProduct(z.array().pow(p - 1.0).matrix());
  return min_eigen(form.matrix(), Eigen::VectorXd::Zero(form.size()), mass).value;
}

double lambda_upper_bound(double lambda_star_value, double q, double p) {
  const double e = (1.0 - q) / (p - 1.0);
  const double logb = e * std::log(lambda_star_value);
  if (logb > 700.0) return kInf;
  return std::exp(logb);
}

LambdaBracket estimate_Lambda(const GagliardoForm& form, const ProblemParams& params, double bracket_tol,
                              const NonlinearOptions& opts) {
  if (!(bracket_tol > 0.0)) throw std::invalid_argument("bracket tolerance must be positive");
  ProblemParams pr = params;
  LambdaBracket out;
  const SolutionRecord z1 = solve_concave(form, params.q, 1.0, opts);
  out.lambda_star = lambda_star(form, z1.field, params.p);
  out.bound = lambda_upper_bound(out.lambda_star, params.q, params.p);
  if (!std::isfinite(out.bound)) throw NumericalError("upper bound overflows; Lambda* = " + std::to_string(out.lambda_star));

  auto probe = [&](double lam) {
    pr.lambda = lam;
    MinimalAttempt at = attempt_minimal(form, pr, opts);
    out.probes.push_back({lam, at.record.has_value(), at.iterations, at.last_sup});
    if (at.record) out.last_minimal = std::move(at.record);
    return out.probes.back().success;
  };

  double hi = out.bound;
  if (probe(hi)) throw NumericalError("a minimal solution was found at the rigorous upper bound");
  double lo = 1e-3 * hi;
  int shrink = 0;
  while (!probe(lo)) {
    if (++shrink > 10) throw NumericalError("no minimal solution found at small lambda");
    hi = lo;
    lo *= 0.1;
  }
  // Failed probes leave last_minimal alone, so it ends at the largest success.
  while (hi / lo - 1.0 > bracket_tol) {
    const double mid = std::sqrt(lo * hi);
    if (probe(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double max_success = 0.0;
  double min_failure = kInf;
  for (const Probe& pb : out.probes) {
    if (pb.success) {
      max_success = std::max(max_success, pb.lambda);
    } else {
      min_failure = std::min(min_failure, pb.lambda);
    }
  }
  if (!(max_success < min_failure)) throw NumericalError("inconsistent bisection: success above a failure");
  out.lo = lo;
  out.hi = hi;
  if (!(out.lo > 0.0)) throw NumericalError("lower bracket end is not positive");
  return out;
}

double branch_energy_bound_slack(const GagliardoForm& form, const ProblemParams& params, const Branch& branch) {
  const Eigen::ArrayXd w = form.mass().array();
  double worst = kInf;
  for (const SolutionRecord& rec : branch.records()) {
    const double lhs = (0.5 - 1.0 / (params.p + 1.0)) * form.energy_norm_sq(rec.field);
    const double lq = (w * rec.field.array().max(0.0).pow(params.q + 1.0)).sum();
    const double rhs = rec.lambda * (1.0 / (params.q + 1.0) - 1.0 / (params.p + 1.0)) * lq;
    worst = std::min(worst, (rhs - lhs) / std::max(rhs, 1e-300));
  }
  return worst;
}

SolutionRecord extremal_solution(const GagliardoForm& form, const ProblemParams& params, const LambdaBracket& bracket,
                                 const Branch& branch, const NonlinearOptions& opts) {
  if (!bracket.last_minimal) throw std::invalid_argument("extremal solve needs a converged minimal solution");
  if (branch_energy_bound_slack(form, params, branch) < -1e-10) {
    throw NumericalError("energy bound along the branch is violated");
  }
  ProblemParams pr = params;
  pr.lambda = bracket.lo;
  NewtonResult nr = newton_polish(form, pr, bracket.last_minimal->field, 1e-2 * opts.residual_tol, opts.newton_iterations);
  if (!nr.converged && nr.residual > opts.residual_tol) {
    throw NumericalError("Newton did not converge at the branch endpoint");
  }
  SolutionRecord rec;
  rec.kind = SolutionKind::extremal;
  rec.field = std::move(nr.u);
  rec.iterations = nr.iterations;
  annotate(form, pr, rec);
  if ((rec.field.array() > 0.0).all()) rec.mu1 = mu1_linearized(form, rec.field, pr, &rec.floored);
  return rec;
}

}  // namespace fracmix
