#include <cmath>

#include <Eigen/LU>

#include "fracmix/nonlinear.hpp"
#include "newton.hpp"

namespace fracmix {

std::string to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::minimal:
      return "minimal";
    case SolutionKind::extremal:
      return "extremal";
    case SolutionKind::mountain_pass:
      return "mountain_pass";
    case SolutionKind::concave_aux:
      return "concave_aux";
  }
  return "unknown";
}

void Branch::add(SolutionRecord record) {
  if (!records_.empty() && !(record.lambda > records_.back().lambda)) {
    throw std::invalid_argument("branch records must have strictly increasing lambda");
  }
  records_.push_back(std::move(record));
}

double Branch::monotonicity_defect() const {
  double worst = -kInf;
  for (std::size_t k = 1; k < records_.size(); ++k) {
    worst = std::max(worst, (records_[k - 1].field - records_[k].field).maxCoeff());
  }
  return worst;
}

double strong_residual(const GagliardoForm& form, const ProblemParams& params, const Field& u) {
  return grad_J(form, params, u).cwiseQuotient(form.mass()).cwiseAbs().maxCoeff();
}

NewtonResult newton_polish(const GagliardoForm& form, const ProblemParams& params, Field u, double tol,
                           int max_iter) {
  const double lam = params.lambda;
  const double q = params.q;
  const double p = params.p;
  auto source = [&](double v) { return v > 0.0 ? lam * std::pow(v, q) + std::pow(v, p) : 0.0; };
  auto slope = [&](double v) { return v > 0.0 ? lam * q * std::pow(v, q - 1.0) + p * std::pow(v, p - 1.0) : 0.0; };
  return detail::damped_newton(form, std::move(u), source, slope, tol, max_iter);
}

SolutionRecord solve_concave(const GagliardoForm& form, double q, double lam, const NonlinearOptions& opts,
                             const Field* start) {
  if (!(lam > 0.0) || !std::isfinite(lam)) throw std::invalid_argument("concave problem needs lambda > 0");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("concave exponent must lie in (0,1)");
  const Eigen::VectorXd& w = form.mass();
  Field v;
  if (start) {
    if (start->size() != form.size()) throw std::invalid_argument("start field size mismatch");
    if ((start->array() <= 0.0).any()) throw std::invalid_argument("start field must be positive");
    v = *start;
  } else {
    v = solve_linear(form, Eigen::VectorXd::Ones(form.size())).u * std::pow(lam, 1.0 / (1.0 - q));
  }
  // Unit-step gradient iteration in the energy inner product, projected on v >= 0.
  int it = 0;
  for (; it < 1000; ++it) {
    const Eigen::VectorXd src = lam * w.cwiseProduct(v.array().max(0.0).pow(q).matrix());
    Field next = solve_system(form, src).u.cwiseMax(0.0);
    const double step = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (step <= 1e-13 * v.cwiseAbs().maxCoeff()) break;
  }
  if ((v.array() <= 0.0).any()) throw NumericalError("concave iteration lost positivity");
  auto source = [&](double x) { return x > 0.0 ? lam * std::pow(x, q) : 0.0; };
  auto slope = [&](double x) { return x > 0.0 ? lam * q * std::pow(x, q - 1.0) : 0.0; };
  const double scale = std::max(1.0, lam * std::pow(v.maxCoeff(), q));
  NewtonResult polished = detail::damped_newton(form, v, source, slope, 1e-13 * scale, opts.newton_iterations);
  SolutionRecord rec;
  rec.kind = SolutionKind::concave_aux;
  rec.lambda = lam;
  rec.field = std::move(polished.u);
  rec.residual = polished.residual;
  rec.iterations = it + 1 + polished.iterations;
  rec.sup_norm = rec.field.cwiseAbs().maxCoeff();
  const Eigen::ArrayXd up = rec.field.array().max(0.0);
  rec.energy = 0.5 * form.energy_norm_sq(rec.field) - lam / (q + 1.0) * (w.array() * up.pow(q + 1.0)).sum();
  if (!(rec.residual <= std::max(opts.residual_tol, 1e-10 * scale))) {
    throw NumericalError("concave solve did not reach the residual tolerance");
  }
  return rec;
}

}  // namespace fracmix
