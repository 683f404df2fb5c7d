#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fracmix/nonlinear.hpp"

namespace fracmix {

namespace {

double source(const ProblemParams& pr, double v) {
  return v > 0.0 ? pr.lambda * std::pow(v, pr.q) + std::pow(v, pr.p) : 0.0;
}

double primitive(const ProblemParams& pr, double v) {
  return v > 0.0 ? pr.lambda * std::pow(v, pr.q + 1.0) / (pr.q + 1.0) + std::pow(v, pr.p + 1.0) / (pr.p + 1.0) : 0.0;
}

double a_norm(const GagliardoForm& form, const Field& v) { return std::sqrt(std::max(0.0, form.energy_norm_sq(v))); }

// Equal A-arclength spacing of the path states, endpoints fixed.
void reparametrize(const GagliardoForm& form, std::vector<Field>& path) {
  const std::size_t P = path.size() - 1;
  std::vector<double> s(P + 1, 0.0);
  for (std::size_t k = 0; k < P; ++k) s[k + 1] = s[k] + a_norm(form, path[k + 1] - path[k]);
  if (!(s[P] > 0.0)) return;
  for (double& v : s) v /= s[P];
  std::vector<Field> out(P + 1);
  out[0] = path[0];
  out[P] = path[P];
  std::size_t j = 0;
  for (std::size_t k = 1; k < P; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(P);
    while (j + 1 < P && s[j + 1] <= t) ++j;
    const double span = s[j + 1] - s[j];
    const double al = span > 0.0 ? (t - s[j]) / span : 0.0;
    out[k] = (1.0 - al) * path[j] + al * path[j + 1];
  }
  path = std::move(out);
}

struct PassOutcome {
  bool degenerate = false;
  Field peak;
  double level = 0.0;
  int iterations = 0;
};

// Deforms the path from 0 to `end` by moving only its highest state along
// the component of the energy gradient normal to the path.
PassOutcome deform_path(const TranslatedFunctional& Jh, const Field& end, const NonlinearOptions& opts,
                        std::mt19937_64* rng) {
  const GagliardoForm& form = Jh.form;
  const int P = std::max(4, opts.path_states - 1);
  std::vector<Field> path(P + 1);
  for (int k = 0; k <= P; ++k) path[k] = (static_cast<double>(k) / P) * end;
  if (rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    const double amp = 1e-2 * end.cwiseAbs().maxCoeff();
    for (int k = 1; k < P; ++k) {
      Field bump(end.size());
      for (long i = 0; i < bump.size(); ++i) bump[i] = noise(*rng);
      path[k] += amp * std::sin(std::numbers::pi * k / P) * bump;
    }
  }
  std::vector<double> E(P + 1);
  for (int k = 0; k <= P; ++k) E[k] = Jh.value(path[k]);

  PassOutcome out;
  double alpha = 0.5;
  int it = 0;
  for (; it < opts.path_iterations; ++it) {
    const int jm = static_cast<int>(std::max_element(E.begin(), E.end()) - E.begin());
    if (jm == 0 || jm == P) {
      out.degenerate = true;
      out.iterations = it;
      return out;
    }
    const Field& v = path[jm];
    const Field d = v - solve_system(form, form.mass().cwiseProduct(Jh.g(v))).u;
    Field tau = path[jm + 1] - path[jm - 1];
    tau /= a_norm(form, tau);
    const Field dp = d - d.dot(form.matrix() * tau) * tau;
    if (a_norm(form, dp) < 1e-6 * std::max(1.0, a_norm(form, v))) break;
    const double peak = E[jm];
    double others = -kInf;
    for (int k = 0; k <= P; ++k) {
      if (k != jm) others = std::max(others, E[k]);
    }
    Field trial;
    double et = peak;
    while (alpha > 1e-12) {
      trial = v - alpha * dp;
      et = Jh.value(trial);
      if (std::max(others, et) < peak) break;
      alpha *= 0.5;
    }
    if (!(alpha > 1e-12)) break;
    path[jm] = std::move(trial);
    E[jm] = et;
    alpha = std::min(2.0 * alpha, 1.0);
    if (it % 10 == 9) {
      reparametrize(form, path);
      for (int k = 0; k <= P; ++k) E[k] = Jh.value(path[k]);
    }
  }
  const int jm = static_cast<int>(std::max_element(E.begin(), E.end()) - E.begin());
  out.degenerate = jm == 0 || jm == P;
  out.peak = path[jm];
  out.level = E[jm];
  out.iterations = it;
  return out;
}

}  // namespace

Field TranslatedFunctional::g(const Field& v) const {
  Field out(v.size());
  for (long i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? source(params, theta[i] + v[i]) - source(params, theta[i]) : 0.0;
  }
  return out;
}

double TranslatedFunctional::value(const Field& v) const {
  const Eigen::VectorXd& w = form.mass();
  double pot = 0.0;
  for (long i = 0; i < v.size(); ++i) {
    if (v[i] <= 0.0) continue;
    const double t = theta[i];
    pot += w[i] * (primitive(params, t + v[i]) - primitive(params, t) - source(params, t) * v[i]);
  }
  return 0.5 * form.energy_norm_sq(v) - pot;
}

Field TranslatedFunctional::gradient(const Field& v) const {
  return form.matrix() * v - form.mass().cwiseProduct(g(v));
}

MountainPassResult mountain_pass_second(const GagliardoForm& form, const ProblemParams& params,
                                        const SolutionRecord& u_min, const Field& u_bar,
                                        const NonlinearOptions& opts) {
  params.validate();
  const int N = form.discretization().dimension();
  if (!params.subcritical(N)) throw ConfigurationError("second solution needs a subcritical exponent p");
  if (u_min.field.size() != form.size() || u_bar.size() != form.size()) {
    throw std::invalid_argument("field size mismatch");
  }
  if (!(params.lambda > 0.0)) throw std::invalid_argument("second solution needs lambda > 0");
  const double tol = opts.residual_tol;
  const Eigen::VectorXd& w = form.mass();
  MountainPassResult out;

  // Stage 1: projected gradient iteration over 0 <= u <= u_bar started at u_bar.
  Field theta = u_min.field;
  {
    Field v = u_bar;
    for (int it = 0; it < opts.max_iterations; ++it) {
      Eigen::VectorXd src(v.size());
      for (long i = 0; i < v.size(); ++i) src[i] = w[i] * source(params, v[i]);
      Field next = solve_system(form, src).u.cwiseMax(0.0).cwiseMin(u_bar);
      const double step = (next - v).cwiseAbs().maxCoeff();
      v = std::move(next);
      if (step < opts.step_tol * std::max(1.0, v.maxCoeff())) break;
    }
    NewtonResult nr = newton_polish(form, params, v, 1e-2 * tol, opts.newton_iterations);
    if (nr.converged && energy_J(form, params, nr.u) < energy_J(form, params, theta)) theta = nr.u;
  }
  {
    NewtonResult nr = newton_polish(form, params, theta, 1e-3 * tol, opts.newton_iterations);
    if (nr.residual < strong_residual(form, params, theta)) theta = std::move(nr.u);
  }
  auto finish = [&](Field u, int stage) {
    SolutionRecord& rec = out.record;
    rec.kind = SolutionKind::mountain_pass;
    rec.lambda = params.lambda;
    rec.field = std::move(u);
    rec.residual = strong_residual(form, params, rec.field);
    rec.energy = energy_J(form, params, rec.field);
    rec.sup_norm = rec.field.cwiseAbs().maxCoeff();
    if ((rec.field.array() > 0.0).all()) rec.mu1 = mu1_linearized(form, rec.field, params, &rec.floored);
    out.stage = stage;
    const double below = (u_min.field - rec.field).maxCoeff();
    const double sep = (rec.field - u_min.field).cwiseAbs().maxCoeff();
    if (!(rec.residual <= tol)) throw NumericalError("second solution misses the residual tolerance");
    if (below > 1e-8) throw NumericalError("second solution lies below the minimal solution");
    if (!(sep > 10.0 * tol)) throw NumericalError("second solution coincides with the minimal solution");
    out.found = true;
    return out;
  };
  if ((theta - u_min.field).cwiseAbs().maxCoeff() > 10.0 * tol) return finish(theta, 1);

  // Stage 2: mountain pass on the translated functional.
  const TranslatedFunctional Jh{form, params, theta};
  Field phi = solve_linear(form, Eigen::VectorXd::Ones(form.size())).u;
  phi /= phi.maxCoeff();
  std::vector<Field> directions{phi, u_min.field / u_min.field.maxCoeff(), Eigen::VectorXd::Ones(form.size())};
  Field end;
  for (const Field& dir : directions) {
    double t = 1.0;
    for (int k = 0; k < 80; ++k, t *= 1.5) {
      if (Jh.value(t * dir) < 0.0) {
        end = t * dir;
        break;
      }
    }
    if (end.size() > 0) break;
  }
  if (end.size() == 0) throw NumericalError("no path endpoint with negative translated energy was found");

  std::mt19937_64 rng(opts.seed);
  PassOutcome pass = deform_path(Jh, end, opts, nullptr);
  out.path_iterations = pass.iterations;
  while (pass.degenerate && out.retries < 3) {
    ++out.retries;
    end *= 2.0;
    pass = deform_path(Jh, end, opts, &rng);
    out.path_iterations += pass.iterations;
  }
  if (pass.degenerate) {
    out.diagnostic = "pass level ~ 0: the path maximum stays at an endpoint";
    return out;
  }
  out.pass_level = pass.level;

  // Near the pass the translated and original equations agree, since the
  // peak lies above theta.
  NewtonResult nr = newton_polish(form, params, theta + pass.peak, 1e-3 * tol, opts.newton_iterations);
  out.newton_iterations = nr.iterations;
  return finish(std::move(nr.u), 2);
}

}  // namespace fracmix
