#include "fracmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fracmix {

namespace {

CheckResult make(std::string name, double slack, double scale, double rel) {
  CheckResult r;
  r.name = std::move(name);
  r.slack = slack;
  r.scale = scale;
  r.status = slack >= -rel * scale ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckResult skipped(std::string name, std::string reason) {
  CheckResult r;
  r.name = std::move(name);
  r.status = CheckStatus::skip;
  r.reason = std::move(reason);
  return r;
}

Eigen::VectorXd apply_nonlinearity(const Nonlinearity& f, const Field& u) {
  Eigen::VectorXd out(u.size());
  for (long i = 0; i < u.size(); ++i) out[i] = f(u[i]);
  return out;
}

// Pointwise residual (A u - W f(u)) / w and a matching roundoff scale.
std::pair<Eigen::VectorXd, double> residual_density(const GagliardoForm& form, const Nonlinearity& f, const Field& u) {
  const Eigen::VectorXd Au = apply_frac_laplacian(form, u);
  const Eigen::VectorXd fu = apply_nonlinearity(f, u);
  const double scale = std::max({1.0, Au.cwiseAbs().maxCoeff(), fu.cwiseAbs().maxCoeff()});
  return {Au - fu, scale};
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::skip:
      return "skip";
  }
  return "unknown";
}

CheckResult check_picone(const GagliardoForm& form, const Field& u, const Field& v) {
  if ((u.array() <= 0.0).any()) return skipped("picone", "u is not strictly positive");
  const Eigen::VectorXd Au = form.matrix() * u;
  if (Au.minCoeff() < -1e-12 * Au.cwiseAbs().maxCoeff()) return skipped("picone", "A u has a negative entry");
  const double vAv = form.energy_norm_sq(v);
  const double lhs = (v.array().square() / u.array() * Au.array()).sum();
  return make("picone", vAv - lhs, vAv, 1e-8);
}

CheckResult check_comparison(const GagliardoForm& form, const Nonlinearity& f, const Field& u_super,
                             const Field& v_sub) {
  if ((u_super.array() <= 0.0).any() || (v_sub.array() <= 0.0).any()) {
    return skipped("comparison", "fields must be positive");
  }
  const auto [ru, su] = residual_density(form, f, u_super);
  const auto [rv, sv] = residual_density(form, f, v_sub);
  if (ru.minCoeff() < -1e-9 * su) return skipped("comparison", "u is not a supersolution");
  if (rv.maxCoeff() > 1e-9 * sv) return skipped("comparison", "v is not a subsolution");
  return make("comparison", (u_super - v_sub).minCoeff(), 1.0, 1e-8);
}

TruncationCheck check_truncation(const GagliardoForm& form, const Field& u, double k) {
  if (!(k >= 0.0)) throw std::invalid_argument("truncation level must be nonnegative");
  const Eigen::VectorXd Au = form.matrix() * u;
  const double scale = form.energy_norm_sq(u);
  const Field G = truncate_G(u, k);
  const Field T = truncate_T(u, k);
  TruncationCheck out;
  out.upper = make("truncation_G", G.dot(Au) - form.energy_norm_sq(G), scale, 1e-10);
  out.lower = make("truncation_T", T.dot(Au) - form.energy_norm_sq(T), scale, 1e-10);
  return out;
}

CheckResult check_strong_max(const GagliardoForm& form, const Field& v, const Field& w, const Nonlinearity& f) {
  const double scale = std::max({1.0, v.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff()});
  const Field diff = v - w;
  if (diff.minCoeff() < -1e-12 * scale) return skipped("strong_max", "fields are not ordered");
  if (diff.minCoeff() > 1e-12 * scale) return skipped("strong_max", "fields do not touch");
  const auto [rv, sv] = residual_density(form, f, v);
  const auto [rw, sw] = residual_density(form, f, w);
  if (rv.minCoeff() < -1e-9 * sv) return skipped("strong_max", "v is not a supersolution");
  if (rw.maxCoeff() > 1e-9 * sw) return skipped("strong_max", "w is not a subsolution");
  return make("strong_max", -diff.maxCoeff(), scale, 1e-6);
}

CheckResult check_compactness_surrogate(const GagliardoForm& form, const std::vector<Field>& sequence) {
  if (sequence.empty()) return skipped("compactness", "empty sequence");
  double worst = kInf;
  double prev = 0.0;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    const double e = std::sqrt(std::max(0.0, form.energy_norm_sq(sequence[k])));
    if (k > 0) worst = std::min(worst, e - prev + 1e-12 * std::max(1.0, e));
    prev = e;
  }
  const Field& limit = sequence.back();
  const double ln = std::sqrt(std::max(0.0, form.energy_norm_sq(limit)));
  double gap = 0.0;
  if (sequence.size() > 1) gap = std::sqrt(std::max(0.0, form.energy_norm_sq(sequence[sequence.size() - 2] - limit)));
  CheckResult r;
  r.name = "compactness";
  r.scale = ln;
  r.slack = std::min(worst, 1e-6 * ln - gap);
  r.status = (worst >= 0.0 && gap <= 1e-6 * ln) ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckResult check_weak_max(const GagliardoForm& form, const Field& f) {
  if ((f.array() < 0.0).any()) return skipped("weak_max", "f has a negative entry");
  const Field u = solve_linear(form, f).u;
  const double scale = u.cwiseAbs().maxCoeff();
  return make("weak_max", u.minCoeff(), scale, 1e-10);
}

CheckResult check_box_excess_picone(const GagliardoForm& form, const Field& u_bar, double lam_bar, double q,
                                    const Field& v) {
  if ((u_bar.array() <= 0.0).any()) return skipped("box_excess_picone", "u_bar is not strictly positive");
  const Field e = (v - u_bar).cwiseMax(0.0);
  const double eAe = form.energy_norm_sq(e);
  const double lhs =
      lam_bar * (form.mass().array() * e.array().square() * u_bar.array().pow(q - 1.0)).sum();
  return make("box_excess_picone", eAe - lhs, eAe, 1e-8);
}

int VerifyReport::count(CheckStatus status) const {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [&](const CheckResult& r) { return r.status == status; }));
}

VerifyReport run_verify_suite(const GagliardoForm& form, const ProblemParams& params, std::uint64_t seed,
                              const VerifyOptions& opts) {
  VerifyReport report;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const long n = form.size();
  auto gaussian = [&]() {
    Field v(n);
    for (long i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };
  // Alternates dense uniform data with data supported on a random window.
  auto nonneg = [&](int k) {
    Field f(n);
    if (k % 2 == 0) {
      for (long i = 0; i < n; ++i) f[i] = unif(rng);
    } else {
      const long a = static_cast<long>(unif(rng) * n);
      const long b = std::min(n, a + 1 + static_cast<long>(unif(rng) * n / 2));
      f.setZero();
      for (long i = a; i < b; ++i) f[i] = unif(rng);
    }
    return f;
  };
  auto push = [&](CheckResult r, int k) {
    r.name += "#" + std::to_string(k);
    report.results.push_back(std::move(r));
  };

  for (int k = 0; k < opts.cases; ++k) {
    const Field u = solve_linear(form, nonneg(k)).u;
    push(check_picone(form, u, gaussian()), k);
  }
  for (int k = 0; k < opts.cases; ++k) {
    Field u = gaussian();
    if (k % 2 == 1) u = solve_linear(form, u).u;
    const double level = unif(rng) * u.cwiseAbs().maxCoeff();
    TruncationCheck tc = check_truncation(form, u, level);
    push(std::move(tc.upper), k);
    push(std::move(tc.lower), k);
  }
  for (int k = 0; k < opts.cases; ++k) push(check_weak_max(form, nonneg(k)), k);

  // Ordered pairs built from the concave problem and the minimal branch.
  const double lam = params.lambda > 0.0 ? params.lambda : 1.0;
  const double q = params.q;
  const Field z = solve_concave(form, q, lam, opts.nonlinear).field;
  const Field zh = solve_concave(form, q, 0.5 * lam, opts.nonlinear).field;
  const Nonlinearity concave = [&](double x) { return x > 0.0 ? lam * std::pow(x, q) : 0.0; };
  push(check_comparison(form, concave, z, zh), 0);
  push(check_comparison(form, concave, z, 0.9 * z), 1);
  push(check_strong_max(form, z, z, concave), 0);

  ProblemParams pr = params;
  pr.lambda = lam;
  MinimalAttempt at = attempt_minimal(form, pr, opts.nonlinear);
  if (at.record) {
    const Field& u = at.record->field;
    push(check_comparison(form, concave, u, z), 2);
    IterateResult seq = monotone_iterate(form, pr, z, &u, opts.nonlinear, true);
    push(check_compactness_surrogate(form, seq.history), 0);
    const Nonlinearity full = [&](double x) { return x > 0.0 ? lam * std::pow(x, q) + std::pow(x, pr.p) : 0.0; };
    push(check_strong_max(form, u, u, full), 1);
    // u solves the problem at lam, so it bounds the box for any smaller parameter.
    for (int k = 0; k < 10; ++k) {
      Field v = u;
      for (long i = 0; i < n; ++i) v[i] *= 1.0 + 0.2 * gauss(rng);
      push(check_box_excess_picone(form, u, lam, q, v), k);
    }
  } else {
    report.results.push_back(skipped("minimal_branch_checks", "no minimal solution at the configured lambda"));
  }
  return report;
}

}  // namespace fracmix
