#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracmix/verify.hpp"

using namespace fracmix;

namespace {

const GagliardoForm& form80() {
  static const GagliardoForm form = [] {
    DomainSpec spec = DomainSpec::default_1d();
    spec.resolution = 80;
    return assemble_form(build_discretization(spec, 0.5));
  }();
  return form;
}

Nonlinearity concave(double lam, double q) {
  return [lam, q](double x) { return x > 0.0 ? lam * std::pow(x, q) : 0.0; };
}

}  // namespace

TEST_CASE("picone identity cases") {
  const GagliardoForm& form = form80();
  const Field u = solve_linear(form, Field::Ones(80)).u;
  const CheckResult same = check_picone(form, u, u);
  CHECK(same.status == CheckStatus::pass);
  CHECK(std::abs(same.slack) <= 1e-12 * same.scale);
  const CheckResult zero = check_picone(form, u, Field::Zero(80));
  CHECK(zero.status == CheckStatus::pass);
  CHECK(zero.slack == 0.0);
  Field neg = u;
  neg[3] = -1.0;
  CHECK(check_picone(form, neg, u).status == CheckStatus::skip);
}

TEST_CASE("truncation edge levels") {
  const GagliardoForm& form = form80();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Field u(80);
  for (int i = 0; i < 80; ++i) u[i] = g(rng);
  const TruncationCheck high = check_truncation(form, u, u.cwiseAbs().maxCoeff());
  CHECK(high.upper.slack == 0.0);
  CHECK(high.upper.status == CheckStatus::pass);
  const TruncationCheck low = check_truncation(form, u, 0.0);
  CHECK(low.lower.slack == 0.0);
  CHECK(low.lower.status == CheckStatus::pass);
  CHECK(low.upper.status == CheckStatus::pass);
}

TEST_CASE("comparison of concave solutions") {
  const GagliardoForm& form = form80();
  const Field z = solve_concave(form, 0.5, 1.0).field;
  const Field zh = solve_concave(form, 0.5, 0.5).field;
  const CheckResult r = check_comparison(form, concave(1.0, 0.5), z, zh);
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.slack > 0.0);
  CHECK(check_comparison(form, concave(1.0, 0.5), z, 0.9 * z).status == CheckStatus::pass);
  // Reversed roles are filtered out by the preconditions.
  CHECK(check_comparison(form, concave(1.0, 0.5), zh, z).status == CheckStatus::skip);
}

TEST_CASE("strong maximum principle preconditions") {
  const GagliardoForm& form = form80();
  const Field z = solve_concave(form, 0.5, 1.0).field;
  CHECK(check_strong_max(form, z, z, concave(1.0, 0.5)).status == CheckStatus::pass);
  const Field lifted = (z.array() + 0.1).matrix();
  CHECK(check_strong_max(form, lifted, z, concave(1.0, 0.5)).status == CheckStatus::skip);
}

TEST_CASE("compactness surrogate") {
  const GagliardoForm& form = form80();
  const Field z = solve_concave(form, 0.5, 1.0).field;
  CHECK(check_compactness_surrogate(form, {z, z, z}).status == CheckStatus::pass);
  const Field zero = Field::Zero(80);
  CHECK(check_compactness_surrogate(form, {zero, zero}).status == CheckStatus::pass);

  const LambdaBracket b = estimate_Lambda(form, ProblemParams{}, 1e-3);
  ProblemParams p;
  p.lambda = 0.3 * b.lo;
  const SolutionRecord zl = solve_concave(form, p.q, p.lambda);
  const IterateResult seq = monotone_iterate(form, p, zl.field, nullptr, {}, true);
  REQUIRE(seq.status == IterateStatus::converged);
  CHECK(check_compactness_surrogate(form, seq.history).status == CheckStatus::pass);
  // The minimal solution sits above the concave one.
  CHECK(check_comparison(form, concave(p.lambda, p.q), seq.record.field, zl.field).status == CheckStatus::pass);
}

TEST_CASE("weak maximum principle") {
  const GagliardoForm& form = form80();
  Field f = Field::Zero(80);
  f[10] = 1.0;
  const CheckResult r = check_weak_max(form, f);
  CHECK(r.status == CheckStatus::pass);
  f[11] = -1.0;
  CHECK(check_weak_max(form, f).status == CheckStatus::skip);
}

TEST_CASE("full suite is reproducible") {
  const GagliardoForm& form = form80();
  ProblemParams p;
  p.lambda = 1.0;
  VerifyOptions opts;
  opts.cases = 20;
  const VerifyReport a = run_verify_suite(form, p, 42, opts);
  const VerifyReport b = run_verify_suite(form, p, 42, opts);
  CHECK(a.ok());
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t k = 0; k < a.results.size(); ++k) {
    CHECK(a.results[k].name == b.results[k].name);
    CHECK(a.results[k].slack == b.results[k].slack);
  }
  CHECK(a.count(CheckStatus::pass) >= 80);
}
