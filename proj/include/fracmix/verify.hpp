#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracmix/form.hpp"
#include "fracmix/nonlinear.hpp"

namespace fracmix {

enum class CheckStatus { pass, fail, skip };

std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::skip;
  double slack = 0.0;
  double scale = 0.0;
  std::string reason;
};

using Nonlinearity = std::function<double(double)>;

// v^T A v - sum (v_i^2/u_i)(Au)_i for u > 0 with Au >= 0.
CheckResult check_picone(const GagliardoForm& form, const Field& u, const Field& v);

// f(sigma)/sigma must be decreasing; u_super must satisfy Au >= W f(u) and
// v_sub Av <= W f(v). Slack is min(u - v).
CheckResult check_comparison(const GagliardoForm& form, const Nonlinearity& f, const Field& u_super,
                             const Field& v_sub);

struct TruncationCheck {
  CheckResult upper;  // G_k
  CheckResult lower;  // T_k
};
TruncationCheck check_truncation(const GagliardoForm& form, const Field& u, double k);

// v a supersolution, w a subsolution of A u = W f(u), v >= w touching at a node.
CheckResult check_strong_max(const GagliardoForm& form, const Field& v, const Field& w, const Nonlinearity& f);

CheckResult check_compactness_surrogate(const GagliardoForm& form, const std::vector<Field>& sequence);

// solve_linear(f) for f >= 0 stays nonnegative.
CheckResult check_weak_max(const GagliardoForm& form, const Field& f);

// lam_bar sum w_i e_i^2 u_bar_i^{q-1} <= |e|_A^2 for the excess e = (v - u_bar)+.
CheckResult check_box_excess_picone(const GagliardoForm& form, const Field& u_bar, double lam_bar, double q,
                                    const Field& v);

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> results;

  int count(CheckStatus status) const;
  bool ok() const { return count(CheckStatus::fail) == 0; }
};

struct VerifyOptions {
  int cases = 100;
  NonlinearOptions nonlinear;
};

VerifyReport run_verify_suite(const GagliardoForm& form, const ProblemParams& params, std::uint64_t seed,
                              const VerifyOptions& opts = {});

}  // namespace fracmix
