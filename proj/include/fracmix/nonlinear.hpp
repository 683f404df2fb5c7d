#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracmix/form.hpp"
#include "fracmix/linsolve.hpp"

namespace fracmix {

enum class SolutionKind { minimal, extremal, mountain_pass, concave_aux };

std::string to_string(SolutionKind kind);

struct SolutionRecord {
  double lambda = 0.0;
  Field field;
  // Sup norm of the pointwise residual (A u - W F(u)) / w.
  double residual = 0.0;
  double energy = 0.0;
  double sup_norm = 0.0;
  double mu1 = std::numeric_limits<double>::quiet_NaN();
  SolutionKind kind = SolutionKind::minimal;
  int iterations = 0;
  // Set when mu1 needed the 1e-14 floor on some node.
  bool floored = false;
};

class Branch {
 public:
  void add(SolutionRecord record);
  const std::vector<SolutionRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  // Largest violation of u_i <= u_j over consecutive records (<= 0 when ordered).
  double monotonicity_defect() const;

  double lambda_lo = 0.0;
  double lambda_hi = kInf;

 private:
  std::vector<SolutionRecord> records_;
};

class Diverged : public NumericalError {
 public:
  Diverged(const std::string& what, int iterations, double sup)
      : NumericalError(what), iterations_(iterations), sup_(sup) {}
  int iterations() const { return iterations_; }
  double last_sup() const { return sup_; }

 private:
  int iterations_;
  double sup_;
};

class ComparisonFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct NonlinearOptions {
  // Monotone iteration stops when the sup-norm step is below step_tol * max(1, |v|).
  double step_tol = 1e-12;
  double residual_tol = 1e-8;
  double eig_tol = 1e-6;
  double blowup_factor = 1e6;
  int growth_iterations = 1000;
  int max_iterations = 100000;
  int newton_iterations = 60;
  // Number of states on the discrete mountain-pass path.
  int path_states = 21;
  int path_iterations = 5000;
  std::uint64_t seed = 20240601;
};

double strong_residual(const GagliardoForm& form, const ProblemParams& params, const Field& u);

struct NewtonResult {
  Field u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};
// Damped Newton on grad_J with a backtracking line search on the residual.
NewtonResult newton_polish(const GagliardoForm& form, const ProblemParams& params, Field u, double tol,
                           int max_iter);

// Positive minimizer of 1/2 |w|_A^2 - lam/(q+1) sum w (w+)^{q+1}.
SolutionRecord solve_concave(const GagliardoForm& form, double q, double lam, const NonlinearOptions& opts = {},
                             const Field* start = nullptr);

enum class IterateStatus { converged, diverged };

struct IterateResult {
  IterateStatus status = IterateStatus::diverged;
  SolutionRecord record;
  std::vector<Field> history;
  std::string diagnostic;
};

IterateResult monotone_iterate(const GagliardoForm& form, const ProblemParams& params, const Field& v0,
                               const Field* cap, const NonlinearOptions& opts = {}, bool keep_history = false);

// Monotone iteration from the concave solution, polished by Newton. Returns
// nullopt instead of throwing when the iteration diverges.
struct MinimalAttempt {
  std::optional<SolutionRecord> record;
  int iterations = 0;
  double last_sup = 0.0;
  std::string diagnostic;
};
MinimalAttempt attempt_minimal(const GagliardoForm& form, const ProblemParams& params,
                               const NonlinearOptions& opts = {});

SolutionRecord find_minimal(const GagliardoForm& form, const ProblemParams& params,
                            const NonlinearOptions& opts = {});

double mu1_linearized(const GagliardoForm& form, const Field& u, const ProblemParams& params,
                      bool* floored = nullptr, const EigenOptions& eopts = {});

double lambda_star(const GagliardoForm& form, const Field& z, double p);
// (Lambda*)^{(1-q)/(p-1)}; infinite on overflow.
double lambda_upper_bound(double lambda_star_value, double q, double p);

struct Probe {
  double lambda = 0.0;
  bool success = false;
  int iterations = 0;
  double sup_norm = 0.0;
};

struct LambdaBracket {
  double lo = 0.0;
  double hi = 0.0;
  double lambda_star = 0.0;
  double bound = 0.0;
  std::vector<Probe> probes;
  std::optional<SolutionRecord> last_minimal;
};

LambdaBracket estimate_Lambda(const GagliardoForm& form, const ProblemParams& params, double bracket_tol,
                              const NonlinearOptions& opts = {});

// Checks (1/2 - 1/(p+1)) |u|^2 <= lam (1/(q+1) - 1/(p+1)) |u|_{q+1}^{q+1}
// on every record; returns the smallest relative slack.
double branch_energy_bound_slack(const GagliardoForm& form, const ProblemParams& params, const Branch& branch);

SolutionRecord extremal_solution(const GagliardoForm& form, const ProblemParams& params, const LambdaBracket& bracket,
                                 const Branch& branch, const NonlinearOptions& opts = {});

struct MountainPassResult {
  bool found = false;
  SolutionRecord record;
  int stage = 0;
  double pass_level = 0.0;
  int path_iterations = 0;
  int newton_iterations = 0;
  int retries = 0;
  std::string diagnostic;
};

// Translated nonlinearity around a critical point theta:
// g(r) = F(theta + r) - F(theta) for r >= 0 and 0 otherwise.
struct TranslatedFunctional {
  const GagliardoForm& form;
  ProblemParams params;
  Field theta;

  Field g(const Field& v) const;
  double value(const Field& v) const;
  Field gradient(const Field& v) const;
};

MountainPassResult mountain_pass_second(const GagliardoForm& form, const ProblemParams& params,
                                        const SolutionRecord& u_min, const Field& u_bar,
                                        const NonlinearOptions& opts = {});

}  // namespace fracmix
