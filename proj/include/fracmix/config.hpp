#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracmix/geometry.hpp"
#include "fracmix/form.hpp"
#include "fracmix/nonlinear.hpp"

namespace fracmix {

struct SolverConfig {
  double step_tol = 1e-12;
  double residual_tol = 1e-8;
  double eig_tol = 1e-6;
  double blowup_factor = 1e6;
  int growth_iterations = 1000;
  int max_iterations = 100000;
  int path_states = 21;
  int path_iterations = 5000;
  double bracket_tol = 1e-3;
  int verify_cases = 100;

  NonlinearOptions nonlinear(std::uint64_t seed) const;
};

enum class LambdaMode { single, branch, bracket };

struct LambdaConfig {
  LambdaMode mode = LambdaMode::branch;
  // Strictly increasing. When `relative` is set they are fractions of the
  // lower end of the numerical Lambda bracket.
  std::vector<double> values;
  bool relative = false;
};

struct OutputConfig {
  std::string directory = "fracmix-out";
  bool csv = true;
  bool jsonl = true;
};

struct RunConfig {
  DomainSpec domain = DomainSpec::default_1d();
  ProblemParams params;
  SolverConfig solver;
  LambdaConfig lambda;
  OutputConfig output;
  std::uint64_t seed = 0;
};

// JSON text; unknown keys are rejected. Throws ConfigurationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace fracmix
