#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fracmix/form.hpp"

namespace fracmix {

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class UnsupportedConfiguration : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

enum class LinearMethod { automatic, dense, iterative };

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  LinearMethod method = LinearMethod::automatic;
  int dense_threshold = GagliardoForm::kDenseFactorLimit;
};

struct LinearSolveResult {
  Field u;
  double relative_residual = 0.0;
  int iterations = 0;
  bool dense = false;
  // Preconditioned residual norms sqrt(r^T M^{-1} r), one per iteration.
  std::vector<double> history;
};

// Solves A u = W f. Pure Neumann exteriors are rejected.
LinearSolveResult solve_linear(const GagliardoForm& form, const Field& f, const SolveOptions& opts = {});

// Raw system A u = b with a right-hand side already multiplied by the mass.
LinearSolveResult solve_system(const GagliardoForm& form, const Eigen::VectorXd& b, const SolveOptions& opts = {});

struct EigenOptions {
  double tol = 1e-8;
  int max_iter = 500;
};

struct EigenPair {
  double value = 0.0;
  // Normalized so that sum mass_i u_i^2 = 1 and sum u_i > 0.
  Field vector;
  double residual = 0.0;
  int iterations = 0;
};

// Smallest mu with (A - diag(mass .* weight)) u = mu diag(mass) u.
EigenPair min_eigen(const Eigen::MatrixXd& A, const Eigen::VectorXd& weight, const Eigen::VectorXd& mass,
                    const EigenOptions& opts = {});
EigenPair min_eigen(const GagliardoForm& form, const Eigen::VectorXd& weight, const EigenOptions& opts = {});

// Discrete inf of u^T A u / ||u||_r^2 with ||u||_r^r = sum w |u|^r.
struct SobolevEstimate {
  double constant = 0.0;
  Field minimizer;
  int iterations = 0;
};
SobolevEstimate sobolev_constant(const GagliardoForm& form, double r);

struct StampacchiaBound {
  double bound = 0.0;
  double sobolev = 0.0;
  double exponent = 0.0;  // the Sobolev exponent r used
  double beta = 0.0;      // r (1 - 1/r - 1/m)
};
// L-infinity bound for the solution of A u = W f from the level-set recursion
// |A_h| <= (||f||_m / S)^r |A_k|^beta / (h-k)^r.
StampacchiaBound stampacchia_linfty_bound(const GagliardoForm& form, const Field& f, double m);

}  // namespace fracmix
