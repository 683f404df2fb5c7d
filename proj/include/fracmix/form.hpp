#pragma once

#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fracmix/geometry.hpp"

namespace fracmix {

// Nodal values on the interior cells; the Dirichlet exterior is implicitly zero.
using Field = Eigen::VectorXd;

struct ProblemParams {
  double s = 0.5;
  double q = 0.5;
  double p = 3.0;
  double lambda = 0.0;
  double a = 2.0;

  void validate() const;
  // p below (N+2s)/(N-2s); always true when N == 2s.
  bool subcritical(int dimension) const;
  // 2*_s = 2N/(N-2s), infinite when N == 2s.
  double critical_sobolev_exponent(int dimension) const;
};

struct AssemblyOptions {
  long max_unknowns = 20000;
};

// Discrete Gagliardo energy with the Neumann exterior eliminated.
//
// Energy decomposition (P, Q, t are nonnegative pair weights):
//   sum_{i<j} P_ij (u_i-u_j)^2 + sum_i a kappa_i w_i u_i^2
//   + sum_{i,k} Q_ik (u_i - e_k)^2 + sum_i t_i (u_i - m)^2
// minimized over the Neumann values e_k and the far value m.
class GagliardoForm {
 public:
  GagliardoForm(std::shared_ptr<const Discretization> disc, Eigen::MatrixXd interior_pairs,
                Eigen::MatrixXd coupling);

  const Discretization& discretization() const { return *disc_; }
  std::shared_ptr<const Discretization> discretization_ptr() const { return disc_; }
  int size() const { return static_cast<int>(A_.rows()); }

  const Eigen::MatrixXd& matrix() const { return A_; }
  const Eigen::VectorXd& mass() const { return disc_->interior.weights; }
  // Interior x Neumann-node pair weights Q.
  const Eigen::MatrixXd& coupling() const { return Q_; }
  // Column sums of Q.
  const Eigen::VectorXd& neumann_degree() const { return D_; }
  // Pair weights t_i = a tau_i w_i towards the far Neumann shell.
  const Eigen::VectorXd& far_coupling() const { return t_; }
  // Off-diagonal interior pair weights P (zero diagonal).
  const Eigen::MatrixXd& interior_pairs() const { return P_; }

  // Positive definite; holds exactly when the Dirichlet exterior is non-empty.
  bool coercive() const { return disc_->dirichlet_present; }
  // Dense Cholesky factor, computed on first use; null for pure Neumann
  // exteriors or more than kDenseFactorLimit unknowns. Thread safe.
  const Eigen::LLT<Eigen::MatrixXd>* factor() const;

  static constexpr int kDenseFactorLimit = 4000;

  double energy_norm_sq(const Field& u) const { return u.dot(A_ * u); }

 private:
  std::shared_ptr<const Discretization> disc_;
  Eigen::MatrixXd P_;
  Eigen::MatrixXd Q_;
  Eigen::VectorXd D_;
  Eigen::VectorXd t_;
  Eigen::MatrixXd A_;
  struct FactorCache {
    std::once_flag once;
    std::optional<Eigen::LLT<Eigen::MatrixXd>> llt;
  };
  std::shared_ptr<FactorCache> cache_ = std::make_shared<FactorCache>();
};

GagliardoForm assemble_form(const Discretization& d, const AssemblyOptions& opts = {});
GagliardoForm assemble_form(std::shared_ptr<const Discretization> d, const AssemblyOptions& opts = {});

// Symmetric system with the Neumann values kept as unknowns. Unknown order:
// interior, Neumann nodes, far shell value (last, only if present).
struct ExplicitNeumannSystem {
  Eigen::MatrixXd matrix;
  int interior = 0;
  int neumann = 0;
  bool far_unknown = false;
};
ExplicitNeumannSystem assemble_explicit_system(const GagliardoForm& form);

// Neumann values that make the nonlocal normal derivative vanish.
Eigen::VectorXd neumann_extension(const GagliardoForm& form, const Field& u);
// Value of the far shell consistent with the aggregate Neumann condition.
double far_shell_value(const GagliardoForm& form, const Field& u);
// Kernel-weighted interior average at an arbitrary exterior point.
double extension_at(const Discretization& d, const Field& u, const Point& y);

Field apply_frac_laplacian(const GagliardoForm& form, const Field& u);

// a sum_j (v_k - u_j) K(y_k, x_j) w_j at Neumann node k.
double nonlocal_normal_derivative(const GagliardoForm& form, const Field& u,
                                  const Eigen::VectorXd& neumann_values, int k);

double energy_J(const GagliardoForm& form, const ProblemParams& params, const Field& u);
Field grad_J(const GagliardoForm& form, const ProblemParams& params, const Field& u);

Field truncate_T(const Field& u, double k);
Field truncate_G(const Field& u, double k);

}  // namespace fracmix
