#include "fracmix/form.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace fracmix {

namespace {


// Lattice weights of the discrete fractional Laplacian on spacing h:
// c_m = a h^{-2s} Gamma(m-s)/Gamma(m+1+s), m >= 1.
Eigen::VectorXd lattice_weights(long count, double h, double s, double a) {
  Eigen::VectorXd c(count + 1);
  c[0] = 0.0;
  const double scale = a * std::pow(h, -2.0 * s);
  for (long m = 1; m <= count; ++m) {
    c[m] = scale * boost::math::tgamma_ratio(static_cast<double>(m) - s, static_cast<double>(m) + 1.0 + s);
  }
  return c;
}

void assemble_1d(const Discretization& d, Eigen::MatrixXd& P, Eigen::MatrixXd& Q) {
  const int n = d.size();
  const int m = d.neumann.size();
  const double h = d.spacing[0];
  long reach = n;
  for (long k : d.neumann_lattice) reach = std::max(reach, std::abs(k) + n);
  const Eigen::VectorXd c = lattice_weights(reach, h, d.kernel.s, d.kernel.a);
  P.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      P(i, j) = P(j, i) = h * c[j - i];
    }
  }
  Q.resize(n, m);
  for (int k = 0; k < m; ++k) {
    const long off = d.neumann_lattice[k];
    for (int i = 0; i < n; ++i) Q(i, k) = h * c[std::abs(off - i)];
  }
}

void assemble_2d(const Discretization& d, Eigen::MatrixXd& P, Eigen::MatrixXd& Q) {
  const int N = d.size();
  const int m = d.neumann.size();
  const int n = d.cells[0];
  const auto& kp = d.kernel;
  const Eigen::VectorXd& w = d.interior.weights;
  P.setZero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      P(i, j) = P(j, i) = w[i] * w[j] * kernel_coefficient(d.interior.coords[i], d.interior.coords[j], kp);
    }
  }
  // The self cell carries the second-moment part of the kernel; it is spread
  // over the axis neighbours as a centered second difference.
  const double hx = d.spacing[0];
  const double hy = d.spacing[1];
  const double bx = kp.a * cell_second_moment(hx, hy, kp.s) / (2.0 * hx * hx);
  const double by = kp.a * cell_second_moment(hy, hx, kp.s) / (2.0 * hy * hy);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int idx = j * n + i;
      if (i + 1 < n) {
        P(idx, idx + 1) += bx * w[idx];
        P(idx + 1, idx) = P(idx, idx + 1);
      }
      if (j + 1 < n) {
        P(idx, idx + n) += by * w[idx];
        P(idx + n, idx) = P(idx, idx + n);
      }
    }
  }
  Q.resize(N, m);
  for (int k = 0; k < m; ++k) {
    const double wk = d.neumann.weights[k];
    for (int i = 0; i < N; ++i) {
      Q(i, k) = w[i] * wk * kernel_coefficient(d.interior.coords[i], d.neumann.coords[k], kp);
    }
  }
}

}  // namespace

void ProblemParams::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw ConfigurationError("s must lie in (0,1)");
  if (!(q > 0.0 && q < 1.0)) throw ConfigurationError("q must lie in (0,1)");
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigurationError("p must exceed 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigurationError("lambda must be nonnegative");
  if (!(a > 0.0)) throw ConfigurationError("normalization constant must be positive");
}

bool ProblemParams::subcritical(int dimension) const {
  const double gap = dimension - 2.0 * s;
  if (gap <= 0.0) return true;
  return p < (dimension + 2.0 * s) / gap;
}

double ProblemParams::critical_sobolev_exponent(int dimension) const {
  const double gap = dimension - 2.0 * s;
  if (gap <= 0.0) return kInf;
  return 2.0 * dimension / gap;
}

GagliardoForm::GagliardoForm(std::shared_ptr<const Discretization> disc, Eigen::MatrixXd interior_pairs,
                             Eigen::MatrixXd coupling)
    : disc_(std::move(disc)), P_(std::move(interior_pairs)), Q_(std::move(coupling)) {
  const Discretization& d = *disc_;
  const int n = d.size();
  const double a = d.kernel.a;
  const Eigen::VectorXd& w = d.interior.weights;
  D_ = Q_.colwise().sum().transpose();
  t_ = a * d.kappa_far_neumann.cwiseProduct(w);

  A_ = -P_;
  Eigen::VectorXd diag = P_.rowwise().sum() + a * d.kappa_dirichlet.cwiseProduct(w);
  if (Q_.cols() > 0) {
    diag += Q_.rowwise().sum();
    const Eigen::MatrixXd scaled = Q_ * D_.cwiseSqrt().cwiseInverse().asDiagonal();
    A_.noalias() -= scaled * scaled.transpose();
  }
  const double tsum = t_.sum();
  if (tsum > 0.0) {
    diag += t_;
    A_.noalias() -= (t_ * t_.transpose()) / tsum;
  }
  A_.diagonal() += diag;
  // Exact symmetry regardless of rounding in the rank updates.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (A_(i, j) + A_(j, i));
      A_(i, j) = A_(j, i) = v;
    }
  }
}

const Eigen::LLT<Eigen::MatrixXd>* GagliardoForm::factor() const {
  if (!coercive() || size() > kDenseFactorLimit) return nullptr;
  std::call_once(cache_->once, [this] {
    Eigen::LLT<Eigen::MatrixXd> llt(A_);
    if (llt.info() == Eigen::Success) cache_->llt.emplace(std::move(llt));
  });
  return cache_->llt ? &*cache_->llt : nullptr;
}

GagliardoForm assemble_form(std::shared_ptr<const Discretization> d, const AssemblyOptions& opts) {
  const long n = d->size();
  const long m = d->neumann.size();
  if (n > opts.max_unknowns) throw ConfigurationError("interior unknowns exceed the configured cap");
  if (n * std::max(m, n) > 200'000'000L) throw ConfigurationError("dense assembly would exceed memory cap");
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  if (d->dimension() == 1) {
    assemble_1d(*d, P, Q);
  } else {
    assemble_2d(*d, P, Q);
  }
  return GagliardoForm(std::move(d), std::move(P), std::move(Q));
}

GagliardoForm assemble_form(const Discretization& d, const AssemblyOptions& opts) {
  return assemble_form(std::make_shared<const Discretization>(d), opts);
}

ExplicitNeumannSystem assemble_explicit_system(const GagliardoForm& form) {
  const Discretization& d = form.discretization();
  const int n = form.size();
  const int m = static_cast<int>(form.coupling().cols());
  const Eigen::VectorXd& t = form.far_coupling();
  const double tsum = t.sum();
  const bool far = tsum > 0.0;
  const int total = n + m + (far ? 1 : 0);
  ExplicitNeumannSystem sys;
  sys.interior = n;
  sys.neumann = m;
  sys.far_unknown = far;
  sys.matrix.setZero(total, total);
  auto& F = sys.matrix;
  const Eigen::MatrixXd& P = form.interior_pairs();
  const Eigen::MatrixXd& Q = form.coupling();
  F.topLeftCorner(n, n) = -P;
  Eigen::VectorXd diag = P.rowwise().sum() + d.kernel.a * d.kappa_dirichlet.cwiseProduct(form.mass());
  if (m > 0) {
    diag += Q.rowwise().sum();
    F.block(0, n, n, m) = -Q;
    F.block(n, 0, m, n) = -Q.transpose();
    F.diagonal().segment(n, m) = form.neumann_degree();
  }
  if (far) {
    diag += t;
    F.block(0, n + m, n, 1) = -t;
    F.block(n + m, 0, 1, n) = -t.transpose();
    F(n + m, n + m) = tsum;
  }
  F.diagonal().head(n) += diag;
  return sys;
}

Eigen::VectorXd neumann_extension(const GagliardoForm& form, const Field& u) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  return (form.coupling().transpose() * u).cwiseQuotient(form.neumann_degree());
}

double far_shell_value(const GagliardoForm& form, const Field& u) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  const double tsum = form.far_coupling().sum();
  if (!(tsum > 0.0)) return 0.0;
  return form.far_coupling().dot(u) / tsum;
}

double extension_at(const Discretization& d, const Field& u, const Point& y) {
  if (u.size() != d.size()) throw std::invalid_argument("field size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (int j = 0; j < d.size(); ++j) {
    const double kw = kernel_coefficient(y, d.interior.coords[j], d.kernel) * d.interior.weights[j];
    num += kw * u[j];
    den += kw;
  }
  return num / den;
}

Field apply_frac_laplacian(const GagliardoForm& form, const Field& u) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  return (form.matrix() * u).cwiseQuotient(form.mass());
}

double nonlocal_normal_derivative(const GagliardoForm& form, const Field& u,
                                  const Eigen::VectorXd& neumann_values, int k) {
  const int m = static_cast<int>(form.coupling().cols());
  if (k < 0 || k >= m) throw std::out_of_range("not a Neumann node");
  if (u.size() != form.size() || neumann_values.size() != m) throw std::invalid_argument("field size mismatch");
  const auto col = form.coupling().col(k);
  const double value = neumann_values[k] * form.neumann_degree()[k] - col.dot(u);
  return value / form.discretization().neumann.weights[k];
}

double energy_J(const GagliardoForm& form, const ProblemParams& params, const Field& u) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  const Eigen::ArrayXd up = u.array().max(0.0);
  const Eigen::ArrayXd w = form.mass().array();
  const double quad = 0.5 * form.energy_norm_sq(u);
  const double low = (w * up.pow(params.q + 1.0)).sum() / (params.q + 1.0);
  const double high = (w * up.pow(params.p + 1.0)).sum() / (params.p + 1.0);
  const double value = quad - params.lambda * low - high;
  if (!std::isfinite(value)) throw std::domain_error("energy is not finite");
  return value;
}

Field grad_J(const GagliardoForm& form, const ProblemParams& params, const Field& u) {
  if (u.size() != form.size()) throw std::invalid_argument("field size mismatch");
  const Eigen::ArrayXd up = u.array().max(0.0);
  const Eigen::ArrayXd src = params.lambda * up.pow(params.q) + up.pow(params.p);
  return form.matrix() * u - (form.mass().array() * src).matrix();
}

Field truncate_T(const Field& u, double k) {
  return u.array().min(k).max(-k).matrix();
}

Field truncate_G(const Field& u, double k) {
  return u - truncate_T(u, k);
}

}  // namespace fracmix
