#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracmix/form.hpp"

using namespace fracmix;

namespace {

DomainSpec spec_1d(int n, double R = 20.0) {
  DomainSpec spec = DomainSpec::default_1d();
  spec.resolution = n;
  spec.truncation_radius = R;
  return spec;
}

DomainSpec pure(ExteriorLabel label, int n) {
  DomainSpec spec = spec_1d(n);
  spec.sigma.regions.clear();
  spec.sigma.fallback = label;
  return spec;
}

DomainSpec spec_2d(int n) {
  DomainSpec spec;
  spec.dimension = 2;
  spec.omega.lower = {0.0, 0.0};
  spec.omega.upper = {1.0, 1.0};
  Box right;
  right.lower = {1.0, -kInf};
  right.upper = {kInf, kInf};
  spec.sigma.regions = {{right, ExteriorLabel::neumann}};
  spec.sigma.fallback = ExteriorLabel::dirichlet;
  spec.truncation_radius = 3.0;
  spec.resolution = n;
  spec.exterior_resolution = 2;
  return spec;
}

Field smooth_field(const Discretization& d) {
  Field u(d.size());
  for (int i = 0; i < d.size(); ++i) {
    const double x = d.interior.coords[i][0];
    const double y = d.interior.coords[i][1];
    u[i] = std::sin(3.0 * x + 0.5) + 0.3 * std::cos(2.0 * y) + x * x;
  }
  return u;
}

}  // namespace

TEST_CASE("matrix is exactly symmetric") {
  for (const DomainSpec& spec : {spec_1d(120), spec_2d(7)}) {
    const GagliardoForm form = assemble_form(build_discretization(spec, 0.5));
    const Eigen::MatrixXd& A = form.matrix();
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("constant field identity") {
  for (double s : {0.25, 0.5}) {
    const GagliardoForm form = assemble_form(build_discretization(spec_1d(150), s));
    const Discretization& d = form.discretization();
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(d.size());
    const double lhs = e.dot(form.matrix() * e);
    double rhs = 0.0;
    for (int i = 0; i < d.size(); ++i) rhs += 2.0 * d.interior.weights[i] * d.kappa_dirichlet[i];
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));

    const Field r = apply_frac_laplacian(form, 3.0 * e);
    for (int i = 0; i < d.size(); ++i) {
      CHECK(r[i] == doctest::Approx(2.0 * 3.0 * d.kappa_dirichlet[i]).epsilon(1e-9));
      CHECK(r[i] > 0.0);
    }
  }
}

TEST_CASE("pure dirichlet matrix at s = 1/2 is the lattice operator") {
  // Integer lattice at s = 1/2: pair weight a/(m^2 - 1/4), full row sum 4a.
  const int n = 30;
  const GagliardoForm form = assemble_form(build_discretization(pure(ExteriorLabel::dirichlet, n), 0.5));
  const Eigen::MatrixXd& A = form.matrix();
  CHECK(form.coupling().cols() == 0);
  for (int i = 0; i < n; ++i) {
    CHECK(A(i, i) == doctest::Approx(8.0).epsilon(1e-12));
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double m = i - j;
      CHECK(A(i, j) == doctest::Approx(-2.0 / (m * m - 0.25)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pure neumann annihilates constants") {
  const GagliardoForm form = assemble_form(build_discretization(pure(ExteriorLabel::neumann, 60), 0.5));
  const Field r = apply_frac_laplacian(form, Eigen::VectorXd::Constant(60, 2.5));
  CHECK(r.cwiseAbs().maxCoeff() < 1e-9 * form.matrix().diagonal().maxCoeff());
  CHECK_FALSE(form.coercive());
}

TEST_CASE("M-matrix sign pattern") {
  for (const DomainSpec& spec : {spec_1d(80), spec_2d(6)}) {
    const GagliardoForm form = assemble_form(build_discretization(spec, 0.4));
    const Eigen::MatrixXd& A = form.matrix();
    for (int i = 0; i < A.rows(); ++i) {
      double off = 0.0;
      for (int j = 0; j < A.cols(); ++j) {
        if (i == j) continue;
        CHECK(A(i, j) <= 0.0);
        off += A(i, j);
      }
      CHECK(A(i, i) + off > 0.0);
    }
  }
}

TEST_CASE("neumann extension") {
  const GagliardoForm form = assemble_form(build_discretization(spec_1d(60, 4.0), 0.5));
  const Discretization& d = form.discretization();
  const int m = d.neumann.size();
  REQUIRE(m > 0);

  const Eigen::VectorXd c = neumann_extension(form, Eigen::VectorXd::Constant(d.size(), 1.7));
  for (int k = 0; k < m; ++k) CHECK(c[k] == doctest::Approx(1.7).epsilon(1e-13));
  for (int k = 0; k < m; ++k) {
    CHECK(std::abs(nonlocal_normal_derivative(form, Eigen::VectorXd::Constant(d.size(), 1.7), c, k)) < 1e-10);
  }

  const Field u = smooth_field(d);
  const Eigen::VectorXd v = neumann_extension(form, u);
  const double sup = u.cwiseAbs().maxCoeff();
  for (int k = 0; k < m; ++k) {
    CHECK(std::abs(v[k]) <= sup * (1.0 + 1e-14));
    CHECK(std::abs(nonlocal_normal_derivative(form, u, v, k)) < 1e-10);
  }

  // A nonnegative bump seen from a node held at zero pulls the derivative negative.
  Field bump = Field::Zero(d.size());
  for (int i = 20; i < 40; ++i) bump[i] = 1.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) CHECK(nonlocal_normal_derivative(form, bump, zero, k) < 0.0);
}

TEST_CASE("continuum extension at a far point tends to the mean") {
  const Discretization d = build_discretization(spec_1d(100), 0.5);
  Field u(d.size());
  for (int i = 0; i < d.size(); ++i) u[i] = 1.0 + std::sin(4.0 * d.interior.coords[i][0]);
  const double mean = d.interior.weights.dot(u) / d.omega_measure();
  const double far = extension_at(d, u, {1.0e3, 0.0});
  CHECK(std::abs(far - mean) < 0.01 * std::abs(mean));
  CHECK(std::abs(extension_at(d, u, {1.5, 0.0})) <= u.cwiseAbs().maxCoeff());
}

TEST_CASE("explicit system reduces to the eliminated form") {
  for (const DomainSpec& spec : {spec_1d(40, 3.0), spec_2d(5)}) {
    const GagliardoForm form = assemble_form(build_discretization(spec, 0.5));
    const ExplicitNeumannSystem sys = assemble_explicit_system(form);
    const int n = sys.interior;
    const int e = static_cast<int>(sys.matrix.rows()) - n;
    REQUIRE(n == form.size());
    CHECK(e == sys.neumann + (sys.far_unknown ? 1 : 0));
    const Eigen::MatrixXd& M = sys.matrix;
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd S = M.topLeftCorner(n, n) -
                              M.topRightCorner(n, e) * M.bottomRightCorner(e, e).ldlt().solve(M.bottomLeftCorner(e, n));
    const double scale = form.matrix().cwiseAbs().maxCoeff();
    CHECK((S - form.matrix()).cwiseAbs().maxCoeff() < 1e-10 * scale);

    // Solving the explicit system leaves zero residual in the Neumann rows.
    const Field u = smooth_field(form.discretization());
    const Eigen::VectorXd ext = neumann_extension(form, u);
    Eigen::VectorXd full(n + e);
    full.head(n) = u;
    full.segment(n, sys.neumann) = ext;
    if (sys.far_unknown) full[n + e - 1] = far_shell_value(form, u);
    const Eigen::VectorXd r = M * full;
    CHECK(r.tail(e).cwiseAbs().maxCoeff() < 1e-10 * scale * u.cwiseAbs().maxCoeff());
    CHECK((r.head(n) - form.matrix() * u).cwiseAbs().maxCoeff() < 1e-9 * scale);
  }
}

TEST_CASE("energy and gradient") {
  const GagliardoForm form = assemble_form(build_discretization(spec_1d(50), 0.5));
  ProblemParams params;
  params.lambda = 1.3;
  const Field zero = Field::Zero(50);
  CHECK(energy_J(form, params, zero) == 0.0);
  CHECK(grad_J(form, params, zero).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 5; ++t) {
    Field u(50), v(50);
    for (int i = 0; i < 50; ++i) {
      u[i] = uni(rng);
      v[i] = gauss(rng);
    }
    const double eps = 1e-5;
    const double fd = (energy_J(form, params, u + eps * v) - energy_J(form, params, u - eps * v)) / (2.0 * eps);
    const double an = grad_J(form, params, u).dot(v);
    CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("truncations split the field") {
  Field u(5);
  u << -3.0, -0.5, 0.0, 0.7, 2.0;
  const Field t = truncate_T(u, 1.0);
  const Field g = truncate_G(u, 1.0);
  CHECK((t + g - u).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[4] == doctest::Approx(1.0));
  CHECK(g[0] == doctest::Approx(-2.0));
}

TEST_CASE("problem parameters") {
  ProblemParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(std::isinf(p.critical_sobolev_exponent(1)));
  CHECK(p.subcritical(1));
  p.s = 0.25;
  CHECK(p.critical_sobolev_exponent(1) == doctest::Approx(4.0));
  CHECK_FALSE(p.subcritical(1));
  p.q = 1.2;
  CHECK_THROWS_AS(p.validate(), ConfigurationError);
}

TEST_CASE("unknown cap") {
  AssemblyOptions opts;
  opts.max_unknowns = 10;
  CHECK_THROWS_AS(assemble_form(build_discretization(spec_1d(20), 0.5), opts), ConfigurationError);
}
