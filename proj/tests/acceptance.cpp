// One line per acceptance criterion on the default 1D configuration.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracmix/commands.hpp"
#include "fracmix/linsolve.hpp"
#include "fracmix/nonlinear.hpp"
#include "fracmix/oracle.hpp"
#include "fracmix/verify.hpp"

using namespace fracmix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget > 0.0 && secs > budget) {
    o.pass = false;
    o.detail += " [over time budget " + std::to_string(budget) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

DomainSpec default_spec(int n) {
  DomainSpec spec = DomainSpec::default_1d();
  spec.resolution = n;
  return spec;
}

ProblemParams at(double lambda) {
  ProblemParams p;
  p.lambda = lambda;
  return p;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Test fields on (0,1): vanish to second order at 0 (continuous against the
// zero exterior) and combine two bases so that the continuum Neumann extension
// joins the field with matching slope at 1. This needs
//   int_0^1 (u(t) - u(1)) / (1 - t)^2 dt = 0.
using Fn = std::function<double(double)>;

double endpoint_moment(const Fn& f) {
  auto g = [&](double t) { return t >= 1.0 ? 0.0 : (f(t) - f(1.0)) / ((1.0 - t) * (1.0 - t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 20, 1e-14);
}

std::vector<Fn> oracle_fields() {
  const double pi = 3.14159265358979323846;
  const Fn smoothstep = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const Fn hump = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  const std::vector<std::pair<Fn, Fn>> pairs = {
      {smoothstep, hump},
      {[pi](double t) { return std::pow(std::sin(0.5 * pi * t), 2); }, hump},
      {[](double t) { return t * t * (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t); }, smoothstep},
      {[pi](double t) { return 1.0 - std::cos(pi * t); }, hump},
      {[smoothstep](double t) { return smoothstep(t) * smoothstep(t); }, hump},
  };
  std::vector<Fn> out;
  for (const auto& [f, g] : pairs) {
    const double c = endpoint_moment(f) / endpoint_moment(g);
    out.push_back([f, g, c](double t) { return f(t) - c * g(t); });
  }
  return out;
}

double oracle_error(int n, const Fn& field) {
  const GagliardoForm form = assemble_form(build_discretization(default_spec(n), 0.5));
  const Discretization& d = form.discretization();
  const KernelParams k{1, 0.5, 2.0};
  auto full = [&](const Point& y) {
    if (y[0] <= 0.0) return 0.0;
    if (y[0] < 1.0) return field(y[0]);
    return continuum_extension_1d(field, 0.0, 1.0, y[0], 0.5, 4);
  };
  Field u(n);
  for (int i = 0; i < n; ++i) u[i] = field(d.interior.coords[i][0]);
  const Field discrete = apply_frac_laplacian(form, u);
  Field ref(n);
  const double bp[] = {0.0, 1.0};
  parallel_for(n, [&](int i) { ref[i] = oracle_pv(full, d.interior.coords[i], k, 10, bp); });
  return (discrete - ref).norm() / ref.norm();
}

}  // namespace

int main() {
  const GagliardoForm form = assemble_form(build_discretization(default_spec(200), 0.5));
  const int n = form.size();
  const NonlinearOptions opts;
  LambdaBracket bracket;

  run(1, "operator consistency against the quadrature oracle", 30.0, [] {
    Outcome o;
    o.pass = true;
    int k = 0;
    for (const Fn& f : oracle_fields()) {
      const double e200 = oracle_error(200, f);
      const double e400 = oracle_error(400, f);
      const bool ok = e200 < 1e-2 && e400 * 2.0 <= e200;
      o.pass = o.pass && ok;
      o.detail += "field" + std::to_string(++k) + " " + fmt("%.3e", e200) + "->" + fmt("%.3e", e400) + " ";
    }
    return o;
  });

  run(2, "form invariants", 10.0, [&] {
    const Eigen::MatrixXd& A = form.matrix();
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    const double mu = min_eigen(form, Eigen::VectorXd::Zero(n)).value;
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
    const double lhs = e.dot(A * e);
    const Discretization& d = form.discretization();
    double rhs = 0.0;
    for (int i = 0; i < n; ++i) rhs += 2.0 * d.interior.weights[i] * d.kappa_dirichlet[i];
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    Outcome o;
    o.pass = asym == 0.0 && mu > 0.0 && rel <= 1e-10;
    o.detail = "asym " + fmt("%g", asym) + " lambda1 " + fmt("%.6f", mu) + " constant-field rel " + fmt("%.2e", rel);
    return o;
  });

  run(3, "randomized Picone, truncation and weak maximum principle", 60.0, [&] {
    VerifyOptions vo;
    vo.cases = 100;
    const VerifyReport rep = run_verify_suite(form, at(1.0), 20240601, vo);
    int picone = 0, trunc = 0, weak = 0, bad = 0;
    double worst = kInf;
    for (const CheckResult& r : rep.results) {
      const bool mine = r.name.rfind("picone#", 0) == 0 || r.name.rfind("truncation_", 0) == 0 ||
                        r.name.rfind("weak_max#", 0) == 0;
      if (!mine) continue;
      if (r.name.rfind("picone#", 0) == 0) ++picone;
      if (r.name.rfind("truncation_", 0) == 0) ++trunc;
      if (r.name.rfind("weak_max#", 0) == 0) ++weak;
      if (r.status != CheckStatus::pass || r.slack < -1e-8 * r.scale) ++bad;
      if (r.scale > 0.0) worst = std::min(worst, r.slack / r.scale);
    }
    Outcome o;
    o.pass = picone == 100 && trunc == 200 && weak == 100 && bad == 0;
    o.detail = "picone " + std::to_string(picone) + " truncation " + std::to_string(trunc) + " weak_max " +
               std::to_string(weak) + " non-passing " + std::to_string(bad) + " worst slack/scale " +
               fmt("%.2e", worst);
    return o;
  });

  // The bracket feeds criteria 4 and 6 as well.
  run(5, "Lambda bracket", 300.0, [&] {
    bracket = estimate_Lambda(form, ProblemParams{}, 1e-3, opts);
    const double width = (bracket.hi - bracket.lo) / bracket.lo;
    bool probes_ok = true;
    for (const Probe& p : bracket.probes) {
      if (p.lambda >= 1.1 * bracket.hi && p.success) probes_ok = false;
    }
    int diverged = 0;
    const std::vector<double> above = {1.1 * bracket.hi, 1.5 * bracket.hi, 3.0 * bracket.hi};
    for (double lam : above) {
      try {
        find_minimal(form, at(lam), opts);
      } catch (const Diverged&) {
        ++diverged;
      }
    }
    Outcome o;
    o.pass = width <= 1e-2 && probes_ok && diverged == static_cast<int>(above.size()) &&
             bracket.lo <= 1.05 * bracket.bound;
    o.detail = "[" + fmt("%.6f", bracket.lo) + ", " + fmt("%.6f", bracket.hi) + "] rel width " + fmt("%.2e", width) +
               " probes " + std::to_string(bracket.probes.size()) + " diverged above " + std::to_string(diverged) +
               "/" + std::to_string(above.size()) + " bound " + fmt("%.4f", bracket.bound);
    return o;
  });

  run(4, "minimal branch", 120.0, [&] {
    if (!(bracket.lo > 0.0)) return Outcome{false, "no bracket"};
    Branch branch;
    bool ok = true;
    double worst_mu = kInf, worst_J = -kInf;
    for (int k = 0; k < 8; ++k) {
      const double lam = 1e-3 * bracket.lo * std::pow(900.0, k / 7.0);
      const SolutionRecord u = find_minimal(form, at(lam), opts);
      ok = ok && u.energy < 0.0 && u.mu1 >= -1e-6 && u.residual <= opts.residual_tol;
      worst_mu = std::min(worst_mu, u.mu1);
      worst_J = std::max(worst_J, u.energy);
      branch.add(u);
    }
    const double defect = branch.monotonicity_defect();
    Outcome o;
    o.pass = ok && defect <= 1e-8;
    o.detail = "max J " + fmt("%.4e", worst_J) + " min mu1 " + fmt("%.4f", worst_mu) + " monotonicity defect " +
               fmt("%.2e", defect);
    return o;
  });

  run(6, "second solution by mountain pass", 300.0, [&] {
    if (!(bracket.lo > 0.0)) return Outcome{false, "no bracket"};
    Outcome o;
    o.pass = true;
    for (double f : {0.5, 0.1, 0.8}) {
      const ProblemParams p = at(f * bracket.lo);
      const SolutionRecord u = find_minimal(form, p, opts);
      const SolutionRecord bar = find_minimal(form, at(0.5 * (p.lambda + bracket.lo)), opts);
      const MountainPassResult mp = mountain_pass_second(form, p, u, bar.field, opts);
      const double residual = strong_residual(form, p, mp.record.field);
      const double below = (u.field - mp.record.field).maxCoeff();
      const double sep = (mp.record.field - u.field).cwiseAbs().maxCoeff();
      const bool ok = mp.found && residual <= 1e-8 && below <= 1e-8 && sep > 1e-4;
      o.pass = o.pass && ok;
      o.detail += fmt("%.1f", f) + ": res " + fmt("%.1e", residual) + " sep " + fmt("%.3f", sep) + " J " +
                  fmt("%.3f", mp.record.energy) + "; ";
    }
    return o;
  });

  run(7, "concave auxiliary scaling and uniqueness", 30.0, [&] {
    const double q = 0.5;
    const Field z1 = solve_concave(form, q, 1.0, opts).field;
    double worst = 0.0;
    for (double lam : {0.1, 1.0, 10.0}) {
      const Field z = solve_concave(form, q, lam, opts).field;
      const Field expect = std::pow(lam, 1.0 / (1.0 - q)) * z1;
      worst = std::max(worst, (z - expect).cwiseAbs().maxCoeff() / expect.cwiseAbs().maxCoeff());
    }
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(1e-3, 10.0);
    double spread = 0.0;
    for (int t = 0; t < 2; ++t) {
      Field start(n);
      for (int i = 0; i < n; ++i) start[i] = uni(rng);
      const Field z = solve_concave(form, q, 1.0, opts, &start).field;
      spread = std::max(spread, (z - z1).cwiseAbs().maxCoeff());
    }
    Outcome o;
    o.pass = worst <= 1e-6 && spread <= 1e-8;
    o.detail = "scaling rel " + fmt("%.2e", worst) + " start spread " + fmt("%.2e", spread);
    return o;
  });

  run(8, "gradient against central differences", 10.0, [&] {
    const ProblemParams p = at(1.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.05, 2.0);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int a = 0; a < 20; ++a) {
      Field u(n);
      for (int i = 0; i < n; ++i) u[i] = uni(rng);
      const Field g = grad_J(form, p, u);
      for (int b = 0; b < 20; ++b) {
        Field v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        const double eps = 1e-5;
        const double fd = (energy_J(form, p, u + eps * v) - energy_J(form, p, u - eps * v)) / (2.0 * eps);
        const double an = g.dot(v);
        worst = std::max(worst, std::abs(fd - an) / std::abs(an));
      }
    }
    Outcome o;
    o.pass = worst < 1e-6;
    o.detail = "worst relative error " + fmt("%.2e", worst) + " over 400 pairs";
    return o;
  });

  run(9, "deterministic solve output", 0.0, [] {
    namespace fs = std::filesystem;
    RunConfig cfg;
    cfg.lambda.values = {0.01, 0.1, 0.5, 1.0, 2.0, 4.0};
    cfg.seed = 12345;
    const fs::path base = fs::temp_directory_path() / "fracmix_acceptance_determinism";
    fs::remove_all(base);
    std::ostringstream log;
    auto go = [&](const char* sub) {
      CliOverrides cli;
      cli.out = (base / sub).string();
      cli.quiet = true;
      return cmd_solve(cfg, cli, log);
    };
    const int r1 = go("a");
    const int r2 = go("b");
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const std::string a = slurp(base / "a" / "branch.csv");
    const std::string b = slurp(base / "b" / "branch.csv");
    Outcome o;
    o.pass = r1 == exit_ok && r2 == exit_ok && !a.empty() && a == b;
    o.detail = "exit " + std::to_string(r1) + "/" + std::to_string(r2) + ", " + std::to_string(a.size()) +
               " bytes, identical " + (a == b ? "yes" : "no");
    return o;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
