#include "fracmix/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <sstream>
#include <thread>

#include "fracmix/io.hpp"
#include "fracmix/verify.hpp"

namespace fracmix {

namespace {

struct Setup {
  RunConfig config;
  std::string out;
  bool quiet = false;
  std::ostream* log = nullptr;
  std::shared_ptr<const Discretization> disc;
  std::unique_ptr<GagliardoForm> form;
  NonlinearOptions opts;

  std::ostream& note() { return *log; }
  std::string path(const std::string& name) const { return (std::filesystem::path(out) / name).string(); }
};

Setup prepare(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  Setup s;
  s.config = config;
  if (cli.seed) s.config.seed = *cli.seed;
  s.out = cli.out ? *cli.out : config.output.directory;
  s.quiet = cli.quiet;
  s.log = &log;
  s.config.params.validate();
  s.disc = std::make_shared<const Discretization>(
      build_discretization(s.config.domain, s.config.params.s, s.config.params.a));
  s.form = std::make_unique<GagliardoForm>(assemble_form(s.disc));
  s.opts = s.config.solver.nonlinear(s.config.seed);
  if (!s.quiet) {
    log << "assembled " << s.form->size() << " interior and " << s.disc->neumann.size() << " Neumann nodes\n";
  }
  return s;
}

template <class Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ConfigurationError& e) {
    log << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << '\n';
    return exit_numerical;
  }
}

LambdaBracket bracket_for(Setup& s) {
  LambdaBracket b = estimate_Lambda(*s.form, s.config.params, s.config.solver.bracket_tol, s.opts);
  if (!s.quiet) {
    s.note() << "Lambda bracket [" << format_real(b.lo) << ", " << format_real(b.hi) << "] after "
             << b.probes.size() << " probes\n";
  }
  return b;
}

std::vector<double> requested_lambdas(Setup& s, std::optional<LambdaBracket>& bracket) {
  const LambdaConfig& lc = s.config.lambda;
  if (lc.values.empty()) throw ConfigurationError("empty lambda grid");
  std::vector<double> out = lc.values;
  if (lc.relative) {
    if (!bracket) bracket = bracket_for(s);
    for (double& v : out) v *= bracket->lo;
  }
  return out;
}

std::string probes_csv(const LambdaBracket& b) {
  std::ostringstream os;
  os << "lambda,success,iterations,sup_norm\n";
  for (const Probe& p : b.probes) {
    os << format_real(p.lambda) << ',' << (p.success ? 1 : 0) << ',' << p.iterations << ',' << format_real(p.sup_norm)
       << '\n';
  }
  return os.str();
}

}  // namespace

int thread_cap() {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("FRACMIX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = static_cast<int>(std::min<long>(v, 1024));
  }
  return cap;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(count, thread_cap());
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int cmd_solve(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(config, cli, log);
    std::optional<LambdaBracket> bracket;
    const std::vector<double> lambdas = requested_lambdas(s, bracket);
    const int n = static_cast<int>(lambdas.size());
    std::vector<std::optional<SolutionRecord>> found(n);
    std::vector<std::string> failures(n);
    parallel_for(n, [&](int k) {
      ProblemParams pr = s.config.params;
      pr.lambda = lambdas[k];
      try {
        found[k] = find_minimal(*s.form, pr, s.opts);
      } catch (const NumericalError& e) {
        failures[k] = e.what();
      }
    });
    Branch branch;
    std::string jsonl;
    int failed = 0;
    for (int k = 0; k < n; ++k) {
      if (!found[k]) {
        ++failed;
        log << "lambda " << format_real(lambdas[k]) << ": " << failures[k] << '\n';
        continue;
      }
      jsonl += solution_json(*found[k], *s.disc, s.config.seed) + "\n";
      branch.add(std::move(*found[k]));
    }
    if (s.config.output.csv) write_file(s.path("branch.csv"), branch_csv(branch.records()));
    if (s.config.output.jsonl) write_file(s.path("solutions.jsonl"), jsonl);
    if (!s.quiet) {
      log << "solved " << branch.records().size() << " of " << n << " lambda values; monotonicity defect "
          << format_real(branch.records().size() > 1 ? branch.monotonicity_defect() : 0.0) << '\n';
    }
    return failed ? exit_numerical : exit_ok;
  });
}

int cmd_bracket(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(config, cli, log);
    const LambdaBracket b = bracket_for(s);
    std::ostringstream os;
    os << "{\"seed\":" << s.config.seed << ",\"lambda_lo\":" << json_real(b.lo) << ",\"lambda_hi\":" << json_real(b.hi)
       << ",\"lambda_star\":" << json_real(b.lambda_star) << ",\"bound\":" << json_real(b.bound)
       << ",\"probes\":" << b.probes.size() << ",\"label\":\"numerical\"}\n";
    write_file(s.path("bracket.json"), os.str());
    if (s.config.output.csv) write_file(s.path("probes.csv"), probes_csv(b));
    Branch branch;
    if (b.last_minimal) branch.add(*b.last_minimal);
    ProblemParams pr = s.config.params;
    pr.lambda = b.lo;
    const SolutionRecord ext = extremal_solution(*s.form, pr, b, branch, s.opts);
    if (s.config.output.jsonl) write_file(s.path("extremal.jsonl"), solution_json(ext, *s.disc, s.config.seed) + "\n");
    if (!s.quiet) log << "Lambda* " << format_real(b.lambda_star) << ", bound " << format_real(b.bound) << '\n';
    return exit_ok;
  });
}

int cmd_second(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(config, cli, log);
    if (!s.config.params.subcritical(s.disc->dimension())) {
      throw ConfigurationError("second solutions need a subcritical exponent p");
    }
    if (s.config.lambda.values.empty()) throw ConfigurationError("empty lambda grid");
    std::optional<LambdaBracket> bracket = bracket_for(s);
    const std::vector<double> lambdas = requested_lambdas(s, bracket);
    for (double lam : lambdas) {
      if (!(lam < bracket->lo)) throw ConfigurationError("requested lambda is not below the Lambda bracket");
    }
    const int n = static_cast<int>(lambdas.size());
    struct Pair {
      SolutionRecord minimal;
      MountainPassResult second;
      std::string error;
    };
    std::vector<Pair> pairs(n);
    parallel_for(n, [&](int k) {
      try {
        ProblemParams pr = s.config.params;
        pr.lambda = lambdas[k];
        pairs[k].minimal = find_minimal(*s.form, pr, s.opts);
        ProblemParams bar = s.config.params;
        bar.lambda = 0.5 * (lambdas[k] + bracket->lo);
        const Field u_bar = find_minimal(*s.form, bar, s.opts).field;
        pairs[k].second = mountain_pass_second(*s.form, pr, pairs[k].minimal, u_bar, s.opts);
        if (!pairs[k].second.found) pairs[k].error = pairs[k].second.diagnostic;
      } catch (const NumericalError& e) {
        pairs[k].error = e.what();
      }
    });
    std::ostringstream csv;
    csv << "lambda,energy_minimal,energy_second,sup_minimal,sup_second,separation,residual_second,pass_level,stage\n";
    std::string jsonl;
    int failed = 0;
    for (int k = 0; k < n; ++k) {
      const Pair& p = pairs[k];
      if (!p.error.empty()) {
        ++failed;
        log << "lambda " << format_real(lambdas[k]) << ": " << p.error << '\n';
        continue;
      }
      const SolutionRecord& v = p.second.record;
      const double sep = (v.field - p.minimal.field).cwiseAbs().maxCoeff();
      csv << format_real(lambdas[k]) << ',' << format_real(p.minimal.energy) << ',' << format_real(v.energy) << ','
          << format_real(p.minimal.sup_norm) << ',' << format_real(v.sup_norm) << ',' << format_real(sep) << ','
          << format_real(v.residual) << ',' << format_real(p.second.pass_level) << ',' << p.second.stage << '\n';
      jsonl += solution_json(p.minimal, *s.disc, s.config.seed) + "\n";
      jsonl += solution_json(v, *s.disc, s.config.seed) + "\n";
    }
    if (s.config.output.csv) write_file(s.path("second.csv"), csv.str());
    if (s.config.output.jsonl) write_file(s.path("second.jsonl"), jsonl);
    return failed ? exit_numerical : exit_ok;
  });
}

int cmd_verify(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(config, cli, log);
    ProblemParams pr = s.config.params;
    const LambdaConfig& lc = s.config.lambda;
    pr.lambda = (!lc.values.empty() && !lc.relative) ? lc.values.front() : 1.0;
    VerifyOptions vo;
    vo.cases = s.config.solver.verify_cases;
    vo.nonlinear = s.opts;
    const VerifyReport report = run_verify_suite(*s.form, pr, s.config.seed, vo);
    std::ostringstream os;
    os << "{\"seed\":" << report.seed << ",\"pass\":" << report.count(CheckStatus::pass)
       << ",\"fail\":" << report.count(CheckStatus::fail) << ",\"skip\":" << report.count(CheckStatus::skip)
       << ",\"results\":[";
    for (std::size_t k = 0; k < report.results.size(); ++k) {
      const CheckResult& r = report.results[k];
      if (k) os << ',';
      os << "{\"name\":" << json_string(r.name) << ",\"status\":" << json_string(to_string(r.status))
         << ",\"slack\":" << json_real(r.slack) << ",\"scale\":" << json_real(r.scale)
         << ",\"reason\":" << json_string(r.reason) << '}';
    }
    os << "]}\n";
    write_file(s.path("verify.json"), os.str());
    if (!s.quiet) {
      log << "verify: " << report.count(CheckStatus::pass) << " pass, " << report.count(CheckStatus::fail)
          << " fail, " << report.count(CheckStatus::skip) << " skip (seed " << report.seed << ")\n";
    }
    return report.ok() ? exit_ok : exit_numerical;
  });
}

int cmd_export(const RunConfig& config, const CliOverrides& cli, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(config, cli, log);
    const Discretization& d = *s.disc;
    Eigen::VectorXd x(d.size());
    Eigen::VectorXd y(d.size());
    for (int i = 0; i < d.size(); ++i) {
      x[i] = d.interior.coords[i][0];
      y[i] = d.interior.coords[i][1];
    }
    Eigen::VectorXd nx(d.neumann.size());
    Eigen::VectorXd ny(d.neumann.size());
    for (int k = 0; k < d.neumann.size(); ++k) {
      nx[k] = d.neumann.coords[k][0];
      ny[k] = d.neumann.coords[k][1];
    }
    const Field torsion = solve_linear(*s.form, Eigen::VectorXd::Ones(d.size())).u;
    std::ostringstream os;
    os << "{\"seed\":" << s.config.seed << ",\"dimension\":" << d.dimension() << ",\"s\":" << json_real(d.kernel.s)
       << ",\"a\":" << json_real(d.kernel.a) << ",\"x\":" << json_array(x);
    if (d.dimension() == 2) os << ",\"y\":" << json_array(y);
    os << ",\"weights\":" << json_array(d.interior.weights) << ",\"kappa_dirichlet\":" << json_array(d.kappa_dirichlet)
       << ",\"kappa_far_neumann\":" << json_array(d.kappa_far_neumann) << ",\"neumann_x\":" << json_array(nx);
    if (d.dimension() == 2) os << ",\"neumann_y\":" << json_array(ny);
    os << ",\"neumann_weights\":" << json_array(d.neumann.weights) << ",\"torsion\":" << json_array(torsion) << "}\n";
    write_file(s.path("discretization.json"), os.str());
    if (s.config.output.csv) {
      std::ostringstream m;
      const Eigen::MatrixXd& A = s.form->matrix();
      for (long i = 0; i < A.rows(); ++i) {
        for (long j = 0; j < A.cols(); ++j) m << (j ? "," : "") << format_real(A(i, j));
        m << '\n';
      }
      write_file(s.path("operator.csv"), m.str());
    }
    return exit_ok;
  });
}

}  // namespace fracmix
