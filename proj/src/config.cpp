#include "fracmix/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fracmix {

namespace {

using nlohmann::json;

double as_real(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigurationError(where + ": expected a number");
}

// Reads keys from one object and rejects whatever was not consumed.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigurationError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string where(const std::string& key) const { return path_ + "." + key; }

  double real(const std::string& key, double fallback) {
    return has(key) ? as_real(j_.at(key), where(key)) : fallback;
  }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigurationError(where(key) + ": expected an integer");
    return v.get<int>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigurationError(where(key) + ": expected a string");
    return v.get<std::string>();
  }
  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigurationError(where(key) + ": expected a boolean");
    return v.get<bool>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigurationError("unknown key " + where(it.key()));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::array<double, 2> read_coords(const json& v, int dim, const std::string& where, double pad) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw ConfigurationError(where + ": expected " + std::to_string(dim) + " coordinates");
  }
  std::array<double, 2> out{pad, pad};
  for (int d = 0; d < dim; ++d) out[d] = as_real(v[d], where);
  return out;
}

ExteriorLabel read_label(const std::string& s, const std::string& where) {
  if (s == "dirichlet") return ExteriorLabel::dirichlet;
  if (s == "neumann") return ExteriorLabel::neumann;
  throw ConfigurationError(where + ": label must be dirichlet or neumann");
}

DomainSpec read_domain(const json& j) {
  Block b(j, "domain");
  DomainSpec spec;
  spec.dimension = b.integer("dimension", 1);
  if (spec.dimension != 1 && spec.dimension != 2) throw ConfigurationError("domain.dimension must be 1 or 2");
  const int dim = spec.dimension;
  if (b.has("omega")) {
    Block ob(b.at("omega"), "domain.omega");
    if (!ob.has("lower") || !ob.has("upper")) throw ConfigurationError("domain.omega needs lower and upper");
    spec.omega.lower = read_coords(ob.at("lower"), dim, "domain.omega.lower", 0.0);
    spec.omega.upper = read_coords(ob.at("upper"), dim, "domain.omega.upper", 1.0);
    ob.finish();
  } else if (dim == 2) {
    spec.omega.lower = {0.0, 0.0};
    spec.omega.upper = {1.0, 1.0};
  }
  if (b.has("exterior")) {
    Block eb(b.at("exterior"), "domain.exterior");
    spec.sigma.fallback = read_label(eb.text("default", "dirichlet"), "domain.exterior.default");
    spec.sigma.regions.clear();
    if (eb.has("regions")) {
      const json& regions = eb.at("regions");
      if (!regions.is_array()) throw ConfigurationError("domain.exterior.regions: expected an array");
      for (std::size_t k = 0; k < regions.size(); ++k) {
        const std::string where = "domain.exterior.regions[" + std::to_string(k) + "]";
        Block rb(regions[k], where);
        Box box;
        box.lower = {-kInf, -kInf};
        box.upper = {kInf, kInf};
        if (rb.has("lower")) box.lower = read_coords(rb.at("lower"), dim, where + ".lower", -kInf);
        if (rb.has("upper")) box.upper = read_coords(rb.at("upper"), dim, where + ".upper", kInf);
        if (!rb.has("label")) throw ConfigurationError(where + ": missing label");
        const ExteriorLabel label = read_label(rb.text("label", ""), where + ".label");
        rb.finish();
        spec.sigma.regions.emplace_back(box, label);
      }
    }
    eb.finish();
  } else if (dim == 2) {
    spec.sigma.regions.clear();
    spec.sigma.fallback = ExteriorLabel::dirichlet;
  }
  spec.truncation_radius = b.real("truncation_radius", spec.truncation_radius);
  spec.resolution = b.integer("resolution", spec.resolution);
  spec.exterior_resolution = b.integer("exterior_resolution", spec.exterior_resolution);
  b.finish();
  spec.validate();
  return spec;
}

std::vector<double> read_grid(const json& j) {
  Block b(j, "lambda.grid");
  const double start = b.real("start", 0.0);
  const double stop = b.real("stop", 0.0);
  const int count = b.integer("count", 0);
  const std::string spacing = b.text("spacing", "log");
  b.finish();
  if (count < 0) throw ConfigurationError("lambda.grid.count must be nonnegative");
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {start};
  if (spacing == "log") {
    if (!(start > 0.0 && stop > 0.0)) throw ConfigurationError("log grid needs positive ends");
    for (int k = 0; k < count; ++k) {
      out.push_back(std::exp(std::log(start) + (std::log(stop) - std::log(start)) * k / (count - 1)));
    }
  } else if (spacing == "linear") {
    for (int k = 0; k < count; ++k) out.push_back(start + (stop - start) * k / (count - 1));
  } else {
    throw ConfigurationError("lambda.grid.spacing must be log or linear");
  }
  return out;
}

}  // namespace

NonlinearOptions SolverConfig::nonlinear(std::uint64_t seed) const {
  NonlinearOptions o;
  o.step_tol = step_tol;
  o.residual_tol = residual_tol;
  o.eig_tol = eig_tol;
  o.blowup_factor = blowup_factor;
  o.growth_iterations = growth_iterations;
  o.max_iterations = max_iterations;
  o.path_states = path_states;
  o.path_iterations = path_iterations;
  o.seed = seed;
  return o;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Block top(root, "config");
  if (top.has("domain")) cfg.domain = read_domain(top.at("domain"));
  if (top.has("params")) {
    Block b(top.at("params"), "params");
    cfg.params.s = b.real("s", cfg.params.s);
    cfg.params.q = b.real("q", cfg.params.q);
    cfg.params.p = b.real("p", cfg.params.p);
    cfg.params.a = b.real("a", cfg.params.a);
    b.finish();
  }
  cfg.params.validate();
  if (top.has("solver")) {
    Block b(top.at("solver"), "solver");
    SolverConfig& s = cfg.solver;
    s.step_tol = b.real("step_tol", s.step_tol);
    s.residual_tol = b.real("residual_tol", s.residual_tol);
    s.eig_tol = b.real("eig_tol", s.eig_tol);
    s.blowup_factor = b.real("blowup_factor", s.blowup_factor);
    s.growth_iterations = b.integer("growth_iterations", s.growth_iterations);
    s.max_iterations = b.integer("max_iterations", s.max_iterations);
    s.path_states = b.integer("path_states", s.path_states);
    s.path_iterations = b.integer("path_iterations", s.path_iterations);
    s.bracket_tol = b.real("bracket_tol", s.bracket_tol);
    s.verify_cases = b.integer("verify_cases", s.verify_cases);
    b.finish();
    for (double t : {s.step_tol, s.residual_tol, s.eig_tol, s.bracket_tol}) {
      if (!(t > 0.0)) throw ConfigurationError("solver tolerances must be positive");
    }
    if (!(s.blowup_factor > 1.0)) throw ConfigurationError("solver.blowup_factor must exceed 1");
    if (s.growth_iterations < 1 || s.max_iterations < 1 || s.path_iterations < 1 || s.verify_cases < 1) {
      throw ConfigurationError("solver iteration counts must be positive");
    }
    if (s.path_states < 5) throw ConfigurationError("solver.path_states must be at least 5");
  }
  if (top.has("lambda")) {
    Block b(top.at("lambda"), "lambda");
    const std::string mode = b.text("mode", "branch");
    if (mode == "single") {
      cfg.lambda.mode = LambdaMode::single;
    } else if (mode == "branch") {
      cfg.lambda.mode = LambdaMode::branch;
    } else if (mode == "bracket") {
      cfg.lambda.mode = LambdaMode::bracket;
    } else {
      throw ConfigurationError("lambda.mode must be single, branch or bracket");
    }
    cfg.lambda.relative = b.flag("relative", false);
    if (b.has("values")) {
      const json& v = b.at("values");
      if (!v.is_array()) throw ConfigurationError("lambda.values: expected an array");
      for (const json& x : v) cfg.lambda.values.push_back(as_real(x, "lambda.values"));
    }
    if (b.has("grid")) {
      if (!cfg.lambda.values.empty()) throw ConfigurationError("lambda: give either values or grid");
      cfg.lambda.values = read_grid(b.at("grid"));
    }
    b.finish();
    for (std::size_t k = 0; k < cfg.lambda.values.size(); ++k) {
      const double x = cfg.lambda.values[k];
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigurationError("lambda values must be positive and finite");
      if (k > 0 && !(x > cfg.lambda.values[k - 1])) throw ConfigurationError("lambda values must be strictly increasing");
    }
    if (cfg.lambda.mode == LambdaMode::single && cfg.lambda.values.size() > 1) {
      throw ConfigurationError("lambda.mode single takes one value");
    }
  }
  if (top.has("output")) {
    Block b(top.at("output"), "output");
    cfg.output.directory = b.text("directory", cfg.output.directory);
    if (b.has("formats")) {
      const json& f = b.at("formats");
      if (!f.is_array()) throw ConfigurationError("output.formats: expected an array");
      cfg.output.csv = false;
      cfg.output.jsonl = false;
      for (const json& x : f) {
        const std::string name = x.is_string() ? x.get<std::string>() : "";
        if (name == "csv") {
          cfg.output.csv = true;
        } else if (name == "jsonl") {
          cfg.output.jsonl = true;
        } else {
          throw ConfigurationError("output.formats entries must be csv or jsonl");
        }
      }
    }
    b.finish();
  }
  if (top.has("seed")) {
    const json& v = top.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigurationError("seed must be a nonnegative integer");
    }
    cfg.seed = v.get<std::uint64_t>();
  }
  top.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fracmix
