#include "fracmix/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracmix {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string json_real(double x) { return std::isfinite(x) ? format_real(x) : "null"; }

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string json_array(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += json_real(v[i]);
  }
  return out + "]";
}

std::string branch_csv(const std::vector<SolutionRecord>& records) {
  std::ostringstream os;
  os << kBranchHeader << '\n';
  for (const SolutionRecord& r : records) {
    os << format_real(r.lambda) << ',' << format_real(r.energy) << ',' << format_real(r.sup_norm) << ','
       << format_real(r.mu1) << ',' << format_real(r.residual) << ',' << r.iterations << ',' << to_string(r.kind)
       << '\n';
  }
  return os.str();
}

std::string solution_json(const SolutionRecord& rec, const Discretization& d, std::uint64_t seed) {
  Eigen::VectorXd x(d.size());
  Eigen::VectorXd y(d.size());
  for (int i = 0; i < d.size(); ++i) {
    x[i] = d.interior.coords[i][0];
    y[i] = d.interior.coords[i][1];
  }
  std::ostringstream os;
  os << "{\"kind\":" << json_string(to_string(rec.kind)) << ",\"lambda\":" << json_real(rec.lambda)
     << ",\"seed\":" << seed << ",\"energy\":" << json_real(rec.energy) << ",\"sup_norm\":" << json_real(rec.sup_norm)
     << ",\"mu1\":" << json_real(rec.mu1) << ",\"residual\":" << json_real(rec.residual)
     << ",\"iterations\":" << rec.iterations << ",\"floored\":" << (rec.floored ? "true" : "false")
     << ",\"x\":" << json_array(x);
  if (d.dimension() == 2) os << ",\"y\":" << json_array(y);
  os << ",\"weights\":" << json_array(d.interior.weights) << ",\"u\":" << json_array(rec.field) << "}";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace fracmix
