#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracmix/nonlinear.hpp"

namespace fracmix {

// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_real(double x);
// Same digits, but null for non-finite values.
std::string json_real(double x);
std::string json_string(const std::string& s);
std::string json_array(const Eigen::VectorXd& v);

inline constexpr const char* kBranchHeader = "lambda,energy,sup_norm,mu1,residual,iterations,kind";

std::string branch_csv(const std::vector<SolutionRecord>& records);
std::string solution_json(const SolutionRecord& rec, const Discretization& d, std::uint64_t seed);

// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& content);

}  // namespace fracmix
