#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fracmix {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Points always carry two coordinates; in 1D the second is ignored.
using Point = std::array<double, 2>;

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExteriorLabel { dirichlet, neumann };

struct Box {
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};

  // Open box test over the first `dim` axes.
  bool contains(const Point& y, int dim) const;
};

// First matching region wins; points matching nothing get `fallback`.
struct SigmaPartition {
  ExteriorLabel fallback = ExteriorLabel::dirichlet;
  std::vector<std::pair<Box, ExteriorLabel>> regions;

  ExteriorLabel label_at(const Point& y, int dim) const;
};

struct DomainSpec {
  int dimension = 1;
  Box omega;
  SigmaPartition sigma;
  double truncation_radius = 20.0;
  int resolution = 200;
  int exterior_resolution = 1;

  void validate() const;

  // Omega = (0,1), Dirichlet on (-inf,0), Neumann on (1,inf).
  static DomainSpec default_1d();
};

struct KernelParams {
  int dimension = 1;
  double s = 0.5;
  double a = 2.0;
};

struct NodeSet {
  std::vector<Point> coords;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(coords.size()); }
};

struct Discretization {
  DomainSpec spec;
  KernelParams kernel;
  std::array<double, 2> spacing{0.0, 0.0};
  std::array<int, 2> cells{1, 1};
  NodeSet interior;
  NodeSet neumann;
  // 1D only: integer lattice offset of each Neumann cell relative to the
  // first interior cell. Empty in 2D.
  std::vector<long> neumann_lattice;
  // Kernel integrals without the normalization constant.
  Eigen::VectorXd kappa_dirichlet;
  Eigen::VectorXd kappa_far_neumann;
  bool dirichlet_present = false;
  bool neumann_present = false;

  int dimension() const { return kernel.dimension; }
  int size() const { return interior.size(); }
  bool lattice() const { return kernel.dimension == 1; }
  double omega_measure() const;
};

Discretization build_discretization(const DomainSpec& spec, double s, double a = 2.0);

double kernel_coefficient(const Point& x, const Point& y, const KernelParams& k);

// a * integral of |x-y|^{-N-2s} over |y|_inf > R.
double far_field_tail(const Point& x, double R, const KernelParams& k);

// Integral of |x-y|^{-N-2s} over the part of the exterior selected by
// `select`, computed along rays from x. The selector sees each ray segment
// midpoint and must be constant between the listed breakpoints.
struct ExteriorCut {
  std::vector<double> xs;
  std::vector<double> ys;
};

template <class Select>
double ray_integral(const Point& x, const ExteriorCut& cut, int dim, double s,
                    const Select& select);

// Second moment of the kernel over a centered hx-by-hy cell,
// integral of z_x^2 |z|^{-2-2s}.
double cell_second_moment(double hx, double hy, double s);

}  // namespace fracmix

#include "fracmix/detail/ray_integral.hpp"
