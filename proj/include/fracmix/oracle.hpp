#pragma once

#include <functional>
#include <span>

#include "fracmix/geometry.hpp"

namespace fracmix {

using SpaceFunction = std::function<double(const Point&)>;

// Principal-value quadrature of (-Delta)^s u at x:
//   a/2 * int (2u(x) - u(x+z) - u(x-z)) |z|^{-N-2s} dz
// on geometrically graded radial panels. `breakpoints` lists absolute
// coordinates (1D) where u may lose smoothness; they become panel edges.
// Only meant as an independent reference for tests.
double oracle_pv(const SpaceFunction& u, const Point& x, const KernelParams& k, int depth,
                 std::span<const double> breakpoints = {});

// Continuum exterior value forced by a vanishing nonlocal normal derivative
// at y outside (lo, hi):
//   int_lo^hi u(t)|y-t|^{-1-2s} dt / int_lo^hi |y-t|^{-1-2s} dt.
double continuum_extension_1d(const std::function<double(double)>& u, double lo, double hi, double y,
                              double s, int depth);

}  // namespace fracmix
