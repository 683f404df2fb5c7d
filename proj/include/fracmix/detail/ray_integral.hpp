#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fracmix {

namespace detail {

// Sum over ray segments of the radial antiderivative (r_a^{-2s} - r_b^{-2s})/(2s)
// for segments accepted by `select`.
template <class Select>
double ray_sum(const Point& x, double cx, double cy, const ExteriorCut& cut, int dim, double s,
               const Select& select, std::vector<double>& scratch) {
  scratch.clear();
  constexpr double tiny = 1e-300;
  if (std::abs(cx) > tiny) {
    for (double X : cut.xs) {
      const double r = (X - x[0]) / cx;
      if (r > 0.0 && std::isfinite(r)) scratch.push_back(r);
    }
  }
  if (dim == 2 && std::abs(cy) > tiny) {
    for (double Y : cut.ys) {
      const double r = (Y - x[1]) / cy;
      if (r > 0.0 && std::isfinite(r)) scratch.push_back(r);
    }
  }
  std::sort(scratch.begin(), scratch.end());
  scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
  double total = 0.0;
  const double e = -2.0 * s;
  for (std::size_t k = 0; k < scratch.size(); ++k) {
    const double ra = scratch[k];
    const bool last = k + 1 == scratch.size();
    const double rb = last ? kInf : scratch[k + 1];
    const double rm = last ? ra + std::max(1.0, ra) : 0.5 * (ra + rb);
    const Point mid{x[0] + rm * cx, x[1] + rm * cy};
    if (!select(mid)) continue;
    const double tail = last ? 0.0 : std::pow(rb, e);
    total += (std::pow(ra, e) - tail) / (2.0 * s);
  }
  return total;
}

}  // namespace detail

template <class Select>
double ray_integral(const Point& x, const ExteriorCut& cut, int dim, double s,
                    const Select& select) {
  std::vector<double> scratch;
  if (dim == 1) {
    return detail::ray_sum(x, 1.0, 0.0, cut, 1, s, select, scratch) +
           detail::ray_sum(x, -1.0, 0.0, cut, 1, s, select, scratch);
  }
  constexpr double pi = std::numbers::pi;
  std::vector<double> angles{-pi, -pi / 2, 0.0, pi / 2, pi};
  for (double X : cut.xs) {
    for (double Y : cut.ys) {
      if (!std::isfinite(X) || !std::isfinite(Y)) continue;
      if (X == x[0] && Y == x[1]) continue;
      angles.push_back(std::atan2(Y - x[1], X - x[0]));
    }
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
  auto f = [&](double t) {
    return detail::ray_sum(x, std::cos(t), std::sin(t), cut, 2, s, select, scratch);
  };
  // Relative targets much below 1e-10 fall under the roundoff floor of the
  // Kronrod error estimate and only force maximal subdivision.
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < angles.size(); ++k) {
    if (angles[k + 1] - angles[k] < 1e-15) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        f, angles[k], angles[k + 1], 15, 1e-10);
  }
  return total;
}

}  // namespace fracmix
