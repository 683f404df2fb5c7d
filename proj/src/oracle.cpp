#include "fracmix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace fracmix {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

// x^e, with the s = 1/2 kernel exponents done without pow.
double power(double x, double e) {
  if (e == -2.0) return 1.0 / (x * x);
  if (e == -1.0) return 1.0 / x;
  if (e == 0.0) return 1.0;
  return std::pow(x, e);
}

// Integrates f over [lo, hi] with panels halved `depth` times toward each
// requested end.
template <class F>
double graded(const F& f, double lo, double hi, int depth, bool grade_lo, bool grade_hi) {
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi);
  double total = 0.0;
  auto side = [&](double a, double b, bool toward_a) {
    if (!toward_a) {
      total += GL::integrate(f, a, b);
      return;
    }
    double right = b;
    double len = b - a;
    for (int k = 0; k < depth; ++k) {
      len *= 0.5;
      total += GL::integrate(f, a + len, right);
      right = a + len;
    }
    total += GL::integrate(f, a, right);
  };
  side(lo, mid, grade_lo);
  // Same grading toward hi.
  if (grade_hi) {
    double left = mid;
    double len = hi - mid;
    for (int k = 0; k < depth; ++k) {
      len *= 0.5;
      total += GL::integrate(f, left, hi - len);
      left = hi - len;
    }
    total += GL::integrate(f, left, hi);
  } else {
    total += GL::integrate(f, mid, hi);
  }
  return total;
}

// a * int_0^inf g(r) r^{-1-2s} dr where g(r) ~ c r^2 near 0 and g is bounded.
double radial_pv(const std::function<double(double)>& g, double s, int depth, std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [](double c) { return !(c > 0.0) || !std::isfinite(c); }),
             cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (cuts.empty()) cuts.push_back(1.0);
  const double first = cuts.front();
  const double reach = cuts.back() + 1.0;
  cuts.push_back(reach);
  auto f = [&](double r) { return g(r) * power(r, -1.0 - 2.0 * s); };

  // Innermost piece: graded toward zero, remainder from the local quadratic.
  const double eps = first * std::ldexp(1.0, -(depth + 8));
  double total = g(eps) * std::pow(eps, -2.0 * s) / (2.0 - 2.0 * s);
  {
    double right = first;
    double len = first;
    while (len > eps * 1.0000001) {
      len *= 0.5;
      const double left = std::max(len, eps);
      total += GL::integrate(f, left, right);
      right = left;
    }
  }
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += graded(f, cuts[k], cuts[k + 1], depth, true, true);
  }
  // Tail: r = reach / t, dr = reach / t^2 dt.
  auto tail = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double r = reach / t;
    return g(r) * power(reach, -2.0 * s) * power(t, 2.0 * s - 1.0);
  };
  total += graded(tail, 0.0, 1.0, depth + 10, true, false);
  return total;
}

}  // namespace

double oracle_pv(const SpaceFunction& u, const Point& x, const KernelParams& k, int depth,
                 std::span<const double> breakpoints) {
  if (depth < 1) throw std::invalid_argument("quadrature depth must be positive");
  const double ux = u(x);
  if (!std::isfinite(ux)) throw std::domain_error("non-finite sample");
  auto checked = [&](const Point& y) {
    const double v = u(y);
    if (!std::isfinite(v)) throw std::domain_error("non-finite sample");
    return v;
  };
  if (k.dimension == 1) {
    std::vector<double> cuts;
    for (double b : breakpoints) cuts.push_back(std::abs(b - x[0]));
    auto g = [&](double r) { return 2.0 * ux - checked({x[0] + r, 0.0}) - checked({x[0] - r, 0.0}); };
    return k.a * radial_pv(g, k.s, depth, cuts);
  }
  // Angular composite Gauss over [0, pi); the radial part sees no cuts.
  const int panels = 4 * depth;
  const double dt = std::numbers::pi / panels;
  double total = 0.0;
  for (int j = 0; j < panels; ++j) {
    auto ang = [&](double t) {
      const double c = std::cos(t);
      const double sn = std::sin(t);
      auto g = [&](double r) {
        return 2.0 * ux - checked({x[0] + r * c, x[1] + r * sn}) - checked({x[0] - r * c, x[1] - r * sn});
      };
      // Extra factor r from the polar measure: |z|^{-2-2s} r dr = r^{-1-2s} dr.
      return radial_pv(g, k.s, depth, {});
    };
    total += GL::integrate(ang, j * dt, (j + 1) * dt);
  }
  return k.a * total;
}

double continuum_extension_1d(const std::function<double(double)>& u, double lo, double hi, double y,
                              double s, int depth) {
  if (y > lo && y < hi) throw std::invalid_argument("point lies inside the interval");
  const double e = y >= hi ? hi : lo;
  const double ue = u(e);
  auto f = [&](double t) { return (u(t) - ue) * power(std::abs(y - t), -1.0 - 2.0 * s); };
  const bool right = y >= hi;
  const double num = graded(f, lo, hi, depth + 4, !right, right);
  const double dfar = std::abs(y - (right ? lo : hi));
  const double dnear = std::abs(y - e);
  const double den = (std::pow(dnear, -2.0 * s) - std::pow(dfar, -2.0 * s)) / (2.0 * s);
  return ue + num / den;
}

}  // namespace fracmix
