#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracmix/oracle.hpp"

using namespace fracmix;

namespace {

constexpr double pi = std::numbers::pi;

// Fractional Laplacian of (1-|x|^2)_+^s is constant in the unit ball; with the
// kernel normalization a instead of the standard C_{N,s} the constant becomes
// (a / C_{N,s}) 2^{2s} Gamma(1+s) Gamma(N/2+s) / Gamma(N/2).
double ball_constant(int N, double s, double a) {
  const double C = s * std::pow(2.0, 2.0 * s) * std::tgamma(0.5 * N + s) /
                   (std::pow(pi, 0.5 * N) * std::tgamma(1.0 - s));
  return a / C * std::pow(2.0, 2.0 * s) * std::tgamma(1.0 + s) * std::tgamma(0.5 * N + s) / std::tgamma(0.5 * N);
}

}  // namespace

TEST_CASE("constants and affine fields are annihilated") {
  const KernelParams k{1, 0.5, 2.0};
  auto one = [](const Point&) { return 1.0; };
  auto lin = [](const Point& y) { return y[0]; };
  for (double x : {0.1, 0.5, 0.93}) {
    CHECK(std::abs(oracle_pv(one, {x, 0.0}, k, 10)) < 1e-8);
    CHECK(std::abs(oracle_pv(lin, {x, 0.0}, k, 10)) < 1e-8);
  }
  const KernelParams k2{2, 0.3, 2.0};
  CHECK(std::abs(oracle_pv(one, {0.4, 0.7}, k2, 6)) < 1e-8);
}

TEST_CASE("clamped parabola at the origin") {
  // x^2 grows too fast for the kernel at s = 1/2, so clamp it at 1:
  // a * (int_0^1 -2 dr + int_1^inf -2 r^{-2} dr) = -8.
  const KernelParams k{1, 0.5, 2.0};
  auto u = [](const Point& y) { return std::min(y[0] * y[0], 1.0); };
  const double bp[] = {-1.0, 1.0};
  const double coarse = oracle_pv(u, {0.0, 0.0}, k, 8, bp);
  const double fine = oracle_pv(u, {0.0, 0.0}, k, 14, bp);
  CHECK(fine < 0.0);
  CHECK(std::abs(coarse - fine) < 1e-4);
  CHECK(fine == doctest::Approx(-8.0).epsilon(1e-8));
}

TEST_CASE("ball profile in 1D") {
  // The square-root edge limits what the graded rule can resolve.
  for (double s : {0.3, 0.5, 0.7}) {
    const KernelParams k{1, s, 2.0};
    auto u = [s](const Point& y) { return y[0] * y[0] < 1.0 ? std::pow(1.0 - y[0] * y[0], s) : 0.0; };
    const double bp[] = {-1.0, 1.0};
    const double expected = ball_constant(1, s, 2.0);
    for (double x : {0.0, 0.3, -0.6}) {
      CHECK(oracle_pv(u, {x, 0.0}, k, 14, bp) == doctest::Approx(expected).epsilon(1e-4));
    }
  }
  CHECK(ball_constant(1, 0.5, 2.0) == doctest::Approx(2.0 * pi));
}

TEST_CASE("ball profile in 2D at the centre") {
  const double s = 0.5;
  const KernelParams k{2, s, 2.0};
  auto u = [s](const Point& y) {
    const double r2 = y[0] * y[0] + y[1] * y[1];
    return r2 < 1.0 ? std::pow(1.0 - r2, s) : 0.0;
  };
  CHECK(ball_constant(2, 0.5, 2.0) == doctest::Approx(2.0 * pi * pi));
  CHECK(oracle_pv(u, {0.0, 0.0}, k, 8) == doctest::Approx(2.0 * pi * pi).epsilon(1e-4));
}

TEST_CASE("continuum extension") {
  auto c = [](double) { return 2.5; };
  CHECK(continuum_extension_1d(c, 0.0, 1.0, 1.3, 0.5, 8) == doctest::Approx(2.5).epsilon(1e-14));
  auto u = [](double t) { return t * t; };
  // Far away the extension is the plain mean 1/3.
  CHECK(continuum_extension_1d(u, 0.0, 1.0, 1e4, 0.5, 8) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  // s = 1/2, y = 2: int_0^1 t^2 (2-t)^{-2} dt = 3 - 4 ln 2 and int_0^1 (2-t)^{-2} dt = 1/2.
  CHECK(continuum_extension_1d(u, 0.0, 1.0, 2.0, 0.5, 8) == doctest::Approx(2.0 * (3.0 - 4.0 * std::log(2.0))).epsilon(1e-12));
  const double v = continuum_extension_1d(u, 0.0, 1.0, 1.01, 0.5, 8);
  CHECK(v <= 1.0);
  CHECK(v >= 0.0);
  CHECK_THROWS(continuum_extension_1d(u, 0.0, 1.0, 0.5, 0.5, 8));
}
