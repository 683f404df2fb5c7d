#include "fracmix/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracmix {

namespace {

constexpr long kMaxNeumannNodes = 2'000'000;

double axis_point(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo + std::max(1.0, std::abs(lo));
  if (std::isfinite(hi)) return hi - std::max(1.0, std::abs(hi));
  return 0.0;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Finite cut coordinates along one axis: omega faces, region faces, +-R.
std::vector<double> axis_cuts(const DomainSpec& spec, int axis) {
  std::vector<double> c{spec.omega.lower[axis], spec.omega.upper[axis], -spec.truncation_radius,
                        spec.truncation_radius};
  for (const auto& [box, label] : spec.sigma.regions) {
    if (std::isfinite(box.lower[axis])) c.push_back(box.lower[axis]);
    if (std::isfinite(box.upper[axis])) c.push_back(box.upper[axis]);
  }
  return sorted_unique(std::move(c));
}

std::vector<double> with_infinities(const std::vector<double>& cuts) {
  std::vector<double> e;
  e.reserve(cuts.size() + 2);
  e.push_back(-kInf);
  e.insert(e.end(), cuts.begin(), cuts.end());
  e.push_back(kInf);
  return e;
}

bool in_closed_omega(const DomainSpec& spec, const Point& y) {
  for (int d = 0; d < spec.dimension; ++d) {
    if (y[d] < spec.omega.lower[d] || y[d] > spec.omega.upper[d]) return false;
  }
  return true;
}

bool in_open_omega(const DomainSpec& spec, const Point& y) {
  return spec.omega.contains(y, spec.dimension);
}

struct Run {
  double lo, hi;
};

void build_1d(Discretization& d) {
  const DomainSpec& spec = d.spec;
  const double lo = spec.omega.lower[0];
  const double hi = spec.omega.upper[0];
  const int n = spec.resolution;
  const double h = (hi - lo) / n;
  const double R = spec.truncation_radius;
  d.spacing = {h, 0.0};
  d.cells = {n, 1};
  d.interior.coords.resize(n);
  d.interior.weights = Eigen::VectorXd::Constant(n, h);
  for (int i = 0; i < n; ++i) d.interior.coords[i] = {lo + (i + 0.5) * h, 0.0};

  const std::vector<double> cuts = axis_cuts(spec, 0);
  const std::vector<double> edges = with_infinities(cuts);
  std::vector<Run> runs;
  std::vector<double> far_cuts = cuts;
  const double eps = 1e-9;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k];
    const double b = edges[k + 1];
    const Point mid{axis_point(a, b), 0.0};
    if (in_closed_omega(spec, mid)) continue;
    const ExteriorLabel label = spec.sigma.label_at(mid, 1);
    if (label == ExteriorLabel::dirichlet) {
      d.dirichlet_present = true;
      continue;
    }
    d.neumann_present = true;
    const double ca = std::max(a, -R);
    const double cb = std::min(b, R);
    if (!(cb > ca)) continue;
    const long k0 = static_cast<long>(std::ceil((ca - lo) / h - eps));
    const long k1 = static_cast<long>(std::floor((cb - lo) / h + eps));
    if (k1 <= k0) continue;
    if (k1 - k0 + static_cast<long>(d.neumann.coords.size()) > kMaxNeumannNodes) {
      throw ConfigurationError("too many Neumann nodes; reduce truncation_radius or resolution");
    }
    // Lattice edges that coincide with omega faces use the exact face value.
    auto edge = [&](long j) {
      if (j == 0) return lo;
      if (j == n) return hi;
      return lo + static_cast<double>(j) * h;
    };
    for (long j = k0; j < k1; ++j) {
      d.neumann.coords.push_back({lo + (static_cast<double>(j) + 0.5) * h, 0.0});
      d.neumann_lattice.push_back(j);
    }
    double rlo = edge(k0);
    double rhi = edge(k1);
    if (std::abs(rlo - a) <= eps * h) rlo = a;
    if (std::abs(rhi - b) <= eps * h) rhi = b;
    runs.push_back({rlo, rhi});
    far_cuts.push_back(rlo);
    far_cuts.push_back(rhi);
  }
  d.neumann.weights = Eigen::VectorXd::Constant(static_cast<long>(d.neumann.coords.size()), h);

  const ExteriorCut cut{cuts, {}};
  const ExteriorCut fcut{sorted_unique(far_cuts), {}};
  const double s = d.kernel.s;
  d.kappa_dirichlet.resize(n);
  d.kappa_far_neumann.resize(n);
  auto dirichlet = [&](const Point& y) {
    return !in_open_omega(spec, y) && spec.sigma.label_at(y, 1) == ExteriorLabel::dirichlet;
  };
  auto far = [&](const Point& y) {
    if (in_open_omega(spec, y) || spec.sigma.label_at(y, 1) != ExteriorLabel::neumann) return false;
    for (const Run& r : runs) {
      if (y[0] > r.lo && y[0] < r.hi) return false;
    }
    return true;
  };
  for (int i = 0; i < n; ++i) {
    const Point& x = d.interior.coords[i];
    d.kappa_dirichlet[i] = ray_integral(x, cut, 1, s, dirichlet);
    d.kappa_far_neumann[i] = ray_integral(x, fcut, 1, s, far);
  }
}

void build_2d(Discretization& d) {
  const DomainSpec& spec = d.spec;
  const int n = spec.resolution;
  const double x0 = spec.omega.lower[0];
  const double y0 = spec.omega.lower[1];
  const double hx = (spec.omega.upper[0] - x0) / n;
  const double hy = (spec.omega.upper[1] - y0) / n;
  const double R = spec.truncation_radius;
  d.spacing = {hx, hy};
  d.cells = {n, n};
  const int m = n * n;
  d.interior.coords.resize(m);
  d.interior.weights = Eigen::VectorXd::Constant(m, hx * hy);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) d.interior.coords[j * n + i] = {x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy};
  }

  const ExteriorCut cut{axis_cuts(spec, 0), axis_cuts(spec, 1)};
  const std::vector<double> ex = with_infinities(cut.xs);
  const std::vector<double> ey = with_infinities(cut.ys);
  const double f = spec.exterior_resolution;
  std::vector<double> weights;
  for (std::size_t b = 0; b + 1 < ey.size(); ++b) {
    for (std::size_t a = 0; a + 1 < ex.size(); ++a) {
      const Point mid{axis_point(ex[a], ex[a + 1]), axis_point(ey[b], ey[b + 1])};
      if (in_closed_omega(spec, mid)) continue;
      const ExteriorLabel label = spec.sigma.label_at(mid, 2);
      if (label == ExteriorLabel::dirichlet) {
        d.dirichlet_present = true;
        continue;
      }
      d.neumann_present = true;
      if (std::max(std::abs(mid[0]), std::abs(mid[1])) >= R) continue;
      const double wx = ex[a + 1] - ex[a];
      const double wy = ey[b + 1] - ey[b];
      const long nx = std::max(1L, static_cast<long>(std::ceil(wx / (hx * f) - 1e-9)));
      const long ny = std::max(1L, static_cast<long>(std::ceil(wy / (hy * f) - 1e-9)));
      if (nx * ny + static_cast<long>(weights.size()) > kMaxNeumannNodes) {
        throw ConfigurationError("too many Neumann nodes; reduce truncation_radius or raise exterior_resolution");
      }
      const double cx = wx / nx;
      const double cy = wy / ny;
      for (long jj = 0; jj < ny; ++jj) {
        for (long ii = 0; ii < nx; ++ii) {
          d.neumann.coords.push_back({ex[a] + (ii + 0.5) * cx, ey[b] + (jj + 0.5) * cy});
          weights.push_back(cx * cy);
        }
      }
    }
  }
  d.neumann.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<long>(weights.size()));

  const double s = d.kernel.s;
  auto dirichlet = [&](const Point& y) {
    return !in_open_omega(spec, y) && spec.sigma.label_at(y, 2) == ExteriorLabel::dirichlet;
  };
  auto far = [&](const Point& y) {
    return !in_open_omega(spec, y) && std::max(std::abs(y[0]), std::abs(y[1])) > R &&
           spec.sigma.label_at(y, 2) == ExteriorLabel::neumann;
  };
  d.kappa_dirichlet.resize(m);
  d.kappa_far_neumann.resize(m);
  for (int i = 0; i < m; ++i) {
    const Point& x = d.interior.coords[i];
    d.kappa_dirichlet[i] = d.dirichlet_present ? ray_integral(x, cut, 2, s, dirichlet) : 0.0;
    d.kappa_far_neumann[i] = d.neumann_present ? ray_integral(x, cut, 2, s, far) : 0.0;
  }
}

}  // namespace

bool Box::contains(const Point& y, int dim) const {
  for (int d = 0; d < dim; ++d) {
    if (!(y[d] > lower[d] && y[d] < upper[d])) return false;
  }
  return true;
}

ExteriorLabel SigmaPartition::label_at(const Point& y, int dim) const {
  for (const auto& [box, label] : regions) {
    if (box.contains(y, dim)) return label;
  }
  return fallback;
}

void DomainSpec::validate() const {
  if (dimension != 1 && dimension != 2) throw ConfigurationError("dimension must be 1 or 2");
  double diam2 = 0.0;
  double dist2 = 0.0;
  for (int d = 0; d < dimension; ++d) {
    const double lo = omega.lower[d];
    const double hi = omega.upper[d];
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigurationError("omega must be bounded");
    if (!(hi > lo)) throw ConfigurationError("omega is empty");
    diam2 += (hi - lo) * (hi - lo);
    const double gap = lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0);
    dist2 += gap * gap;
  }
  if (resolution < 4) throw ConfigurationError("resolution must be at least 4");
  if (exterior_resolution < 1) throw ConfigurationError("exterior_resolution must be at least 1");
  if (!(truncation_radius > std::sqrt(diam2) + std::sqrt(dist2))) {
    throw ConfigurationError("truncation_radius must exceed the extent of omega");
  }
  for (const auto& [box, label] : sigma.regions) {
    for (int d = 0; d < dimension; ++d) {
      if (!(box.upper[d] > box.lower[d])) throw ConfigurationError("empty exterior region box");
    }
  }
}

DomainSpec DomainSpec::default_1d() {
  DomainSpec spec;
  spec.omega.lower = {0.0, 0.0};
  spec.omega.upper = {1.0, 1.0};
  Box left;
  left.lower = {-kInf, -kInf};
  left.upper = {0.0, kInf};
  Box right;
  right.lower = {1.0, -kInf};
  right.upper = {kInf, kInf};
  spec.sigma.regions = {{left, ExteriorLabel::dirichlet}, {right, ExteriorLabel::neumann}};
  return spec;
}

double Discretization::omega_measure() const {
  double m = 1.0;
  for (int d = 0; d < kernel.dimension; ++d) m *= spec.omega.upper[d] - spec.omega.lower[d];
  return m;
}

Discretization build_discretization(const DomainSpec& spec, double s, double a) {
  spec.validate();
  if (!(s > 0.0 && s < 1.0)) throw ConfigurationError("s must lie in (0,1)");
  if (!(a > 0.0)) throw ConfigurationError("normalization constant must be positive");
  if (spec.dimension < 2.0 * s) throw ConfigurationError("dimension must be at least 2s");
  Discretization d;
  d.spec = spec;
  d.kernel = {spec.dimension, s, a};
  if (spec.dimension == 1) {
    build_1d(d);
  } else {
    build_2d(d);
  }
  if (!d.dirichlet_present && !d.neumann_present) throw ConfigurationError("exterior has no labels");
  return d;
}

double kernel_coefficient(const Point& x, const Point& y, const KernelParams& k) {
  double r2 = 0.0;
  for (int d = 0; d < k.dimension; ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
  if (r2 == 0.0) throw std::domain_error("kernel evaluated at coincident points");
  return k.a * std::pow(r2, -0.5 * (k.dimension + 2.0 * k.s));
}

double far_field_tail(const Point& x, double R, const KernelParams& k) {
  for (int d = 0; d < k.dimension; ++d) {
    if (!(std::abs(x[d]) < R)) throw std::domain_error("truncation radius does not exceed the point");
  }
  const ExteriorCut cut{{-R, R}, {-R, R}};
  auto outside = [&](const Point& y) {
    double m = std::abs(y[0]);
    if (k.dimension == 2) m = std::max(m, std::abs(y[1]));
    return m > R;
  };
  return k.a * ray_integral(x, cut, k.dimension, k.s, outside);
}

double cell_second_moment(double hx, double hy, double s) {
  const double tc = std::atan2(hy, hx);
  const double e = 2.0 - 2.0 * s;
  auto f = [&](double t) {
    const double c = std::cos(t);
    const double sn = std::sin(t);
    const double rho = t < tc ? 0.5 * hx / c : 0.5 * hy / sn;
    return c * c * std::pow(rho, e) / e;
  };
  using boost::math::quadrature::gauss_kronrod;
  return 4.0 * (gauss_kronrod<double, 31>::integrate(f, 0.0, tc, 15, 1e-14) +
                gauss_kronrod<double, 31>::integrate(f, tc, std::numbers::pi / 2, 15, 1e-14));
}

}  // namespace fracmix
