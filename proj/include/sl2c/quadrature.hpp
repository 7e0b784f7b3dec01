#pragma once

// Quadrature building blocks: Gauss-Legendre panels, graded-geometric meshes
// for boundary layers, periodic trapezoid rules, and a compactified real
// line.  Every rule is a flat node/weight list so refinement (doubling the
// panel count or order) is uniform across operations.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sl2c/fit.hpp"

namespace sl2c {

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;

  size_t size() const { return x.size(); }

  void append(double xi, double wi) {
    x.push_back(xi);
    w.push_back(wi);
  }
  void append(const Quadrature& q) {
    x.insert(x.end(), q.x.begin(), q.x.end());
    w.insert(w.end(), q.w.begin(), q.w.end());
  }

  template <class Fn>
  double integrate(Fn&& f) const {
    std::vector<double> terms(x.size());
    for (size_t i = 0; i < x.size(); ++i) terms[i] = w[i] * f(x[i]);
    return pairwise_sum(terms);
  }
};

namespace detail {
/// Gauss-Legendre nodes on [-1,1] by Newton iteration on Legendre P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}
}  // namespace detail

/// Gauss-Legendre rule on [a, b].
inline Quadrature gl_panel(double a, double b, int order) {
  std::vector<double> x, w;
  detail::gauss_legendre(order, x, w);
  Quadrature q;
  for (int i = 0; i < order; ++i) q.append(0.5 * (a + b) + 0.5 * (b - a) * x[i], 0.5 * (b - a) * w[i]);
  return q;
}

/// Graded-geometric mesh for (0, end]: dyadic panels [end 2^{-k-1}, end 2^{-k}],
/// k = 0..levels-1, GL nodes in each.  Resolves t^s log^m(1/t) integrands.
inline Quadrature graded_panels(double end, int levels, int order = 6) {
  Quadrature q;
  for (int k = 0; k < levels; ++k)
    q.append(gl_panel(end * std::pow(2.0, -(k + 1)), end * std::pow(2.0, -k), order));
  return q;
}

/// Trapezoid rule for a periodic integrand on [0, period).
inline Quadrature periodic_trapezoid(double period, int n) {
  Quadrature q;
  for (int i = 0; i < n; ++i) q.append(period * i / n, period / n);
  return q;
}

/// Compactified real line, graded toward 0 and toward infinity on both
/// sides: |x| in (0,1] dyadic-graded, |x| in [1, 2^levels) via x = 1/y.
inline Quadrature compactified_line(int levels, int order = 6) {
  Quadrature inner = graded_panels(1.0, levels, order);
  Quadrature q;
  for (size_t i = 0; i < inner.size(); ++i) {
    const double y = inner.x[i], w = inner.w[i];
    q.append(y, w);
    q.append(-y, w);
    q.append(1.0 / y, w / (y * y));
    q.append(-1.0 / y, w / (y * y));
  }
  return q;
}

/// Graded panels around a center point inside [lo, hi] (both sides), plus a
/// uniform background; for integrands with a boundary-layer peak at a known
/// interior location.
inline Quadrature peaked_interval(double lo, double hi, double center, int levels, int order = 4,
                                  int background = 8) {
  Quadrature q;
  const double left = center - lo, right = hi - center;
  if (left > 0) {
    Quadrature g = graded_panels(left, levels, order);
    for (size_t i = 0; i < g.size(); ++i) q.append(center - g.x[i], g.w[i]);
  }
  if (right > 0) {
    Quadrature g = graded_panels(right, levels, order);
    for (size_t i = 0; i < g.size(); ++i) q.append(center + g.x[i], g.w[i]);
  }
  (void)background;
  return q;
}

/// Node-count specification for the integral operations.  The scheme is
/// fixed (trapezoid on periodic axes, Gauss-Legendre panels on compact
/// intervals, graded-geometric meshes on boundary axes); only counts vary.
struct QuadratureSpec {
  int angular = 64;       // nodes per circle
  int level_lo = 6;       // shallowest dyadic boundary level j0
  int level_hi = 20;      // deepest dyadic boundary level j1
  int n_axis = 128;       // nodes on the compactified N-axis
  int boundary_levels = 30;  // graded panels per boundary axis in quadratures
  int panel_order = 6;    // GL order within panels

  void validate() const {
    if (angular < 8 || n_axis < 8) throw std::invalid_argument("QuadratureSpec: node counts must be >= 8");
    if (!(level_lo < level_hi)) throw std::invalid_argument("QuadratureSpec: need level_lo < level_hi");
  }
  QuadratureSpec refined() const {
    QuadratureSpec r = *this;
    r.angular *= 2;
    r.n_axis *= 2;
    r.boundary_levels += 6;
    r.panel_order += 2;
    return r;
  }
};

/// Evaluate an integral at a spec and its refinement; returns the refined
/// value and the disagreement as an error estimate.  Every reported integral
/// in the library goes through this gate.
struct Refined {
  double value = 0.0;
  double error = 0.0;
};

inline Refined self_check(const std::function<double(const QuadratureSpec&)>& eval,
                          const QuadratureSpec& spec) {
  const double coarse = eval(spec);
  const double fine = eval(spec.refined());
  return Refined{fine, std::abs(fine - coarse)};
}

}  // namespace sl2c
