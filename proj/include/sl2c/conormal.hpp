#pragma once

// Numerical conormal analysis: weights with log orders, b-derivatives by
// finite differences on graded-geometric meshes, test operators, and the
// decay verifier that certifies membership in weighted conormal spaces at
// grid resolution.
//
// Boundary axes are stored in the level variable j (t = 2^{-j}), where
// t d/dt = -(1/log 2) d/dj; differentiating in j removes the mesh-ratio
// error of naive graded-mesh differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sl2c/fit.hpp"

namespace sl2c {

/// ilog rho = 1/log(1/rho), the logarithmic weight; defined for rho in (0,1).
inline double ilog(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("ilog: rho must lie in (0,1)");
  return 1.0 / std::log(1.0 / rho);
}

// ---------------------------------------------------------------------------
// weights

struct HypersurfaceWeight {
  double power = 0.0;      // rho^power
  double log_order = 0.0;  // (ilog rho)^log_order, ignored when log_rapid
  bool log_rapid = false;  // the formal (ilog rho)^infinity marker
  bool smooth = false;     // the formal smoothness weight iota_H
};

/// Per-hypersurface weight data; encodes spaces like (ilog rho)^inf rho^kappa A.
struct WeightSpec {
  std::map<std::string, HypersurfaceWeight> faces;

  static WeightSpec hc(const std::string& face, double kappa) {
    WeightSpec w;
    w.faces[face] = HypersurfaceWeight{kappa, 0.0, true, false};
    return w;
  }
  WeightSpec& with(const std::string& face, double power, double log_order = 0.0,
                   bool log_rapid = false) {
    faces[face] = HypersurfaceWeight{power, log_order, log_rapid, false};
    return *this;
  }
};

// ---------------------------------------------------------------------------
// grids

enum class AxisKind { Angular, Boundary };

struct Axis {
  std::string label;   // hypersurface label for boundary axes
  AxisKind kind = AxisKind::Angular;
  std::vector<double> nodes;  // angular: points in [0, period); boundary: j-levels, increasing
  double period = 2.0 * M_PI;

  static Axis angular(std::string label, int n, double period = 2.0 * M_PI) {
    Axis a;
    a.label = std::move(label);
    a.kind = AxisKind::Angular;
    a.period = period;
    a.nodes.resize(n);
    for (int i = 0; i < n; ++i) a.nodes[i] = period * i / n;
    return a;
  }
  /// j-levels from j0 to j1 in steps of dj (t = 2^{-j})
  static Axis boundary(std::string label, double j0, double j1, double dj = 1.0) {
    Axis a;
    a.label = std::move(label);
    a.kind = AxisKind::Boundary;
    for (double j = j0; j <= j1 + 1e-9; j += dj) a.nodes.push_back(j);
    return a;
  }
  double spacing() const {
    if (nodes.size() < 2) throw std::invalid_argument("Axis: need >= 2 nodes");
    return kind == AxisKind::Angular ? period / double(nodes.size()) : nodes[1] - nodes[0];
  }
};

/// Sampled scalar function on a structured product grid over a chart.
struct GridFunction {
  std::vector<Axis> axes;
  std::vector<double> values;  // row-major, last axis fastest

  size_t size() const { return values.size(); }
  size_t stride(size_t axis) const {
    size_t s = 1;
    for (size_t a = axis + 1; a < axes.size(); ++a) s *= axes[a].nodes.size();
    return s;
  }
  static GridFunction sample(std::vector<Axis> ax,
                             const std::function<double(const std::vector<double>&)>& f) {
    GridFunction u;
    u.axes = std::move(ax);
    size_t total = 1;
    for (auto& a : u.axes) total *= a.nodes.size();
    u.values.resize(total);
    std::vector<double> c(u.axes.size());
    for (size_t idx = 0; idx < total; ++idx) {
      size_t rem = idx;
      for (size_t a = u.axes.size(); a-- > 0;) {
        const size_t n = u.axes[a].nodes.size();
        c[a] = u.axes[a].nodes[rem % n];
        rem /= n;
      }
      u.values[idx] = f(c);
    }
    return u;
  }
};

// ---------------------------------------------------------------------------
// finite differences

namespace detail {

/// Fornberg weights for the m-th derivative at point x0 given nodes xs.
inline std::vector<double> fornberg(double x0, const std::vector<double>& xs, int m) {
  const int n = int(xs.size()) - 1;
  std::vector<std::vector<std::vector<double>>> d(
      n + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(m + 1, 0.0)));
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i <= n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      for (int k = 0; k <= std::min(i, m); ++k)
        d[i][j][k] = ((xs[i] - x0) * d[i - 1][j][k] - (k ? k * d[i - 1][j][k - 1] : 0.0)) / c3;
    }
    for (int k = 0; k <= std::min(i, m); ++k)
      d[i][i][k] = c1 / c2 * ((k ? k * d[i - 1][i - 1][k - 1] : 0.0) - (xs[i - 1] - x0) * d[i - 1][i - 1][k]);
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = d[n][j][m];
  return w;
}

/// First derivative along one axis, order-p stencils (shifted near edges on
/// boundary axes, periodic wrap on angular axes).
inline GridFunction axis_derivative(const GridFunction& u, size_t axis, int order) {
  const Axis& ax = u.axes[axis];
  const int n = int(ax.nodes.size());
  const int half = order / 2;
  if (n < order + 1) throw std::invalid_argument("b_derivative: grid too coarse for stencil order");
  GridFunction out = u;
  const size_t str = u.stride(axis);
  const size_t nslice = u.size() / n;
  const double h = ax.spacing();

  // stencil weights per output node
  std::vector<std::vector<double>> W(n);
  std::vector<std::vector<int>> I(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> xs(order + 1);
    std::vector<int> is(order + 1);
    if (ax.kind == AxisKind::Angular) {
      for (int k = 0; k <= order; ++k) {
        is[k] = ((i + k - half) % n + n) % n;
        xs[k] = (k - half) * h;
      }
      W[i] = fornberg(0.0, xs, 1);
    } else {
      int lo = std::clamp(i - half, 0, n - order - 1);
      for (int k = 0; k <= order; ++k) {
        is[k] = lo + k;
        xs[k] = ax.nodes[lo + k];
      }
      W[i] = fornberg(ax.nodes[i], xs, 1);
    }
    I[i] = is;
  }

  for (size_t s = 0; s < nslice; ++s) {
    // base linear index of this slice with axis-index 0
    size_t outer = s / str, inner = s % str;
    const size_t base = outer * str * n + inner;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = 0; k <= int(W[i].size()) - 1; ++k) acc += W[i][k] * u.values[base + size_t(I[i][k]) * str];
      out.values[base + size_t(i) * str] = acc;
    }
  }
  if (ax.kind == AxisKind::Boundary) {
    // t d/dt = -(1/log 2) d/dj
    for (auto& v : out.values) v *= -1.0 / std::log(2.0);
  }
  return out;
}

}  // namespace detail

/// Apply a composition of b-vector-field generators: t d/dt on boundary
/// axes, d/dtheta on angular axes.  `word` lists axis indices, applied left
/// to right.
inline GridFunction b_derivative(const GridFunction& u, const std::vector<size_t>& word,
                                 int order = 6, size_t max_order = 3) {
  if (word.size() > max_order) throw std::invalid_argument("b_derivative: word exceeds max order");
  GridFunction out = u;
  for (size_t a : word) {
    if (a >= u.axes.size()) throw std::invalid_argument("b_derivative: axis out of range");
    out = detail::axis_derivative(out, a, order);
  }
  return out;
}

/// Test operator T(R,k) = R (R-1) ... (R-k) with R = t d/dt on the given
/// boundary axis; annihilates polynomials t^m, m <= k.
inline GridFunction test_operator(const GridFunction& u, int k, size_t axis = 0, int order = 8) {
  if (u.axes[axis].kind != AxisKind::Boundary)
    throw std::invalid_argument("test_operator: axis must be a boundary axis");
  GridFunction out = u;
  for (int m = 0; m <= k; ++m) {
    GridFunction Ru = detail::axis_derivative(out, axis, order);
    for (size_t i = 0; i < out.size(); ++i) Ru.values[i] -= double(m) * out.values[i];
    out = std::move(Ru);
  }
  return out;
}

// ---------------------------------------------------------------------------
// decay verification

struct FaceReport {
  std::string hypersurface;
  std::string word;                 // e.g. "1" or "0,1,1"
  double fitted_power = 0.0;
  double fitted_log_order = 0.0;
  double r2 = 0.0;
  std::vector<double> levels;       // j values used
  std::vector<double> sup;          // levelwise sup norms
  bool pass = false;
  std::string note;
};

struct DecayReport {
  std::vector<FaceReport> rows;
  int derivative_orders_checked = 0;
  int log_rapid_orders_checked = 0;  // the certificate is finite: m <= m_max
  bool verdict = false;
};

struct DecayScanOptions {
  int max_order = 3;       // derivative words up to this length
  int fd_order = 6;
  double power_tol = 0.05;
  double r2_min = 0.999;
  int log_rapid_m_max = 6;
  int monotone_window = 8;  // spec-rescaled sups must decay over the last N levels
};

namespace detail {

inline std::vector<std::vector<size_t>> words_up_to(size_t naxes, int max_order) {
  std::vector<std::vector<size_t>> out{{}};
  std::vector<std::vector<size_t>> frontier{{}};
  for (int len = 1; len <= max_order; ++len) {
    std::vector<std::vector<size_t>> next;
    for (auto& w : frontier)
      for (size_t a = 0; a < naxes; ++a) {
        auto w2 = w;
        w2.push_back(a);
        next.push_back(w2);
        out.push_back(w2);
      }
    frontier = std::move(next);
  }
  return out;
}

inline std::string word_name(const std::vector<size_t>& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(w[i]);
  }
  return s.empty() ? "id" : s;
}

/// levelwise sup |u| over all non-boundary-axis directions for one boundary axis
inline void level_sups(const GridFunction& u, size_t axis, std::vector<double>& js,
                       std::vector<double>& sups) {
  const Axis& ax = u.axes[axis];
  const int n = int(ax.nodes.size());
  const size_t str = u.stride(axis);
  const size_t nslice = u.size() / n;
  js = ax.nodes;
  sups.assign(n, 0.0);
  for (size_t s = 0; s < nslice; ++s) {
    size_t outer = s / str, inner = s % str;
    const size_t base = outer * str * n + inner;
    for (int i = 0; i < n; ++i)
      sups[i] = std::max(sups[i], std::abs(u.values[base + size_t(i) * str]));
  }
}

}  // namespace detail

/// Certify membership of u in the weighted conormal space given by `spec` at
/// grid resolution: for every derivative word up to max_order, fit levelwise
/// sup norms against j on each boundary axis and compare with the spec.
/// LOG_RAPID is verified for each m <= m_max as decay of the
/// (ilog)^{-m}-rescaled sups; this is a finite certificate by construction.
inline DecayReport decay_scan(const GridFunction& u, const WeightSpec& spec, int max_order = 3,
                              DecayScanOptions opt = {}) {
  opt.max_order = max_order;
  DecayReport rep;
  rep.derivative_orders_checked = opt.max_order;
  rep.log_rapid_orders_checked = opt.log_rapid_m_max;
  rep.verdict = true;

  const auto words = detail::words_up_to(u.axes.size(), opt.max_order);

  // reference level sups of |u| per boundary axis, for relative zero tests
  std::map<size_t, std::vector<double>> base_sup;
  for (size_t a = 0; a < u.axes.size(); ++a)
    if (u.axes[a].kind == AxisKind::Boundary) {
      std::vector<double> js, sups;
      detail::level_sups(u, a, js, sups);
      base_sup[a] = sups;
    }

  for (const auto& w : words) {
    GridFunction du = w.empty() ? u : b_derivative(u, w, opt.fd_order, opt.max_order);
    // one-sided edge stencils contaminate inward by half a stencil per
    // application; trim accordingly
    const int margin = (opt.fd_order / 2) * int(w.size()) + 1;
    for (size_t a = 0; a < u.axes.size(); ++a) {
      if (u.axes[a].kind != AxisKind::Boundary) continue;
      auto it = spec.faces.find(u.axes[a].label);
      if (it == spec.faces.end()) continue;
      const HypersurfaceWeight& hw = it->second;

      FaceReport row;
      row.hypersurface = u.axes[a].label;
      row.word = detail::word_name(w);
      std::vector<double> js, sups;
      detail::level_sups(du, a, js, sups);
      if (int(js.size()) < 2 * margin + 6)
        throw std::invalid_argument("decay_scan: too few levels for the derivative margin");
      const int cut = w.empty() ? 0 : margin;
      std::vector<double> js2(js.begin() + cut, js.end() - (cut ? cut : 0));
      std::vector<double> sp2(sups.begin() + cut, sups.end() - (cut ? cut : 0));
      row.levels = js2;
      row.sup = sp2;

      // derivative words that annihilate u leave only roundoff, which is
      // levelwise proportional to u itself; detect and pass such rows
      bool zero = true;
      for (size_t i = 0; i < sp2.size(); ++i) {
        const double ref = base_sup[a][i + cut];
        if (sp2[i] > 1e-10 * ref + 1e-300) zero = false;
      }
      if (zero) {
        row.pass = true;
        row.note = "numerically zero relative to u";
        row.fitted_power = std::numeric_limits<double>::infinity();
        row.r2 = 1.0;
        rep.rows.push_back(row);
        continue;
      }

      auto fit = fit_power_log(js2, sp2);
      row.fitted_power = fit.power;
      row.fitted_log_order = fit.log_order;
      row.r2 = fit.r2;

      // decay that is faster than any power (e.g. Gaussian in log t) breaks
      // the power-law fit; the windowed secant slope still certifies the
      // spec as a lower bound on the decay rate
      const int nw0 = std::min<int>(opt.monotone_window, int(sp2.size()) - 1);
      double secant_min = std::numeric_limits<double>::infinity();
      for (int i = int(sp2.size()) - nw0; i < int(sp2.size()); ++i)
        secant_min = std::min(secant_min, (std::log2(sp2[i - 1]) - std::log2(sp2[i])) /
                                              (js2[i] - js2[i - 1]));
      const bool super_rapid = secant_min >= hw.power + 0.5;

      bool ok = true;
      std::string note;
      if (fit.r2 <= opt.r2_min && !super_rapid) {
        ok = false;
        note = "inconclusive: low R^2";
      }
      if (ok && !super_rapid && fit.power < hw.power - opt.power_tol) {
        ok = false;
        note = "fitted power below spec";
      }
      // monotone guard on spec-power-rescaled sups over the last window
      // (guards against preasymptotic false positives); log factors may
      // still grow, so allow the per-step log-growth envelope
      if (ok) {
        const int nw = std::min<int>(opt.monotone_window, int(sp2.size()) - 1);
        for (int i = int(sp2.size()) - nw; i < int(sp2.size()); ++i) {
          const double prev = sp2[i - 1] * std::pow(2.0, hw.power * js2[i - 1]);
          const double cur = sp2[i] * std::pow(2.0, hw.power * js2[i]);
          const double log_env =
              std::pow(js2[i] / js2[i - 1], std::max(0.0, -hw.log_order) + 1e-3);
          if (cur > prev * log_env * (1.0 + 1e-5)) {
            ok = false;
            note = "spec-rescaled sup norms not decaying over the last levels";
            break;
          }
        }
      }
      if (ok && hw.log_rapid) {
        // every (ilog)^{-m} rescaling must still decay asymptotically: the
        // fitted rate of sup * 2^{p j} * (j ln 2)^m must point down (either
        // genuine extra power, or nonnegative residual log order); decay
        // faster than any power passes outright
        for (int m = 1; m <= opt.log_rapid_m_max && ok && !super_rapid; ++m) {
          std::vector<double> resc(sp2.size());
          for (size_t i = 0; i < sp2.size(); ++i)
            resc[i] = sp2[i] * std::pow(2.0, hw.power * js2[i]) *
                      std::pow(js2[i] * std::log(2.0), double(m));
          const auto fm = fit_power_log(js2, resc);
          const bool decays = fm.power > 0.02 || (fm.power > -0.02 && fm.log_order > -0.1);
          if (!decays) {
            ok = false;
            note = "log-rapid test failed at m = " + std::to_string(m);
          }
        }
      } else if (ok && !hw.log_rapid && hw.log_order != 0.0) {
        if (fit.power <= hw.power + opt.power_tol && fit.log_order < hw.log_order - 0.75) {
          ok = false;
          note = "fitted log order below spec";
        }
      }
      row.pass = ok;
      row.note = note;
      rep.verdict = rep.verdict && ok;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace sl2c
