#pragma once

// Blown-up spaces and lifted maps: GL_+[2], G[2] (corner blow-up followed by
// the boundary fiber-diagonal blow-up), G[1;P] (two-level resolution at
// q_1(P)), G[1;N+-], with coordinate charts, canonical boundary defining
// functions, lifted measures and the lifted twisted product.
//
// Blow-ups are realized as chart atlases with explicit transition maps; the
// canonical defining functions below are global closed forms, e.g. on
// G[1;P]:
//   rho0 = t/(t+s^2), rho1 = (t+|s|)^2/(t+s^2), rho2 = (t+s^2)/(t+|s|),
// which satisfy rho0 rho1 rho2^2 = t identically.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sl2c/charts.hpp"
#include "sl2c/fit.hpp"

namespace sl2c {

struct BlowupChart {
  std::string space;
  std::string chart;
  std::vector<double> coords;
  std::map<std::string, double> bdf;
};

/// Pull-back exponents mu(H, H') of a b-map: rows = domain hypersurfaces,
/// columns = codomain hypersurfaces.
struct ExponentMatrix {
  std::vector<std::string> domain;
  std::vector<std::string> codomain;
  std::vector<std::vector<double>> mu;  // [row][col]

  /// b-normality: at most one nonzero entry per domain row.
  bool b_normal() const {
    for (const auto& row : mu) {
      int nz = 0;
      for (double v : row) nz += (v != 0.0);
      if (nz > 1) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// GL_+[2] = [GL_+[1]^2; {(0,0)}, {(inf,inf)}]

/// Chart and defining functions for a pair of positive reals on the
/// double-corner blow-up.  Projective chart selection: all coordinates in
/// [0,2], lexicographic tie break.
inline BlowupChart glplus2_lift(double sigma, double tau) {
  if (!(sigma > 0.0 && tau > 0.0)) throw std::invalid_argument("glplus2_lift: need positive inputs");
  BlowupChart p;
  p.space = "GLplus2";
  const double s00 = sigma + tau;               // front face at (0,0)
  const double s11 = 1.0 / sigma + 1.0 / tau;   // front face at (inf,inf)
  p.bdf = {{"sig0", sigma / s00}, {"tau0", tau / s00}, {"ff00", s00 / (1.0 + s00)},
           {"sig_inf", (1.0 / sigma) / s11},    {"tau_inf", (1.0 / tau) / s11},
           {"ff11", s11 / (1.0 + s11)}};
  if (s00 <= 1.0) {  // near the (0,0) corner: projective charts
    if (sigma / tau <= 2.0) {
      p.chart = "c00_sig_over_tau";
      p.coords = {sigma / tau, tau};
    } else {
      p.chart = "c00_tau_over_sig";
      p.coords = {tau / sigma, sigma};
    }
  } else if (s11 <= 1.0) {
    if (tau / sigma <= 2.0) {  // 1/sigma over 1/tau
      p.chart = "c11_tau_over_sig";
      p.coords = {tau / sigma, 1.0 / tau};
    } else {
      p.chart = "c11_sig_over_tau";
      p.coords = {sigma / tau, 1.0 / sigma};
    }
  } else {
    p.chart = "product";
    p.coords = {glplus_compactify(sigma), glplus_compactify(tau)};
  }
  return p;
}

// ---------------------------------------------------------------------------
// G[2]: K^2 x At[2,0]

template <class F>
struct G2Point {
  Mat2<F> g, h;       // the pair itself (used to evaluate lifted maps)
  BlowupChart chart;  // chart data and canonical bdfs {tau1, tau2, s, x}
};

namespace detail {

/// axis separation defining the boundary fiber diagonal: REAL is the signed
/// sine of the angle difference, COMPLEX the chordal distance
/// sqrt(1 - |<xi1, xi2>|^2), both vanishing simply on the diagonal.
template <class F>
double fiber_diag_distance(const Mat2<F>& g, const Mat2<F>& h) {
  const Mat2<F> bg = polar_decompose<F>(g).a;
  const Mat2<F> bh = polar_decompose<F>(h).a;
  if constexpr (F::is_complex) {
    const auto sg = eig_split<ComplexField>(Mat2<ComplexField>(bg / std::sqrt(gram_lambda_max<F>(g))));
    const auto sh = eig_split<ComplexField>(Mat2<ComplexField>(bh / std::sqrt(gram_lambda_max<F>(h))));
    const double c = std::abs(sg.axis.dot(sh.axis));
    return std::sqrt(std::max(1.0 - c * c, 0.0));
  } else {
    const double th1 = polar_axis_angle(bg), th2 = polar_axis_angle(bh);
    return std::sin(th1 - th2);
  }
}

}  // namespace detail

/// Embed a pair into G[2]: corner blow-up t_i = tau_i s, then the polar
/// blow-up x^2 = R^2 + s^2 at the boundary fiber diagonal.  The canonical
/// defining functions are
///   s_pre = t1 + t2, tau_i = t_i/s_pre, x = hypot(R, s_pre), s = s_pre/x.
template <class F>
G2Point<F> g2_lift(const Mat2<F>& g, const Mat2<F>& h) {
  G2Point<F> out;
  out.g = g;
  out.h = h;
  const double t1 = boundary_param<F>(g), t2 = boundary_param<F>(h);
  const double spre = t1 + t2;
  const double R = detail::fiber_diag_distance<F>(g, h);
  const double x = std::hypot(R, spre);
  BlowupChart& p = out.chart;
  p.space = F::is_complex ? "G2c" : "G2";
  p.bdf = {{"tau1", t1 / spre}, {"tau2", t2 / spre}, {"s", spre / x}, {"x", x}};

  // chart selection (REAL coordinates listed; the complex fiber-diagonal
  // atlas is exercised along one-parameter families only)
  const G1Point<F> pg = g1_embed<F>(g);
  const G1Point<F> ph = g1_embed<F>(h);
  if (t1 >= kCollarHi || t2 >= kCollarHi) {
    p.chart = "product";
    p.coords = {t1, t2};
    return out;
  }
  const bool c1 = t1 / t2 <= 2.0;  // lexicographic tie break prefers c1
  const double u = c1 ? t1 / t2 : t2 / t1;
  const double v = c1 ? t2 : t1;
  if (std::abs(R) > std::max(2.0 * v, 0.1)) {
    // axes well separated: the fiber-diagonal blow-up is invisible
    p.chart = c1 ? "corner_c1" : "corner_c2";
    p.coords = {u, v};
  } else if (std::abs(R) <= 2.0 * v) {
    p.chart = c1 ? "diag_mid_c1" : "diag_mid_c2";
    p.coords = {u, R / v, v};
  } else {
    p.chart = c1 ? "diag_corner_c1" : "diag_corner_c2";
    p.coords = {u, v / std::abs(R), R};
  }
  return out;
}

/// The lifted twisted product chi(g,h) = g h^{-1}, as a G[1] chart point.
template <class F>
G1Point<F> chi_lifted(const G2Point<F>& p) {
  return g1_embed<F>(Mat2<F>(p.g * invert<F>(p.h)));
}

/// Declared pull-back exponents on (tau1, tau2, s, x) for the three lifted
/// maps out of G[2].  chi carries (1,1,2,0) (the product of collar
/// parameters over the squared fiber-diagonal distance); the left and right
/// stretched projections carry (1,0,1,1) and (0,1,1,1).
inline ExponentMatrix g2_exponents(const std::string& map_name) {
  ExponentMatrix m;
  m.domain = {"tau1", "tau2", "s", "x"};
  m.codomain = {"rho"};
  if (map_name == "chi")
    m.mu = {{1}, {1}, {2}, {0}};
  else if (map_name == "piL")
    m.mu = {{1}, {0}, {1}, {1}};
  else if (map_name == "piR")
    m.mu = {{0}, {1}, {1}, {1}};
  else
    throw std::invalid_argument("g2_exponents: unknown map");
  return m;
}

// ---------------------------------------------------------------------------
// G[2] lifted measure

namespace detail {

/// REAL blow-up chart maps used by the measure Jacobians: chart coords ->
/// product collar coords (phi1, th1, t1, phi2, th2, t2).
struct G2RealChartMap {
  std::string chart;
  // c layouts:
  //   corner_c1:      (phi1, th1, u, phi2, th2, v)        t1 = u v, t2 = v
  //   corner_c2:      (phi1, th1, v, phi2, th2, u)        t1 = v,   t2 = u v
  //   diag_mid_c1:    (phi1, phi2, thbar, u, m, v)        th1 = thbar + asin(m v)
  //   diag_corner_c1: (phi1, phi2, thbar, u, mp, R)       v = mp |R|
  std::array<double, 6> operator()(const std::array<double, 6>& c) const {
    if (chart == "corner_c1") return {c[0], c[1], c[2] * c[5], c[3], c[4], c[5]};
    if (chart == "corner_c2") return {c[0], c[1], c[2], c[3], c[4], c[5] * c[2]};
    if (chart == "diag_mid_c1") {
      const double th1 = c[2] + std::asin(c[4] * c[5]);
      return {c[0], th1, c[3] * c[5], c[1], c[2], c[5]};
    }
    if (chart == "diag_corner_c1") {
      const double v = c[4] * std::abs(c[5]);
      const double th1 = c[2] + std::asin(c[5]);
      return {c[0], th1, c[3] * v, c[1], c[2], v};
    }
    throw std::invalid_argument("G2RealChartMap: unknown chart " + chart);
  }
  /// indices of boundary-type coordinates (divide Lebesgue by their product
  /// to land in b-Lebesgue)
  std::vector<int> boundary_coords() const {
    if (chart == "corner_c1" || chart == "corner_c2") return {2, 5};
    if (chart == "diag_mid_c1") return {3, 5};
    if (chart == "diag_corner_c1") return {3, 4, 5};
    throw std::invalid_argument("G2RealChartMap: unknown chart " + chart);
  }
};

}  // namespace detail

/// Density of dg dh with respect to the b-Lebesgue measure of a REAL
/// blow-up chart at the given chart coordinates: the product of the two
/// collar Haar densities, the chart Jacobian (by finite differences), and
/// the product of the boundary coordinates.
inline double g2_measure_real(const std::string& chart, const std::array<double, 6>& c) {
  detail::G2RealChartMap map{chart};
  Eigen::Matrix<double, 6, 6> J;
  for (int i = 0; i < 6; ++i) {
    std::array<double, 6> cp = c, cm = c;
    const double h = 1e-6 * std::max(std::abs(c[i]), 1e-3);
    cp[i] += h;
    cm[i] -= h;
    const auto fp = map(cp), fm = map(cm);
    for (int k = 0; k < 6; ++k) J(k, i) = (fp[k] - fm[k]) / (2.0 * h);
  }
  const auto pc = map(c);
  double m = haar_collar_density_real(pc[2]) * haar_collar_density_real(pc[5]) *
             std::abs(J.determinant());
  for (int i : map.boundary_coords()) m *= std::abs(c[i]);
  return m;
}

/// COMPLEX corner-chart measure (the K and sphere coordinates enter as
/// identity blocks, so the Jacobian reduces to d(t1,t2)/d(u,v) = v).
inline double g2_measure_cplx_corner(double u, double v, double sphere_u, double sphere_v) {
  return haar_collar_density_cplx(u * v, sphere_u, sphere_v) *
         haar_collar_density_cplx(v, sphere_u, sphere_v) * v * (u * v);
}

/// Declared measure exponents on (tau1, tau2, s, x): dg dh is
/// tau1^{-2k} tau2^{-2k} s^{-4k} x^{-2k} times a b-density.
inline std::array<double, 4> g2_measure_exponents(double kappa) {
  return {-2.0 * kappa, -2.0 * kappa, -4.0 * kappa, -2.0 * kappa};
}

// ---------------------------------------------------------------------------
// G[1;P]: resolution of the right parabolic action at q_1(P_+) = q(e2)

/// Collar coordinates (t, s) near q(e2): the trace-normalized polar factor b
/// is beta(t,s)/tr with beta = [[t+s^2, s],[s, 1]]; in terms of the polar
/// factor a these are s = a01/a11 and t = 1/a11^2 (det a = 1).
struct PCollar {
  double t = 0.0;
  double s = 0.0;
  bool valid = false;  // false outside the resolved collar
};

inline PCollar p_collar_coords(const Mat2d& g) {
  const Mat2d a = polar_decompose<RealField>(g).a;
  PCollar c;
  const double b11 = a(1, 1) / a.trace();
  if (b11 < 0.5) return c;  // outside the collar; fall back to G[1] charts
  c.s = a(0, 1) / a(1, 1);
  c.t = 1.0 / (a(1, 1) * a(1, 1));
  c.valid = true;
  return c;
}

/// Canonical defining functions of the three boundary hypersurfaces of
/// At[1;P]: face 0 = lift of the old boundary, face 1 = first front face
/// (blow-up of q(e2)), face 2 = second front face (blow-up of the corner of
/// the first).  Satisfy rho0 rho1 rho2^2 = t exactly.
inline std::array<double, 3> g1P_bdfs(double t, double s) {
  const double as = std::abs(s);
  return {t / (t + s * s), (t + as) * (t + as) / (t + s * s), (t + s * s) / (t + as)};
}

inline BlowupChart g1P_lift(const Mat2d& g) {
  BlowupChart p;
  p.space = "G1P";
  const PCollar c = p_collar_coords(g);
  if (!c.valid) {
    auto g1 = g1_embed<RealField>(g);
    p.chart = "g1_fallback:" + g1.at.chart;
    p.coords = g1.at.coords;
    p.bdf = {{"rho0", g1.at.bdf.at("t")}, {"rho1", 1.0}, {"rho2", 1.0}};
    return p;
  }
  const auto r = g1P_bdfs(c.t, c.s);
  p.bdf = {{"rho0", r[0]}, {"rho1", r[1]}, {"rho2", r[2]}};
  const double t = c.t, s = c.s, as = std::abs(s);
  const char sign = s >= 0 ? 'p' : 'm';
  if (as < 2.0 * t && !(t < 2.0 * as)) {
    p.chart = "ff1_interior";  // (s/t, t)
    p.coords = {s / t, t};
  } else if (t < 2.0 * s * s && !(2.0 * t > s * s)) {
    p.chart = std::string("eta_") + sign;  // (eta = t/s^2, |s|)
    p.coords = {t / (s * s), as};
  } else if (2.0 * t > s * s && t < 2.0 * as) {
    p.chart = std::string("sigma_") + sign;  // (sigma = s^2/t, t/|s|)
    p.coords = {s * s / t, t / as};
  } else {
    p.chart = "ff1_end";  // (t/|s|, |s|) transitional region
    p.coords = {t / as, as};
  }
  return p;
}

/// The quotient fibration to (G/N_+)[1] = K x D[1]: Iwasawa-project and drop
/// the unipotent factor.  With the Iwasawa parameter d, the D[1] point is
/// d1_embed(1/d), so rho1 (the q(e2) end) equals d/(1+d).
inline std::pair<Mat2d, ChartPoint> piP(const Mat2d& g) {
  const auto w = iwasawa<RealField>(g, ParabolicSign::Plus);
  return {w.k, d1_embed(1.0 / w.d)};
}

/// Declared pull-back exponents of piP on (rho0~, rho1~, rho2~): the face-2
/// front face is the fixed face of the fibration (it maps onto all of D[1];
/// the N-orbits hit its interior, Eq. for eta -> 1/tau), so neither rho0 nor
/// rho1 picks up a rho2~ factor.
inline ExponentMatrix piP_exponents() {
  ExponentMatrix m;
  m.domain = {"rho0", "rho1", "rho2"};
  m.codomain = {"rho0", "rho1"};
  m.mu = {{1, 0}, {0, 1}, {0, 0}};
  return m;
}

/// beta: G[1;P] -> G[1] pull-back column on (rho0~, rho1~, rho2~): (1,1,2).
inline ExponentMatrix beta_exponents() {
  ExponentMatrix m;
  m.domain = {"rho0", "rho1", "rho2"};
  m.codomain = {"rho"};
  m.mu = {{1}, {1}, {2}};
  return m;
}

// ---------------------------------------------------------------------------
// generating vector field of the unipotent flow

/// V(N) in the (t, s, theta) collar coordinates at q(e2):
///   (s^2+t+1)^{-1} ( 2st(2s^2+2t+1) dt + (s^4+s^2-t^2) ds - (s^2+t) dtheta ).
/// Conventions: the flow is x -> beta(t,s) [[1,-x],[0,1]], the K angle uses
/// k(theta) = [[c, s],[-s, c]].
inline Eigen::Vector3d vfield_N(double t, double s) {
  const double den = s * s + t + 1.0;
  return Eigen::Vector3d(2.0 * s * t * (2.0 * s * s + 2.0 * t + 1.0),
                         s * s * s * s + s * s - t * t, -(s * s + t)) /
         den;
}

/// (t', s', theta') coordinates of beta(t,s) [[1,-x],[0,1]] after polar
/// decomposition; the finite-difference oracle for vfield_N.
inline Eigen::Vector3d unipotent_flow_coords(double t, double s, double x) {
  Mat2d beta;
  beta << t + s * s, s, s, 1.0;
  Mat2d M = beta * unipotent_upper(-x);
  // positive square root of M^T M for det M = t > 0:
  // A = (M^T M + det I)/sqrt(tr + 2 det)
  const Mat2d S = M.transpose() * M;
  const double det = t;
  const Mat2d A = (S + det * Mat2d::Identity()) / std::sqrt(S.trace() + 2.0 * det);
  const Mat2d K = M * A.inverse();
  const double s2 = A(0, 1) / A(1, 1);
  const double t2 = det / (A(1, 1) * A(1, 1));
  const double th = std::atan2(K(0, 1), K(0, 0));
  return {t2, s2, th};
}

/// 6th-order finite-difference derivative of the flow at x = 0.
inline Eigen::Vector3d unipotent_flow_fd(double t, double s, double h = 1e-2) {
  static const double w[7] = {-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0};
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int i = 0; i < 7; ++i) acc += w[i] * unipotent_flow_coords(t, s, (i - 3) * h);
  return acc / (60.0 * h);
}

// ---------------------------------------------------------------------------
// G[1;N+-]: simultaneous resolution at the antipodal centers q(e2), q(e1)

inline BlowupChart g1Npm_lift(const Mat2d& g) {
  BlowupChart p;
  p.space = "G1Npm";
  p.bdf = {{"rho0", 1.0}, {"rho1p", 1.0}, {"rho2p", 1.0}, {"rho1m", 1.0}, {"rho2m", 1.0}};
  const PCollar cp = p_collar_coords(g);
  // mirrored collar at q(e1): conjugate by the Weyl rotation
  static const Mat2d w = rotation(M_PI / 2.0);
  const PCollar cm = p_collar_coords(Mat2d(w * g * w.transpose()));
  const double tg = boundary_param<RealField>(g);
  p.bdf["rho0"] = tg;  // away from both centers the old bdf is the collar t
  if (cp.valid) {
    const auto r = g1P_bdfs(cp.t, cp.s);
    p.bdf["rho0"] = r[0];
    p.bdf["rho1p"] = r[1];
    p.bdf["rho2p"] = r[2];
    p.chart = "plus:" + g1P_lift(g).chart;
    p.coords = g1P_lift(g).coords;
  }
  if (cm.valid) {
    const auto r = g1P_bdfs(cm.t, cm.s);
    p.bdf["rho0"] = r[0];
    p.bdf["rho1m"] = r[1];
    p.bdf["rho2m"] = r[2];
    if (!cp.valid) {
      p.chart = "minus:" + g1P_lift(Mat2d(w * g * w.transpose())).chart;
      p.coords = g1P_lift(Mat2d(w * g * w.transpose())).coords;
    }
  }
  if (!cp.valid && !cm.valid) {
    auto g1 = g1_embed<RealField>(g);
    p.chart = "g1:" + g1.at.chart;
    p.coords = g1.at.coords;
  }
  return p;
}

}  // namespace sl2c
