#pragma once

// Compactified chart atlases: GL_+[1], At[1] (trace-one positive matrices),
// D[1] (closure of the positive diagonal), G[1] = K x At[1], with boundary
// defining functions and the Haar density in chart coordinates.

#include <map>
#include <string>
#include <vector>

#include "sl2c/matgroup.hpp"

namespace sl2c {

struct ChartPoint {
  std::string space;
  std::string chart;
  std::vector<double> coords;
  std::map<std::string, double> bdf;  // hypersurface label -> defining function value
};

// ---------------------------------------------------------------------------
// GL_+[1]: radial compactification of the multiplicative half line

/// tau -> (2/pi) arctan tau in [0,1].
inline double glplus_compactify(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("glplus_compactify: tau must be positive");
  return 2.0 / M_PI * std::atan(tau);
}

inline ChartPoint glplus1_embed(double tau) {
  ChartPoint p;
  p.space = "GLplus1";
  p.chart = "arctan";
  p.coords = {glplus_compactify(tau)};
  p.bdf = {{"rho0", tau}, {"rho_inf", 1.0 / tau}};  // tau defines the lower end, 1/tau the top
  return p;
}

// ---------------------------------------------------------------------------
// At[1] charts

/// Collar thresholds: the collar chart is used below 0.3, the interior chart
/// above 0.05; both are valid in the overlap (wide, for transition tests).
inline constexpr double kCollarLo = 0.05;
inline constexpr double kCollarHi = 0.3;

/// Bloch vector of a complex projective axis: q(xi) = (Id + n.sigma)/2.
inline Eigen::Vector3d bloch_vector(const Vec2<ComplexField>& xi) {
  const std::complex<double> c = std::conj(xi(0)) * xi(1);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(xi(0)) - std::norm(xi(1))};
}

inline Mat2<ComplexField> projector_from_bloch(const Eigen::Vector3d& n) {
  Mat2<ComplexField> q;
  const std::complex<double> I(0, 1);
  q << 0.5 * (1.0 + n(2)), 0.5 * (n(0) - I * n(1)), 0.5 * (n(0) + I * n(1)), 0.5 * (1.0 - n(2));
  return q;
}

/// Stereographic sphere charts: "+z" projects from the south pole (valid
/// away from n3 = -1), "-z" from the north pole.
inline Eigen::Vector3d sphere_from_chart(bool plus_z, double u, double v) {
  const double r2 = u * u + v * v;
  if (plus_z) return Eigen::Vector3d(2 * u, 2 * v, 1 - r2) / (1 + r2);
  return Eigen::Vector3d(2 * u, -2 * v, -(1 - r2)) / (1 + r2);
}

inline void chart_from_sphere(const Eigen::Vector3d& n, bool& plus_z, double& u, double& v) {
  plus_z = n(2) >= 0.0;
  if (plus_z) {
    u = n(0) / (1.0 + n(2));
    v = n(1) / (1.0 + n(2));
  } else {
    u = n(0) / (1.0 - n(2));
    v = -n(1) / (1.0 - n(2));
  }
}

namespace detail {

template <class F>
double trace1_small_ratio(const Mat2<F>& b) {
  // eigenvalue ratio lam_min/lam_max for Hermitian psd b
  const double T = re(b.trace());
  const double D = re(b.determinant());
  const double disc = std::sqrt(std::max(T * T - 4.0 * D, 0.0));
  const double lmax = 0.5 * (T + disc);
  return std::max(D, 0.0) / (lmax * lmax);
}

template <class F>
void check_trace1_psd(const Mat2<F>& b) {
  if ((b - b.adjoint()).norm() > 1e-10 * std::max(1.0, b.norm()))
    throw std::invalid_argument("at1_embed: matrix is not Hermitian");
  if (std::abs(re(b.trace()) - 1.0) > 1e-10)
    throw std::invalid_argument("at1_embed: trace must be 1");
  if (re(b.determinant()) < -1e-12)
    throw std::invalid_argument("at1_embed: matrix must be positive semidefinite");
}

}  // namespace detail

/// Embed a trace-one positive matrix into the At[1] atlas.  The interior
/// chart stores the independent entries of b; the boundary collar chart
/// stores the axis (angle for REAL, stereographic Bloch coordinates for
/// COMPLEX) and the rescaled small eigenvalue t.
template <class F>
ChartPoint at1_embed(const Mat2<F>& b, const std::string& force_chart = "") {
  detail::check_trace1_psd<F>(b);
  const double t = detail::trace1_small_ratio<F>(b);
  ChartPoint p;
  p.space = F::is_complex ? "At1c" : "At1";
  const bool interior = force_chart.empty() ? (t >= kCollarHi) : (force_chart == "interior");
  if (interior) {
    p.chart = "interior";
    if constexpr (F::is_complex)
      p.coords = {re(b(0, 0)), b(0, 1).real(), b(0, 1).imag()};
    else
      p.coords = {b(0, 0), b(0, 1)};
    p.bdf = {{"t", t}};
    return p;
  }
  // collar: rescale so the large eigenvalue is 1 and split
  const double T = re(b.trace());
  const double D = re(b.determinant());
  const double lmax = 0.5 * (T + std::sqrt(std::max(T * T - 4.0 * D, 0.0)));
  const BoundarySplit<F> s = eig_split<F>(Mat2<F>(b / typename F::Scalar(lmax)));
  if constexpr (F::is_complex) {
    bool plus_z;
    double u, v;
    chart_from_sphere(bloch_vector(s.axis), plus_z, u, v);
    p.chart = plus_z ? "collar+z" : "collar-z";
    p.coords = {u, v, s.small_eig};
  } else {
    p.chart = "collar";
    p.coords = {s.theta, s.small_eig};
  }
  p.bdf = {{"t", s.small_eig}};
  return p;
}

/// Reconstruct the trace-one matrix from an At[1] chart point.
template <class F>
Mat2<F> at1_extract(const ChartPoint& p) {
  using S = typename F::Scalar;
  Mat2<F> b;
  if (p.chart == "interior") {
    if constexpr (F::is_complex) {
      const std::complex<double> off(p.coords[1], p.coords[2]);
      b << S(p.coords[0]), S(off), S(std::conj(off)), S(1.0 - p.coords[0]);
    } else {
      b << S(p.coords[0]), S(p.coords[1]), S(p.coords[1]), S(1.0 - p.coords[0]);
    }
    return b;
  }
  double t;
  Mat2<F> q;
  if constexpr (F::is_complex) {
    t = p.coords[2];
    q = projector_from_bloch(sphere_from_chart(p.chart == "collar+z", p.coords[0], p.coords[1]));
  } else {
    t = p.coords[1];
    q = axis_projector(p.coords[0]).template cast<S>();
  }
  b = (q + S(t) * (Mat2<F>::Identity() - q)) / S(1.0 + t);
  return b;
}

// ---------------------------------------------------------------------------
// G[1] = K x At[1]

template <class F>
struct G1Point {
  Mat2<F> k;
  ChartPoint at;
};

/// Polar-decompose, trace-normalize the positive factor, embed into At[1].
template <class F>
G1Point<F> g1_embed(const Mat2<F>& g, const std::string& force_chart = "") {
  PolarParts<F> p = polar_decompose<F>(g);
  const Mat2<F> b = p.a / p.a.trace();
  return G1Point<F>{p.k, at1_embed<F>(b, force_chart)};
}

// ---------------------------------------------------------------------------
// D[1]: closure of the positive diagonal subgroup inside At[1]

/// Embed tau > 0 as the trace-normalized diag(tau^{-1/2}, tau^{1/2}).
/// tau -> infinity approaches q(e2) = q_1(P_+), where rho1 vanishes;
/// tau -> 0 approaches q(e1) = q_0(P_+), where rho0 vanishes.
inline ChartPoint d1_embed(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("d1_embed: tau must be positive");
  ChartPoint p;
  p.space = "D1";
  p.chart = "arctan";
  p.coords = {glplus_compactify(tau)};
  p.bdf = {{"rho0", tau / (1.0 + tau)}, {"rho1", 1.0 / (1.0 + tau)}};
  return p;
}

/// delta on D[1]: delta(d1_embed(tau)) = 1/tau = rho1/rho0 with the
/// canonical defining functions above.
inline double d1_delta(double tau) { return 1.0 / tau; }

// ---------------------------------------------------------------------------
// Haar density

namespace detail {

inline Mat2d g1_real_from_coords(const double* c, bool interior) {
  // coords: (phi, b11, b12) interior; (phi, theta, t) collar.  det b is
  // evaluated in closed form: the entry-wise determinant cancels
  // catastrophically at small t.
  Mat2d b;
  double det;
  if (interior) {
    b << c[1], c[2], c[2], 1.0 - c[1];
    det = c[1] * (1.0 - c[1]) - c[2] * c[2];
  } else {
    const double t = c[2];
    const Mat2d q = axis_projector(c[1]);
    b = (q + t * (Mat2d::Identity() - q)) / (1.0 + t);
    det = t / ((1.0 + t) * (1.0 + t));
  }
  const Mat2d a = b / std::sqrt(det);
  return rotation(c[0]) * a;
}

inline Mat2<ComplexField> su2_exp(double x1, double x2, double x3) {
  // exp(i x.sigma), closed form
  const double r = std::sqrt(x1 * x1 + x2 * x2 + x3 * x3);
  const double cr = std::cos(r), sr = r > 1e-30 ? std::sin(r) / r : 1.0;
  const std::complex<double> I(0, 1);
  Mat2<ComplexField> k;
  k << cr + I * sr * x3, I * sr * x1 + sr * x2, I * sr * x1 - sr * x2, cr - I * sr * x3;
  return k;
}

inline Mat2<ComplexField> g1_cplx_from_coords(const double* c, bool interior, bool plus_z) {
  // coords: (x1,x2,x3; b11, Re b01, Im b01) interior; (x1,x2,x3; u, v, t) collar
  Mat2<ComplexField> b;
  double det;
  if (interior) {
    const std::complex<double> off(c[4], c[5]);
    b << c[3], off, std::conj(off), 1.0 - c[3];
    det = c[3] * (1.0 - c[3]) - std::norm(off);
  } else {
    const double t = c[5];
    const Mat2<ComplexField> q = projector_from_bloch(sphere_from_chart(plus_z, c[3], c[4]));
    b = (q + std::complex<double>(t) * (Mat2<ComplexField>::Identity() - q)) / (1.0 + t);
    det = t / ((1.0 + t) * (1.0 + t));
  }
  const Mat2<ComplexField> a = b / std::sqrt(det);
  return su2_exp(c[0], c[1], c[2]) * a;
}

template <int N, class GFn>
double detJ_left_frame(const GFn& gmap, const double* c0, const double* h) {
  // columns g^{-1} dg/dc_i flattened in a fixed traceless basis
  Eigen::Matrix<double, N, N> J;
  auto g0 = gmap(c0);
  auto gi = invert<std::conditional_t<N == 3, RealField, ComplexField>>(g0);
  double cp[N], cm[N];
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < N; ++k) cp[k] = cm[k] = c0[k];
    cp[i] += h[i];
    cm[i] -= h[i];
    auto M = (gi * ((gmap(cp) - gmap(cm)) / (2.0 * h[i]))).eval();
    if constexpr (N == 3) {
      J(0, i) = re(M(0, 0));
      J(1, i) = re(M(0, 1));
      J(2, i) = re(M(1, 0));
    } else {
      J(0, i) = std::real(M(0, 0));
      J(1, i) = std::imag(M(0, 0));
      J(2, i) = std::real(M(0, 1));
      J(3, i) = std::imag(M(0, 1));
      J(4, i) = std::real(M(1, 0));
      J(5, i) = std::imag(M(1, 0));
    }
  }
  return std::abs(J.determinant());
}

// |det J| at (Id, center of At[1]) in the interior chart; the REAL value is
// exact (cofactor expansion of the 3x3 frame matrix at the center).
inline double haar_norm_const_real() { return 8.0; }

inline double haar_norm_const_cplx() {
  static const double v = [] {
    const double c0[6] = {0, 0, 0, 0.5, 0, 0};
    const double h[6] = {1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6};
    return detJ_left_frame<6>([](const double* c) { return g1_cplx_from_coords(c, true, true); }, c0,
                              h);
  }();
  return v;
}

}  // namespace detail

/// Haar density at a G[1] chart point with respect to the chart's Lebesgue
/// measure: |det J| where J expresses the chart coordinate frame in a fixed
/// basis of left-invariant vector fields, normalized so the interior-chart
/// density at (Id, center) is 1.  Throws on boundary points, where the
/// density diverges like t^{-1-2 kappa}; use the collar asymptotic form.
template <class F>
double haar_density(const ChartPoint& p, const std::vector<double>& k_coords) {
  if (p.bdf.at("t") <= 0.0)
    throw std::domain_error(
        "haar_density: boundary point; density diverges like t^(-1-2kappa), use the asymptotic form");
  const bool interior = p.chart == "interior";
  if constexpr (F::is_complex) {
    if (k_coords.size() != 3) throw std::invalid_argument("haar_density: need 3 K coordinates");
    const bool plus_z = p.chart != "collar-z";
    double c0[6] = {k_coords[0], k_coords[1], k_coords[2], p.coords[0], p.coords[1], p.coords[2]};
    double h[6] = {1e-6, 1e-6, 1e-6, 1e-6, 1e-6, interior ? 1e-6 : 1e-6 * p.coords[2]};
    auto gmap = [interior, plus_z](const double* c) {
      return detail::g1_cplx_from_coords(c, interior, plus_z);
    };
    return detail::detJ_left_frame<6>(gmap, c0, h) / detail::haar_norm_const_cplx();
  } else {
    if (k_coords.size() != 1) throw std::invalid_argument("haar_density: need 1 K coordinate");
    double c0[3] = {k_coords[0], p.coords[0], p.coords[1]};
    double h[3] = {1e-6, 1e-6, interior ? 1e-6 : 1e-6 * p.coords[1]};
    auto gmap = [interior](const double* c) { return detail::g1_real_from_coords(c, interior); };
    return detail::detJ_left_frame<3>(gmap, c0, h) / detail::haar_norm_const_real();
  }
}

/// Closed-form normalized collar densities over the global boundary-adapted
/// parameterizations (cross-checked against haar_density in the tests):
/// REAL, (phi, theta, t)-coordinates: dg = (1-t^2)/(16 t^2) dphi dtheta dt.
inline double haar_collar_density_real(double t) { return (1.0 - t * t) / (16.0 * t * t); }

/// COMPLEX, (k-exp; stereographic u,v; t)-coordinates: (1/8)(1-t^2)^2/t^3
/// times the stereographic area element 4/(1+u^2+v^2)^2, normalized.
inline double haar_collar_density_cplx(double t, double u, double v) {
  const double r2 = u * u + v * v;
  const double area = 4.0 / ((1.0 + r2) * (1.0 + r2));
  return 0.125 * (1.0 - t * t) * (1.0 - t * t) / (t * t * t) * area /
         detail::haar_norm_const_cplx();
}

}  // namespace sl2c
