#pragma once

// Exact arithmetic and decompositions for SL(2,K), K = R or C.
//
// Everything here is closed-form 2x2 algebra: the polar factor of a
// unit-determinant matrix is (g*g + Id)/sqrt(tr(g*g) + 2), Iwasawa factors
// come from one Gram-Schmidt step, and boundary parameters are eigenvalue
// ratios computed from the characteristic polynomial (det g*g = 1), which
// stays accurate down to ratios ~ 1e-300 where generic eigensolvers lose
// the small eigenvalue in roundoff.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace sl2c {

struct RealField {
  using Scalar = double;
  static constexpr double kappa = 0.5;   // L^2 threshold weight of Haar measure
  static constexpr bool is_complex = false;
  static constexpr const char* name = "real";
};

struct ComplexField {
  using Scalar = std::complex<double>;
  static constexpr double kappa = 1.0;
  static constexpr bool is_complex = true;
  static constexpr const char* name = "complex";
};

template <class F> using Mat2 = Eigen::Matrix<typename F::Scalar, 2, 2>;
template <class F> using Vec2 = Eigen::Matrix<typename F::Scalar, 2, 1>;
using Mat2d = Eigen::Matrix2d;

/// Central tolerance record. All hard-coded checks in the library read from
/// here; tests use the same values.
struct Tolerances {
  double det = 1e-12;          // |det g - 1| for a valid group element
  double recompose = 1e-12;    // factorization round trips
  double collar_reject = 1e-6; // eig_split: reject t > 1 - collar_reject
};
inline const Tolerances& tol() {
  static const Tolerances t{};
  return t;
}

inline double re(double x) { return x; }
inline double re(std::complex<double> z) { return z.real(); }
inline double abs2(double x) { return x * x; }
inline double abs2(std::complex<double> z) { return std::norm(z); }

template <class F>
bool is_group_element(const Mat2<F>& g, double dtol = tol().det) {
  if (!g.allFinite()) return false;
  return std::abs(g.determinant() - typename F::Scalar(1)) <= dtol * std::max(1.0, g.squaredNorm());
}

template <class F>
void require_group_element(const Mat2<F>& g, const char* where) {
  if (!is_group_element<F>(g))
    throw std::invalid_argument(std::string(where) + ": matrix is not a unit-determinant 2x2 over the field");
}

/// Adjugate inverse, exact for det = 1 (involutive).
template <class F>
Mat2<F> invert(const Mat2<F>& g) {
  Mat2<F> inv;
  inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
  return inv;
}

template <class F>
Mat2<F> multiply(const Mat2<F>& g, const Mat2<F>& h) {
  return g * h;
}

inline Mat2d rotation(double theta) {
  // k(theta) = [[c, s], [-s, c]]; the (c,s) convention used throughout.
  Mat2d k;
  k << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return k;
}

inline double rotation_angle(const Mat2d& k) { return std::atan2(k(0, 1), k(0, 0)); }

inline Mat2d unipotent_upper(double x) {
  Mat2d n;
  n << 1.0, x, 0.0, 1.0;
  return n;
}
inline Mat2d unipotent_lower(double x) {
  Mat2d n;
  n << 1.0, 0.0, x, 1.0;
  return n;
}

template <class F>
Mat2<F> diag_split(double tau) {
  // diag(tau^{1/2}, tau^{-1/2}); tau > 0
  Mat2<F> d = Mat2<F>::Zero();
  d(0, 0) = typename F::Scalar(std::sqrt(tau));
  d(1, 1) = typename F::Scalar(1.0 / std::sqrt(tau));
  return d;
}

/// Largest eigenvalue of g^* g (which has unit determinant), from the
/// characteristic polynomial.  tr >= 2 always.
template <class F>
double gram_lambda_max(const Mat2<F>& g) {
  const double T = g.squaredNorm();  // tr(g^* g)
  return 0.5 * (T + std::sqrt(std::max(T * T - 4.0, 0.0)));
}

/// Boundary parameter of g in G[1]: ratio (small eigenvalue)/(large
/// eigenvalue) of the polar factor a = (g^* g)^{1/2}.  Equals 1 on K and
/// tends to 0 at the boundary.
template <class F>
double boundary_param(const Mat2<F>& g) {
  return 1.0 / gram_lambda_max<F>(g);
}

// ---------------------------------------------------------------------------
// polar decomposition

template <class F>
struct PolarParts {
  Mat2<F> k;  // unitary / special orthogonal factor
  Mat2<F> a;  // positive factor, det 1
};

/// g = k a with a = (g^* g)^{1/2}.  Closed form: since det(g^* g) = 1,
/// a = (g^* g + Id)/sqrt(tr(g^* g) + 2)  (square both sides and use
/// Cayley-Hamilton).  This is the explicit-quadratic eigen square root in
/// simplified form.
template <class F>
PolarParts<F> polar_decompose(const Mat2<F>& g) {
  require_group_element<F>(g, "polar_decompose");
  const Mat2<F> S = g.adjoint() * g;
  const double T = re(S.trace());
  if (!std::isfinite(T) || T > 1e300)
    throw std::domain_error("polar_decompose: input out of floating-point range");
  PolarParts<F> p;
  p.a = (S + Mat2<F>::Identity()) / std::sqrt(T + 2.0);
  p.k = g * invert<F>(p.a);
  return p;
}

/// Polar factors of diag(tau^{1/2}, tau^{-1/2}) n(-x):
///   a(x;tau) = (tau + x^2 tau + 1/tau + 2)^{-1/2} [[tau+1, -x tau], [-x tau, x^2 tau + 1/tau + 1]]
///   k = [[c, s], [-s, c]],  c = (tau+1)/h,  s = -x tau/h,  h = ((tau+1)^2 + (x tau)^2)^{1/2}
template <class F>
PolarParts<F> polar_unipotent_closed_form(double tau, double x) {
  if (!(tau > 0.0)) throw std::invalid_argument("polar_unipotent_closed_form: tau must be positive");
  PolarParts<F> p;
  Mat2d a, k;
  const double denom = std::sqrt(tau + x * x * tau + 1.0 / tau + 2.0);
  a << tau + 1.0, -x * tau, -x * tau, x * x * tau + 1.0 / tau + 1.0;
  a /= denom;
  const double h = std::hypot(tau + 1.0, x * tau);
  const double c = (tau + 1.0) / h, s = -x * tau / h;
  k << c, s, -s, c;
  p.a = a.cast<typename F::Scalar>();
  p.k = k.cast<typename F::Scalar>();
  return p;
}

// ---------------------------------------------------------------------------
// Iwasawa decomposition

enum class ParabolicSign { Plus, Minus };  // N_+ upper / N_- lower triangular

template <class F>
struct IwasawaParts {
  Mat2<F> k;                   // compact factor
  double d = 1.0;              // diagonal factor diag(d^{1/2}, d^{-1/2})
  typename F::Scalar n{};      // unipotent parameter
  ParabolicSign sign = ParabolicSign::Plus;
};

namespace detail {
template <class F>
IwasawaParts<F> iwasawa_plus(const Mat2<F>& g) {
  using S = typename F::Scalar;
  const Vec2<F> c1 = g.col(0);
  const double r11 = std::sqrt(abs2(c1(0)) + abs2(c1(1)));
  const Vec2<F> q1 = c1 / r11;
  const S r12 = q1.dot(g.col(1));  // <q1, col2>, conjugating q1
  IwasawaParts<F> w;
  w.k.col(0) = q1;
  // exact unit-determinant complement of q1 (Gram-Schmidt cancels
  // catastrophically when the columns are nearly dependent at large scale)
  if constexpr (F::is_complex)
    w.k.col(1) << -std::conj(q1(1)), std::conj(q1(0));
  else
    w.k.col(1) << -q1(1), q1(0);
  w.d = r11 * r11;
  w.n = r12 / S(r11);
  w.sign = ParabolicSign::Plus;
  return w;
}
}  // namespace detail

/// g = k diag(d^{1/2}, d^{-1/2}) n, with n upper (Plus) or lower (Minus)
/// unipotent; one Gram-Schmidt step on the columns (the Minus case is the
/// Plus case conjugated by the basis swap).
template <class F>
IwasawaParts<F> iwasawa(const Mat2<F>& g, ParabolicSign sign) {
  require_group_element<F>(g, "iwasawa");
  if (sign == ParabolicSign::Plus) return detail::iwasawa_plus<F>(g);
  Mat2<F> J;
  J << typename F::Scalar(0), typename F::Scalar(1), typename F::Scalar(1), typename F::Scalar(0);
  IwasawaParts<F> w = detail::iwasawa_plus<F>(Mat2<F>(J * g * J));
  w.k = J * w.k * J;
  w.d = 1.0 / w.d;
  w.sign = ParabolicSign::Minus;
  return w;
}

template <class F>
Mat2<F> recompose(const IwasawaParts<F>& w) {
  Mat2<F> n = Mat2<F>::Identity();
  if (w.sign == ParabolicSign::Plus)
    n(0, 1) = w.n;
  else
    n(1, 0) = w.n;
  return w.k * diag_split<F>(w.d) * n;
}

/// Eigenvalue-quotient pseudocharacter, extended to G through the Iwasawa
/// decomposition: delta(diag(tau^{-1/2}, tau^{1/2})) = 1/tau, right
/// N_+-invariant.
template <class F>
double pseudocharacter(const Mat2<F>& g) {
  const Vec2<F> c1 = g.col(0);
  return abs2(c1(0)) + abs2(c1(1));
}

// ---------------------------------------------------------------------------
// boundary collar splitting of trace-rescaled positive matrices

template <class F>
struct BoundarySplit {
  Vec2<F> axis;          // unit eigenvector of the large eigenvalue
  double theta = 0.0;    // REAL: axis angle in [0, pi)
  double small_eig = 0;  // t, after normalizing the large eigenvalue to 1
};

template <class F>
Mat2<F> axis_projector(const Vec2<F>& axis) {
  return axis * axis.adjoint();
}

inline Mat2d axis_projector(double theta) {
  Eigen::Vector2d v(std::cos(theta), std::sin(theta));
  return v * v.transpose();
}

namespace detail {
template <class F>
void normalize_axis(Vec2<F>& v, double& theta) {
  v.normalize();
  if constexpr (F::is_complex) {
    // first entry of significant size made real positive
    std::complex<double> pivot = std::abs(v(0)) >= std::abs(v(1)) ? v(0) : v(1);
    v *= std::conj(pivot) / std::abs(pivot);
    theta = 0.0;
  } else {
    double th = std::atan2(re(v(1)), re(v(0)));
    if (th < 0) th += M_PI;
    if (th >= M_PI) th -= M_PI;
    theta = th;
    v(0) = typename F::Scalar(std::cos(th));
    v(1) = typename F::Scalar(std::sin(th));
  }
}
}  // namespace detail

/// Split b = q(xi) + t q_perp(xi) for b Hermitian psd with largest
/// eigenvalue 1.  Rejects nearly equal eigenvalues (outside the collar).
template <class F>
BoundarySplit<F> eig_split(const Mat2<F>& b) {
  if ((b - b.adjoint()).norm() > 1e-10 * std::max(1.0, b.norm()))
    throw std::invalid_argument("eig_split: matrix is not Hermitian");
  const double T = re(b.trace());
  const double D = re(b.determinant());
  const double disc = std::sqrt(std::max(T * T - 4.0 * D, 0.0));
  const double lam_max = 0.5 * (T + disc);
  const double lam_min = lam_max > 0 ? D / lam_max : 0.0;
  if (lam_min < -1e-10 || std::abs(lam_max - 1.0) > 1e-8)
    throw std::invalid_argument("eig_split: expected psd input with largest eigenvalue 1");
  const double t = std::max(lam_min, 0.0) / lam_max;
  if (t > 1.0 - tol().collar_reject)
    throw std::domain_error("eig_split: eigenvalues nearly equal, point outside boundary collar");
  // eigenvector of lam_max: rows of (b - lam_min I) span it; pick the
  // better-conditioned expression
  Vec2<F> v1, v2;
  v1 << b(0, 1), typename F::Scalar(lam_max - b(0, 0));
  v2 << typename F::Scalar(lam_max - b(1, 1)), b(1, 0);
  BoundarySplit<F> out;
  Vec2<F> v = (v1.squaredNorm() >= v2.squaredNorm()) ? v1 : v2;
  if (v.norm() < 1e-300) v << typename F::Scalar(1), typename F::Scalar(0);
  detail::normalize_axis<F>(v, out.theta);
  out.axis = v;
  out.small_eig = t;
  return out;
}

/// Reconstruct q(xi) + t q_perp(xi) from a split.
template <class F>
Mat2<F> reconstruct(const BoundarySplit<F>& s) {
  const Mat2<F> q = axis_projector<F>(s.axis);
  return q + typename F::Scalar(s.small_eig) * (Mat2<F>::Identity() - q);
}

/// Axis angle (REAL) of the polar factor's large eigenvector, in [0, pi).
inline double polar_axis_angle(const Mat2d& g) {
  const Mat2d S = g.transpose() * g;
  const double lam = gram_lambda_max<RealField>(g);
  Eigen::Vector2d v1(S(0, 1), lam - S(0, 0));
  Eigen::Vector2d v2(lam - S(1, 1), S(1, 0));
  Eigen::Vector2d v = v1.squaredNorm() >= v2.squaredNorm() ? v1 : v2;
  if (v.norm() < 1e-300) v << 1.0, 0.0;
  double th = std::atan2(v(1), v(0));
  if (th < 0) th += M_PI;
  if (th >= M_PI) th -= M_PI;
  return th;
}

}  // namespace sl2c
