#pragma once

// Analytic payloads on SL(2,R) (and the spherical function on SL(2,C)):
// spherical function with its boundary fit, convolution on the group,
// unipotent averaging, the G/N, D and L module actions, and the
// intertwining operators with their leading-term kernels.
//
// All improper integrals run in compactified coordinates on graded
// geometric meshes.  Convolution integrals over the group use boundary
// collar coordinates (phi, theta, sigma) rotated to (alpha, beta) =
// (theta + phi, theta - phi): the near-identity return set of a deep output
// point and the axis-collision slivers are all pinned at alpha = theta_g
// (mod pi/2), so grading the alpha panels around those critical values
// resolves every boundary layer at once.

#include <functional>
#include <optional>

#include "sl2c/blowup.hpp"
#include "sl2c/conormal.hpp"
#include "sl2c/quadrature.hpp"

namespace sl2c {

// ---------------------------------------------------------------------------
// function carriers with decay certificates

/// Scalar function on G with an analytic decay certificate for the
/// divergence guards of the integral operators.
struct GFunc {
  std::function<double(const Mat2d&)> f;
  HypersurfaceWeight cert;  // certified decay at the G[1] boundary
  double operator()(const Mat2d& g) const { return f(g); }
};

/// Function on (G/N)[1] = K x D[1], sampled as u(theta, d) where theta is
/// the K angle and d the Iwasawa diagonal parameter (d -> 0 is the q(e2) =
/// rho1 end, d -> infinity the q(e1) = rho0 end).
struct GNFunc {
  std::function<double(double, double)> f;
  HypersurfaceWeight cert_rho0;  // decay at d -> infinity
  HypersurfaceWeight cert_rho1;  // decay at d -> 0
  double operator()(double theta, double d) const { return f(theta, d); }
};

/// Function on D[1] (or one component of L[1]), by the diagonal parameter.
struct DFunc {
  std::function<double(double)> f;
  HypersurfaceWeight cert;  // decay at both ends (symmetric role)
  double operator()(double ell) const { return f(ell); }
};

/// Function on L[1] = D[1] and its negative component.
struct LFunc {
  DFunc plus, minus;
};

/// Chart data of a group element used by the closed-form members: boundary
/// parameter, the trace-normalized polar entries b = (g^T g + Id)/(tr + 2),
/// and the K angle.  No validity gate: products deep in the collar cancel
/// to unit scale with roundoff ~ eps * ||g|| ||v||, which is harmless for
/// function evaluation.
struct GPointData {
  double t = 1.0;
  double b00 = 0.5;
  double b01 = 0.0;
  double kangle = 0.0;
};

inline GPointData g_point_data(const Mat2d& g) {
  const Mat2d S = g.transpose() * g;
  const double T = S.trace();
  GPointData d;
  d.t = 1.0 / (0.5 * (T + std::sqrt(std::max(T * T - 4.0, 0.0))));
  d.b00 = (S(0, 0) + 1.0) / (T + 2.0);
  d.b01 = S(0, 1) / (T + 2.0);
  const Mat2d a = (S + Mat2d::Identity()) / std::sqrt(T + 2.0);
  const Mat2d k = g * invert<RealField>(a);
  d.kangle = std::atan2(k(0, 1), k(0, 0));
  return d;
}

namespace guard {
inline void hc_on_G(const GFunc& f, double kappa, const char* where) {
  if (f.cert.power < kappa - 1e-9 || !(f.cert.log_rapid || f.cert.log_order > 0))
    throw std::domain_error(std::string(where) +
                            ": input lacks a certified rho^kappa (log-decaying) bound; the "
                            "integral may diverge");
}
inline void hc_on_GN(const GNFunc& u, double kappa, const char* where) {
  if (u.cert_rho0.power < kappa - 1e-9 || u.cert_rho1.power < -kappa - 1e-9)
    throw std::domain_error(std::string(where) + ": input lacks the HC(G/N) certificate");
}
}  // namespace guard

// ---------------------------------------------------------------------------
// closed-form test function library

/// HC(G) member t^kappa (ilog rho/2)^m times smooth angular factors; the
/// angular dependence enters through the trace-free entries of the
/// normalized polar factor (globally smooth) and the K angle.
inline GFunc hc_test_member(double kappa, int m, double c1 = 0.4, double c2 = 0.2,
                            double ck = 0.0) {
  GFunc out;
  out.cert = HypersurfaceWeight{kappa, double(m), false, false};
  out.f = [=](const Mat2d& g) {
    const GPointData p = g_point_data(g);
    const double ang = 1.0 + c1 * 2.0 * (p.b00 - 0.5) + c2 * 2.0 * p.b01;
    const double kang = ck == 0.0 ? 1.0 : 1.0 + ck * std::cos(p.kangle);
    return std::pow(p.t, kappa) * std::pow(ilog(p.t / 2.0), m) * ang * kang;
  };
  return out;
}

/// Gaussian-in-log member t^kappa exp(-(log t)^2 / (2 width)): log-rapid with
/// negligible quadrature tails, used for tight refinement oracles.
inline GFunc hc_gaussian_member(double kappa, double width, double c1 = 0.4, double c2 = 0.2,
                                double ck = 0.0) {
  GFunc out;
  out.cert = HypersurfaceWeight{kappa, 0.0, true, false};
  out.f = [=](const Mat2d& g) {
    const GPointData p = g_point_data(g);
    const double ang = 1.0 + c1 * 2.0 * (p.b00 - 0.5) + c2 * 2.0 * p.b01;
    const double kang = ck == 0.0 ? 1.0 : 1.0 + ck * std::cos(p.kangle);
    const double lg = std::log(p.t);
    return std::pow(p.t, kappa) * std::exp(-lg * lg / (2.0 * width)) * ang * kang;
  };
  return out;
}

/// Genuinely log-rapid member: the profile exp(-sqrt(log 1/rho)) decays
/// faster than every power of ilog.
inline GFunc hc_log_rapid_member(double kappa, double c1 = 0.4, double c2 = 0.0) {
  GFunc out;
  out.cert = HypersurfaceWeight{kappa, 0.0, true, false};
  out.f = [=](const Mat2d& g) {
    const GPointData p = g_point_data(g);
    const double ang = 1.0 + c1 * 2.0 * (p.b00 - 0.5) + c2 * 2.0 * p.b01;
    return std::pow(p.t, kappa) * std::exp(-std::sqrt(std::log(2.0 / p.t))) * ang;
  };
  return out;
}

/// HC(G/N) member: d^{-kappa}-balanced profile with rapid log decay in the
/// total defining function, times a trigonometric K factor.
inline GNFunc gn_test_member(double kappa, double width, double a0 = 1.0, double a1 = 0.7,
                             double b2 = 0.4) {
  GNFunc out;
  out.cert_rho0 = HypersurfaceWeight{kappa, 0.0, true, false};
  out.cert_rho1 = HypersurfaceWeight{-kappa, 0.0, true, false};
  out.f = [=](double theta, double d) {
    const double prof = std::pow(d, -kappa) * std::exp(-std::log(d) * std::log(d) / (2.0 * width));
    return prof * (a0 + a1 * std::sin(theta) + b2 * std::cos(2.0 * theta));
  };
  return out;
}

inline DFunc d_test_member(double width, double shift = 0.0) {
  DFunc out;
  out.cert = HypersurfaceWeight{0.0, 0.0, true, false};
  out.f = [=](double ell) {
    const double y = std::log(ell) - shift;
    return std::exp(-y * y / (2.0 * width));
  };
  return out;
}

// ---------------------------------------------------------------------------
// spherical function

/// Phi at a diagonal point diag(t^{-1/2}, t^{1/2}), REAL: the circle average
/// of delta^{-1/2} reduces to panels graded toward the two peak directions.
inline double spherical_real_t(double t, int levels = 40, int order = 8) {
  // (1/2pi) int (cos^2/t + t sin^2)^{-1/2} dphi, peaks at phi = pi/2, 3pi/2
  Quadrature q = graded_panels(M_PI / 2.0, levels, order);
  std::vector<double> terms(q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    const double psi = q.x[i];  // distance from the peak
    const double c = std::sin(psi), s = std::cos(psi);
    terms[i] = q.w[i] / std::sqrt(c * c / t + t * s * s);
  }
  return 2.0 * pairwise_sum(terms) / M_PI;
}

/// Phi for COMPLEX at a diagonal point: the SU(2) Euler-angle box with the
/// normalized Haar density sin(beta)/2 after the exact alpha, gamma
/// integrals; the weight is the modular power delta^{-kappa} (kappa = 1),
/// which is the paper's delta^{-1/2} convention in the real case.
inline double spherical_cplx_t(double t, int levels = 40, int order = 8) {
  // (1/2) int_0^pi sin(b) (cos^2(b/2)/t + t sin^2(b/2))^{-1} db, peak at b = pi
  Quadrature q = graded_panels(M_PI, levels, order);
  std::vector<double> terms(q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    const double b = M_PI - q.x[i];
    const double ch = std::cos(b / 2), sh = std::sin(b / 2);
    terms[i] = q.w[i] * 0.5 * std::sin(b) / (ch * ch / t + t * sh * sh);
  }
  return pairwise_sum(terms);
}

/// Phi at a general group element, REAL, with panels graded toward the two
/// minimizing K directions.
inline double spherical_real(const Mat2d& g, int levels = 40, int order = 8) {
  require_group_element<RealField>(g, "spherical");
  // delta(g k^{-1}) = |g v(phi)|^2 with v(phi) = (cos, sin); minima on the
  // small-singular-vector axis of g, i.e. phi* = axis(g) + pi/2
  const double phi_star = polar_axis_angle(g) + M_PI / 2.0;
  Quadrature half = graded_panels(M_PI / 2.0, levels, order);
  std::vector<double> terms;
  terms.reserve(4 * half.size());
  for (size_t i = 0; i < half.size(); ++i)
    for (double c : {phi_star - half.x[i], phi_star + half.x[i]}) {
      const Eigen::Vector2d v(std::cos(c), std::sin(c));
      terms.push_back(half.w[i] / (g * v).norm());
    }
  return pairwise_sum(terms) / M_PI;  // two peaks, half-circle each, /(2pi), doubled by symmetry
}

/// Phi at a general SU(2)-conjugated point, COMPLEX, by the full Euler box
/// (alpha, gamma trapezoids, beta graded toward pi); usable at moderate t.
inline double spherical_cplx(const Mat2<ComplexField>& g, int nang = 256, int levels = 24,
                             int order = 8) {
  require_group_element<ComplexField>(g, "spherical");
  Quadrature qa = periodic_trapezoid(2 * M_PI, nang);
  Quadrature qc = periodic_trapezoid(4 * M_PI, nang);
  Quadrature qb = graded_panels(M_PI, levels, order);
  const std::complex<double> I(0, 1);
  std::vector<double> terms;
  terms.reserve(qa.size() * qc.size() * qb.size());
  for (size_t ib = 0; ib < qb.size(); ++ib) {
    const double beta = M_PI - qb.x[ib];
    const double ch = std::cos(beta / 2), sh = std::sin(beta / 2);
    for (size_t ia = 0; ia < qa.size(); ++ia)
      for (size_t ic = 0; ic < qc.size(); ++ic) {
        // col1 of k(alpha,beta,gamma)^*
        Vec2<ComplexField> w;
        w << std::exp(I * 0.5 * (qa.x[ia] + qc.x[ic])) * ch,
            -std::exp(I * 0.5 * (qa.x[ia] - qc.x[ic])) * sh;
        const double d = (g * w).squaredNorm();
        terms.push_back(qa.w[ia] * qc.w[ic] * qb.w[ib] * std::sin(beta) / d);
      }
  }
  return pairwise_sum(terms) / (16.0 * M_PI * M_PI);
}

/// spec-facing wrapper: spherical values at boundary levels.
template <class F>
std::vector<double> spherical(const std::vector<double>& t_levels, const QuadratureSpec& q) {
  q.validate();
  std::vector<double> out;
  out.reserve(t_levels.size());
  for (double t : t_levels) {
    auto eval = [&](const QuadratureSpec& qs) {
      return F::is_complex ? spherical_cplx_t(t, qs.boundary_levels + 14, qs.panel_order)
                           : spherical_real_t(t, qs.boundary_levels + 14, qs.panel_order);
    };
    Refined r = self_check(eval, q);
    if (r.error > 1e-8 * std::abs(r.value) + 1e-300)
      throw std::runtime_error("spherical: quadrature refinement disagreement above tolerance");
    out.push_back(r.value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// adapted quadrature over G (REAL)

/// Flat node list over G in (alpha, beta, sigma) coordinates, with weights
/// containing the Haar density.  alpha panels are graded around
/// theta_crit + k pi/2; sigma panels are graded toward the boundary.
struct GQuad {
  std::vector<Mat2d> v;        // group nodes
  std::vector<Mat2d> v_inv;    // their adjugate inverses
  std::vector<double> w;       // weights including density
};

namespace detail {

// empirical covering normalizer of the (alpha, beta) -> (theta, phi) map,
// pinned by the product-rule cross-check in the unit tests
inline constexpr double kAlphaBetaNorm = 0.25;

inline GQuad make_gquad(double theta_crit, int depth_j, int nbeta, int alpha_levels,
                        int sigma_levels, int alpha_order = 2, int sigma_order = 4,
                        bool beta_graded = false) {
  GQuad Q;
  Quadrature sig = graded_panels(1.0, sigma_levels, sigma_order);
  // beta = theta - phi: integrands built from Iwasawa data of v^{-1} spike
  // in beta at 0 and pi (width ~ sigma), so those integrals get graded
  // beta panels instead of the uniform rule
  Quadrature beta;
  if (beta_graded) {
    // the dip positions move like sqrt(sigma) across levels, so the panels
    // need enough nodes each to resolve a peak sitting mid-panel
    for (double c : {0.0, M_PI}) {
      Quadrature side = graded_panels(M_PI / 2.0, sigma_levels + 4, 6);
      for (size_t i = 0; i < side.size(); ++i) {
        beta.append(c - side.x[i], side.w[i]);
        beta.append(c + side.x[i], side.w[i]);
      }
    }
  } else {
    beta = periodic_trapezoid(2 * M_PI, nbeta);
  }
  // alpha panels: graded toward each critical value, reaching the midpoints
  Quadrature alpha;
  const int nc = 8;  // criticals theta_crit + k pi/2 in [0, 4 pi)
  for (int k = 0; k < nc; ++k) {
    const double c = theta_crit + k * M_PI / 2.0;
    Quadrature side = graded_panels(M_PI / 4.0, alpha_levels, alpha_order);
    for (size_t i = 0; i < side.size(); ++i) {
      alpha.append(c - side.x[i], side.w[i]);
      alpha.append(c + side.x[i], side.w[i]);
    }
  }
  (void)depth_j;
  Q.v.reserve(alpha.size() * beta.size() * sig.size());
  Q.w.reserve(Q.v.capacity());
  Q.v_inv.reserve(Q.v.capacity());
  for (size_t ia = 0; ia < alpha.size(); ++ia)
    for (size_t ib = 0; ib < beta.size(); ++ib) {
      const double th = 0.5 * (alpha.x[ia] + beta.x[ib]);
      const double ph = 0.5 * (alpha.x[ia] - beta.x[ib]);
      const double wab = kAlphaBetaNorm * alpha.w[ia] * beta.w[ib];
      const Mat2d q = axis_projector(th);
      const Mat2d rot_ph = rotation(ph);
      for (size_t is = 0; is < sig.size(); ++is) {
        const double s = sig.x[is];
        const Mat2d a = (q / std::sqrt(s) + std::sqrt(s) * (Mat2d::Identity() - q)).eval();
        const Mat2d vg = (rot_ph * a).eval();
        Q.v.push_back(vg);
        Q.v_inv.push_back(invert<RealField>(vg));
        Q.w.push_back(wab * sig.w[is] * haar_collar_density_real(s));
      }
    }
  return Q;
}

}  // namespace detail

/// One value of (f1 * f2)(g) = int f1(g v) f2(v^{-1}) dv with the quadrature
/// adapted to g's axis and depth.
inline double convolve_eval(const GFunc& f1, const GFunc& f2, const Mat2d& g,
                            const QuadratureSpec& q) {
  const double tg = boundary_param<RealField>(g);
  const int jdepth = std::max(4, int(-std::log2(tg)));
  const GQuad Q = detail::make_gquad(polar_axis_angle(g), jdepth, std::max(8, q.angular / 8),
                                     jdepth + 8, std::max(q.boundary_levels, jdepth + 8),
                                     2, q.panel_order >= 8 ? 6 : 4);
  std::vector<double> terms(Q.v.size());
  for (size_t i = 0; i < Q.v.size(); ++i)
    terms[i] = Q.w[i] * f1.f(g * Q.v[i]) * f2.f(Q.v_inv[i]);
  return pairwise_sum(terms);
}

/// Convolution on G sampled on a left-K-invariant output grid
/// (theta axis x boundary levels); inputs must carry HC certificates.
inline GridFunction convolve_G(const GFunc& f1, const GFunc& f2, const QuadratureSpec& q,
                               const Axis& theta_axis, const Axis& level_axis) {
  q.validate();
  guard::hc_on_G(f1, RealField::kappa, "convolve_G");
  guard::hc_on_G(f2, RealField::kappa, "convolve_G");
  return GridFunction::sample({theta_axis, level_axis}, [&](const std::vector<double>& c) {
    const double t = std::pow(2.0, -c[1]);
    const Mat2d qp = axis_projector(c[0]);
    const Mat2d g = (qp / std::sqrt(t) + std::sqrt(t) * (Mat2d::Identity() - qp)).eval();
    return convolve_eval(f1, f2, g, q);
  });
}

/// Normalized bump at the identity (approximate identity family).
inline GFunc bump_at_identity(double eps, const QuadratureSpec& q) {
  auto raw = [eps](const Mat2d& g) {
    const double d2 = (g - Mat2d::Identity()).squaredNorm();
    return std::exp(-d2 / (2.0 * eps * eps));
  };
  GFunc probe;
  probe.f = raw;
  probe.cert = HypersurfaceWeight{10.0, 0.0, true, false};  // Gaussian: better than any weight
  GFunc one;
  one.f = [](const Mat2d&) { return 1.0; };
  one.cert = probe.cert;
  const double mass = convolve_eval(one, probe, Mat2d::Identity(), q);
  GFunc out;
  out.cert = probe.cert;
  out.f = [raw, mass](const Mat2d& g) { return raw(g) / mass; };
  return out;
}

// ---------------------------------------------------------------------------
// GL_+ convolution (multiplicative line)

struct GLFunc {
  std::function<double(double)> f;
  HypersurfaceWeight cert;
};

/// (f1 * f2)(sigma) = int f1(sigma/tau) f2(tau) dtau/tau, in y = log tau.
inline double glplus_convolve_eval(const GLFunc& f1, const GLFunc& f2, double sigma_out,
                                   double ymax, double dy) {
  std::vector<double> terms;
  const double ls = std::log(sigma_out);
  for (double y = -ymax; y <= ymax; y += dy)
    terms.push_back(dy * f1.f(std::exp(ls - y)) * f2.f(std::exp(y)));
  return pairwise_sum(terms);
}

inline GridFunction glplus_convolve(const GLFunc& f1, const GLFunc& f2, const QuadratureSpec& q,
                                    const Axis& level_axis, bool upper_end = false) {
  q.validate();
  if (!(f1.cert.log_rapid && f2.cert.log_rapid))
    throw std::domain_error("glplus_convolve: inputs lack the (log rho)^infinity certificate");
  const double ymax = (level_axis.nodes.back() + 40.0) * std::log(2.0);
  return GridFunction::sample({level_axis}, [&](const std::vector<double>& c) {
    const double sigma = upper_end ? std::pow(2.0, c[0]) : std::pow(2.0, -c[0]);
    return glplus_convolve_eval(f1, f2, sigma, ymax, 0.25);
  });
}

// ---------------------------------------------------------------------------
// unipotent averaging and the module actions

/// (int_N f)(theta, d) = int f(k(theta) diag(d^{1/2}, d^{-1/2}) n(x)) dx on
/// the compactified N axis.
inline double average_N_eval(const GFunc& f, double theta, double d, int levels, int order = 6) {
  Quadrature xq = compactified_line(levels, order);
  const Mat2d base = (rotation(theta) * diag_split<RealField>(d)).eval();
  std::vector<double> terms(xq.size());
  for (size_t i = 0; i < xq.size(); ++i)
    terms[i] = xq.w[i] * f.f(base * unipotent_upper(xq.x[i]));
  return pairwise_sum(terms);
}

inline GNFunc average_N(const GFunc& f, const QuadratureSpec& q) {
  q.validate();
  guard::hc_on_G(f, RealField::kappa, "average_N");
  const int levels = q.boundary_levels + 20;
  GNFunc out;
  out.cert_rho0 = HypersurfaceWeight{RealField::kappa, 0.0, true, false};
  out.cert_rho1 = HypersurfaceWeight{-RealField::kappa, 0.0, true, false};
  out.f = [f, levels, order = q.panel_order](double theta, double d) {
    return average_N_eval(f, theta, d, levels, order);
  };
  return out;
}

/// Direct-route module action: (f * u)(h) = int_G f(h v) u(pi_+(v^{-1})) dv,
/// over the boundary collar chart with both angular directions graded.
inline double act_on_GN_eval(const GFunc& f, const GNFunc& u, double theta_out, double d_out,
                             const QuadratureSpec& q) {
  const Mat2d h = (rotation(theta_out) * diag_split<RealField>(d_out)).eval();
  const double tg = boundary_param<RealField>(h);
  const int jdepth = std::max(4, int(-std::log2(tg)));
  const GQuad Q = detail::make_gquad(polar_axis_angle(h), jdepth, std::max(8, q.angular / 8),
                                     jdepth + 8, std::max(q.boundary_levels, jdepth + 8), 2, 4,
                                     /*beta_graded=*/true);
  std::vector<double> terms(Q.v.size());
  for (size_t i = 0; i < Q.v.size(); ++i) {
    const auto w = iwasawa<RealField>(Q.v_inv[i], ParabolicSign::Plus);
    terms[i] = Q.w[i] * f.f(h * Q.v[i]) * u.f(rotation_angle(w.k), w.d);
  }
  return pairwise_sum(terms);
}

/// Kernel route: S~(f)(k, qtil, k') = int_N f(k qtil n(x)^{-1} k'^{-1}) dx,
/// composed against u:
///   (f*u)(theta, d) = (1/16) int int S~(f)(theta, d/d', psi) u(psi, d')
///                     dpsi (dd'/d').
/// The 1/16 is the Haar constant of the Iwasawa coordinates in our
/// normalization: the left-invariant frame determinant of
/// (psi, log d', x) |-> k(psi) diag(d'^{1/2}, d'^{-1/2}) n(x) is d'/2, and
/// the identity normalization divides by 8; the substitution z = x d'
/// (the dn' = delta dn change of variables) absorbs the d' weight.
inline constexpr double kIwasawaHaarConst = 1.0 / 16.0;

inline double act_on_GN_kernel_eval(const GFunc& f, const GNFunc& u, double theta_out,
                                    double d_out, const QuadratureSpec& q) {
  const int nk = q.angular / 2;
  Quadrature kq = periodic_trapezoid(2 * M_PI, nk);
  // multiplicative d' nodes: graded panels on (0,1] and their reciprocals
  Quadrature half = graded_panels(1.0, q.boundary_levels, q.panel_order);
  std::vector<double> dnodes, dweights;  // weights for dd'/d'
  for (size_t i = 0; i < half.size(); ++i) {
    dnodes.push_back(half.x[i]);
    dweights.push_back(half.w[i] / half.x[i]);
    dnodes.push_back(1.0 / half.x[i]);
    dweights.push_back(half.w[i] * half.x[i] / (half.x[i] * half.x[i]));  // = w/x
  }
  Quadrature xq = compactified_line(q.boundary_levels + 10, q.panel_order);
  std::vector<double> terms;
  terms.reserve(kq.size() * dnodes.size());
  const Mat2d kout = rotation(theta_out);
  for (size_t ik = 0; ik < kq.size(); ++ik) {
    const Mat2d kpi = rotation(-kq.x[ik]);  // k'^{-1}
    for (size_t id = 0; id < dnodes.size(); ++id) {
      const double dp = dnodes[id];
      const double dtil = d_out / dp;
      // S~(f)(k_out, dtil, k') by the inner N quadrature
      const Mat2d base = (kout * diag_split<RealField>(dtil)).eval();
      std::vector<double> inner(xq.size());
      for (size_t ix = 0; ix < xq.size(); ++ix)
        inner[ix] = xq.w[ix] * f.f(base * unipotent_upper(-xq.x[ix]) * kpi);
      terms.push_back(kq.w[ik] * dweights[id] * pairwise_sum(inner) * u.f(kq.x[ik], dp));
    }
  }
  return kIwasawaHaarConst * pairwise_sum(terms);
}

/// The module action as a function on (G/N)[1]; evaluated through the
/// Iwasawa-adapted kernel route (the direct chart route above serves as the
/// independent cross-check).
inline GNFunc act_on_GN(const GFunc& f, const GNFunc& u, const QuadratureSpec& q) {
  q.validate();
  guard::hc_on_G(f, RealField::kappa, "act_on_GN");
  guard::hc_on_GN(u, RealField::kappa, "act_on_GN");
  GNFunc out;
  out.cert_rho0 = u.cert_rho0;
  out.cert_rho1 = u.cert_rho1;
  out.f = [f, u, q](double theta, double d) { return act_on_GN_kernel_eval(f, u, theta, d, q); };
  return out;
}

/// D-module action: (u * v)(theta, d) = int u(theta, d/l) v(l) l^{-1/2} dl/l.
inline double act_D_eval(const GNFunc& u, const DFunc& v, double theta, double d, int levels,
                         int order = 6) {
  Quadrature half = graded_panels(1.0, levels, order);
  std::vector<double> terms;
  terms.reserve(2 * half.size());
  for (size_t i = 0; i < half.size(); ++i)
    for (double l : {half.x[i], 1.0 / half.x[i]}) {
      const double w = half.w[i] / half.x[i];  // dl/l
      terms.push_back(w * u.f(theta, d / l) * v.f(l) / std::sqrt(l));
    }
  return pairwise_sum(terms);
}

inline GNFunc act_D(const GNFunc& u, const DFunc& v, const QuadratureSpec& q) {
  q.validate();
  guard::hc_on_GN(u, RealField::kappa, "act_D");
  if (!v.cert.log_rapid) throw std::domain_error("act_D: D-factor lacks the HC(D) certificate");
  GNFunc out;
  out.cert_rho0 = u.cert_rho0;
  out.cert_rho1 = u.cert_rho1;
  out.f = [u, v, lv = q.boundary_levels + 16, o = q.panel_order](double theta, double d) {
    return act_D_eval(u, v, theta, d, lv, o);
  };
  return out;
}

/// L-module action: (phi o psi)(theta, d) = sum over both components of
/// int phi(theta [+pi], d l) delta^{1/2}(l^{-1}) psi(l^{-1}) dl; the minus
/// component acts through -Id = k(pi).
inline double act_L_eval(const GNFunc& phi, const LFunc& psi, double theta, double d, int levels,
                         int order = 6) {
  Quadrature half = graded_panels(1.0, levels, order);
  std::vector<double> terms;
  terms.reserve(4 * half.size());
  for (size_t i = 0; i < half.size(); ++i)
    for (double l : {half.x[i], 1.0 / half.x[i]}) {
      const double w = half.w[i] / half.x[i];
      const double dinv = 1.0 / l;  // delta(l^{-1})^{1/2} = l^{-1/2} in the d-parameter
      terms.push_back(w * phi.f(theta, d * l) * std::sqrt(dinv) * psi.plus.f(dinv));
      terms.push_back(w * phi.f(theta + M_PI, d * l) * std::sqrt(dinv) * psi.minus.f(dinv));
    }
  return pairwise_sum(terms);
}

inline GNFunc act_L(const GNFunc& phi, const LFunc& psi, const QuadratureSpec& q) {
  q.validate();
  guard::hc_on_GN(phi, RealField::kappa, "act_L");
  if (!psi.plus.cert.log_rapid || !psi.minus.cert.log_rapid)
    throw std::domain_error("act_L: L-factor lacks the HC(L) certificate");
  GNFunc out;
  out.cert_rho0 = phi.cert_rho0;
  out.cert_rho1 = phi.cert_rho1;
  out.f = [phi, psi, lv = q.boundary_levels + 16, o = q.panel_order](double theta, double d) {
    return act_L_eval(phi, psi, theta, d, lv, o);
  };
  return out;
}

// ---------------------------------------------------------------------------
// intertwining operators

/// J_+(u)(theta, d) = int u(pi_-(k(theta) diag(d^{1/2}, d^{-1/2}) n_+(x))) dx
/// for u on G/N_-; sign Minus runs the mirrored transform.
inline double intertwine_eval(const GNFunc& u, ParabolicSign sign, double theta, double d,
                              int levels, int order = 8) {
  Quadrature xq = compactified_line(levels, order);
  const Mat2d base = (rotation(theta) * diag_split<RealField>(d)).eval();
  const ParabolicSign opp = sign == ParabolicSign::Plus ? ParabolicSign::Minus : ParabolicSign::Plus;
  std::vector<double> terms(xq.size());
  for (size_t i = 0; i < xq.size(); ++i) {
    const Mat2d n = sign == ParabolicSign::Plus ? unipotent_upper(xq.x[i]) : unipotent_lower(xq.x[i]);
    const auto w = iwasawa<RealField>(Mat2d(base * n), opp);
    terms[i] = xq.w[i] * u.f(rotation_angle(w.k), w.d);
  }
  return pairwise_sum(terms);
}

inline GNFunc intertwine(const GNFunc& u, ParabolicSign sign, const QuadratureSpec& q) {
  q.validate();
  guard::hc_on_GN(u, RealField::kappa, "intertwine");
  GNFunc out;
  out.cert_rho0 = u.cert_rho0;
  out.cert_rho1 = u.cert_rho1;
  out.f = [u, sign, lv = q.boundary_levels + 24, o = q.panel_order](double theta, double d) {
    return intertwine_eval(u, sign, theta, d, lv, o);
  };
  return out;
}

/// Leading kernel of J_+/J_-: the realized boundary value of
/// delta^{-1/2} J f at the rho_0 end,
///   K(f)(theta) = (1/2) int_A delta_mp^{1/2}(l) [ f(theta + pi/2, l)
///                                               + f(theta - pi/2, l) ] dl,
/// with both Weyl translates entering with positive sign (each orbit branch
/// pushes forward a positive density); pure first harmonics in theta form
/// the null class.
inline double intertwine_leading(const GNFunc& f, ParabolicSign sign, double theta, int levels,
                                 int order = 8) {
  Quadrature half = graded_panels(1.0, levels, order);
  std::vector<double> terms;
  terms.reserve(2 * half.size());
  for (size_t i = 0; i < half.size(); ++i)
    for (double e : {half.x[i], 1.0 / half.x[i]}) {
      const double w = half.w[i] / half.x[i];
      // delta of the opposite parabolic at the A point with parameter e
      const double dmp = sign == ParabolicSign::Plus ? 1.0 / e : e;
      terms.push_back(0.5 * w * std::sqrt(dmp) *
                      (f.f(theta + M_PI / 2.0, e) + f.f(theta - M_PI / 2.0, e)));
    }
  return pairwise_sum(terms);
}

}  // namespace sl2c
