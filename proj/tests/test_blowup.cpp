#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sl2c/blowup.hpp"
#include "sl2c/rng.hpp"

using namespace sl2c;

namespace {

Mat2d collar_elem(double phi, double th, double t) {
  const Mat2d q = axis_projector(th);
  return rotation(phi) * (q / std::sqrt(t) + std::sqrt(t) * (Mat2d::Identity() - q));
}

std::vector<double> jlevels(int j0, int j1) {
  std::vector<double> v;
  for (int j = j0; j <= j1; ++j) v.push_back(std::pow(2.0, -j));
  return v;
}

}  // namespace

TEST_CASE("GL_+[2] charts") {
  // interior away from the blown corners
  auto p = glplus2_lift(1.0, 1.0);
  CHECK(p.chart == "product");
  // diagonal approach to (0,0): front-face chart with sigma/tau = 1
  p = glplus2_lift(1e-6, 1e-6);
  CHECK(p.chart == "c00_sig_over_tau");
  CHECK(p.coords[0] == doctest::Approx(1.0));
  // (eps, eps^2): the projective coordinate runs to the boundary of the
  // front face (sigma/tau = 1/eps leaves the first chart)
  p = glplus2_lift(1e-3, 1e-6);
  CHECK(p.chart == "c00_tau_over_sig");
  CHECK(p.coords[0] == doctest::Approx(1e-3));
  CHECK_THROWS_AS(glplus2_lift(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("GL_+[2] lifted map slopes") {
  // pi_L pull-back has slope 1 at each front face; chi = sigma/tau is
  // constant along front-face families (fixed faces)
  std::vector<double> bdf, piL00, piL11, chi00, chi11;
  for (int j = 6; j <= 20; ++j) {
    const double e = std::pow(2.0, -j);
    auto p00 = glplus2_lift(0.7 * e, 0.3 * e);
    bdf.push_back(p00.bdf.at("ff00"));
    piL00.push_back(0.7 * e);        // pi_L value sigma, its rho0-bdf
    chi00.push_back(0.7 / 0.3);      // chi value sigma/tau
    piL11.push_back(1.0 / (0.7 / e));  // top-end bdf of pi_L at the (inf,inf) family
    chi11.push_back(0.7 / 0.3);
  }
  auto f1 = loglog_slope(bdf, piL00);
  CHECK(f1.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(f1.r2 > 0.999);
  auto f2 = loglog_slope(bdf, chi00);
  CHECK(std::abs(f2.slope) < 0.05);  // fixed face
  auto f3 = loglog_slope(bdf, piL11);
  CHECK(f3.slope == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("g2_lift charts and bdfs") {
  Mat2d far1 = collar_elem(0.1, 0.4, 0.6), far2 = collar_elem(0.7, 1.2, 0.8);
  auto p = g2_lift<RealField>(far1, far2);
  CHECK(p.chart.chart == "product");
  for (auto& [k, v] : p.chart.bdf) CHECK(v > 0.05);

  // fiber-diagonal approach: g = h deep
  const double t = 1e-4;
  Mat2d gd = collar_elem(0.0, 0.3, t);
  p = g2_lift<RealField>(gd, gd);
  CHECK(p.chart.bdf.at("tau1") == doctest::Approx(0.5));
  CHECK(p.chart.bdf.at("x") == doctest::Approx(2.0 * t).epsilon(1e-6));
  CHECK(p.chart.chart == "diag_mid_c1");

  // separated axes, t1 = 1e-2, t2 = 1e-6: corner chart with the projective
  // coordinate fixed by the ratio
  Mat2d g1e = collar_elem(0.2, 0.9, 1e-2);
  Mat2d g2e = collar_elem(0.5, 0.0, 1e-6);
  p = g2_lift<RealField>(g1e, g2e);
  CHECK(p.chart.chart == "corner_c2");
  CHECK(p.chart.bdf.at("tau2") == doctest::Approx(1e-4).epsilon(1e-3));
  CHECK(p.chart.bdf.at("s") / (1e-2 / std::sin(0.9)) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("chi trivial identities") {
  Rng rng(71);
  for (int i = 0; i < 50; ++i) {
    Mat2d g = rng.group_element<RealField>();
    // chi(g, g) = e
    auto pe = chi_lifted<RealField>(g2_lift<RealField>(g, g));
    CHECK(pe.at.bdf.at("t") == doctest::Approx(1.0).epsilon(1e-10));
    // chi(g, e) = g
    auto pg = chi_lifted<RealField>(g2_lift<RealField>(g, Mat2d(Mat2d::Identity())));
    CHECK(pg.at.bdf.at("t") ==
          doctest::Approx(boundary_param<RealField>(g)).epsilon(1e-10));
  }
}

TEST_CASE("chi exponent rows by regression") {
  // families moving one defining function at a time; chi row (1,1,2,0),
  // piL row (1,0,1,1), piR row (0,1,1,1)
  auto chi_t = [](double th1, double t1, double th2, double t2) {
    return chi_lifted<RealField>(
               g2_lift<RealField>(collar_elem(0.0, th1, t1), collar_elem(0.0, th2, t2)))
        .at.bdf.at("t");
  };
  std::vector<double> js;
  for (int j = 6; j <= 20; ++j) js.push_back(double(j));

  auto run = [&](auto family) {
    std::vector<double> bdfv, chiv, t1v, t2v;
    for (double j : js) {
      auto [th1, t1, th2, t2, lead] = family(j);
      bdfv.push_back(lead);
      chiv.push_back(chi_t(th1, t1, th2, t2));
      t1v.push_back(t1);
      t2v.push_back(t2);
    }
    return std::tuple{loglog_slope(bdfv, chiv), loglog_slope(bdfv, t1v), loglog_slope(bdfv, t2v)};
  };

  // tau1 family
  auto [c1, l1, r1] = run([](double j) {
    const double t2 = std::pow(2.0, -5.0), t1 = std::pow(2.0, -j) * t2;
    return std::tuple{0.9, t1, 0.0, t2, t1 / (t1 + t2)};
  });
  CHECK(c1.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(l1.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(r1.slope) < 0.01);
  // tau2 family
  auto [c2, l2, r2] = run([](double j) {
    const double t1 = std::pow(2.0, -5.0), t2 = std::pow(2.0, -j) * t1;
    return std::tuple{0.9, t1, 0.0, t2, t2 / (t1 + t2)};
  });
  CHECK(c2.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(l2.slope) < 0.01);
  CHECK(r2.slope == doctest::Approx(1.0).epsilon(0.01));
  // s family (both to zero, axes separated)
  auto [c3, l3, r3] = run([](double j) {
    const double t1 = 0.7 * std::pow(2.0, -j), t2 = 0.3 * std::pow(2.0, -j);
    return std::tuple{0.9, t1, 0.0, t2, (t1 + t2) / std::hypot(std::sin(0.9), t1 + t2)};
  });
  CHECK(c3.slope == doctest::Approx(2.0).epsilon(0.005));
  CHECK(l3.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(r3.slope == doctest::Approx(1.0).epsilon(0.01));
  // x family (axes merge at the same rate)
  auto [c4, l4, r4] = run([](double j) {
    const double t1 = 0.6 * std::pow(2.0, -j), t2 = 0.4 * std::pow(2.0, -j);
    const double dth = 0.5 * std::pow(2.0, -j);
    return std::tuple{dth, t1, 0.0, t2, std::hypot(std::sin(dth), t1 + t2)};
  });
  CHECK(std::abs(c4.slope) < 0.01);
  CHECK(l4.slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(r4.slope == doctest::Approx(1.0).epsilon(0.01));

  CHECK(g2_exponents("chi").b_normal());
  CHECK(g2_exponents("piL").b_normal());
}

TEST_CASE("chi smoothness proxy: bounded second differences at the boundary") {
  // second-order differences of chi's chart data in j stay bounded along a
  // graded family through the front face
  std::vector<double> vals;
  for (int j = 6; j <= 22; ++j) {
    const double t1 = 0.6 * std::pow(2.0, -j), t2 = 0.4 * std::pow(2.0, -j);
    auto p = chi_lifted<RealField>(
        g2_lift<RealField>(collar_elem(0.0, 0.9, t1), collar_elem(0.0, 0.0, t2)));
    vals.push_back(std::log2(p.at.bdf.at("t")));
  }
  // log2 chi*t is asymptotically affine in j: second differences -> 0
  std::vector<double> d2;
  for (size_t i = 2; i < vals.size(); ++i) d2.push_back(vals[i] - 2 * vals[i - 1] + vals[i - 2]);
  for (size_t i = 1; i < d2.size(); ++i) CHECK(std::abs(d2[i]) < std::abs(d2[0]) + 1e-6);
}

TEST_CASE("g2 measure exponents, real") {
  std::vector<double> js;
  for (int j = 4; j <= 16; ++j) js.push_back(double(j));
  const double kap = RealField::kappa;
  auto exps = g2_measure_exponents(kap);

  // s family in corner_c1: v = 2^-j
  {
    std::vector<double> bdf, val;
    for (double j : js) {
      const double v = std::pow(2.0, -j);
      bdf.push_back(v);
      val.push_back(g2_measure_real("corner_c1", {0.3, 0.9, 0.7, 1.0, 0.0, v}));
    }
    auto f = loglog_slope(bdf, val);
    CHECK(f.slope == doctest::Approx(exps[2]).epsilon(0.01));  // -4k = -2
    CHECK(f.r2 > 0.999);
  }
  // tau1 family: u = 2^-j
  {
    std::vector<double> bdf, val;
    for (double j : js) {
      const double u = std::pow(2.0, -j);
      bdf.push_back(u);
      val.push_back(g2_measure_real("corner_c1", {0.3, 0.9, u, 1.0, 0.0, std::pow(2.0, -5)}));
    }
    auto f = loglog_slope(bdf, val);
    CHECK(f.slope == doctest::Approx(exps[0]).epsilon(0.02));  // -2k = -1
  }
  // x family in diag_mid_c1: v = 2^-j at fixed m
  {
    std::vector<double> bdf, val;
    for (double j : js) {
      const double v = std::pow(2.0, -j);
      bdf.push_back(v);
      val.push_back(g2_measure_real("diag_mid_c1", {0.3, 0.7, 1.0, 0.8, 0.5, v}));
    }
    auto f = loglog_slope(bdf, val);
    CHECK(f.slope == doctest::Approx(exps[3]).epsilon(0.02));  // -2k = -1
  }
}

TEST_CASE("g2 measure exponents, complex corner: s slope -4 and x slope -2") {
  std::vector<double> js;
  for (int j = 4; j <= 16; ++j) js.push_back(double(j));
  std::vector<double> bdf, val;
  for (double j : js) {
    const double v = std::pow(2.0, -j);
    bdf.push_back(v);
    val.push_back(g2_measure_cplx_corner(0.7, v, 0.2, -0.1));
  }
  auto f = loglog_slope(bdf, val);
  CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.01));  // -4k, complex

  // x family along a one-parameter family through the standard chart:
  // measure relative to the family's b-frame picks up x^{-2k} = x^{-2}.
  // Realized via the product measure in (t1, t2, sphere-angle) coordinates
  // pulled to the polar chart (x; sigma, r): with t_i = taubar_i c 2^{-j}
  // and angle gamma 2^{-j}, dgdh/(b-Leb) = dens1 dens2 J (prod bdf) with
  // J the 3x3 family Jacobian
  // the S^2 fiber diagonal has codimension 2, so the family chart carries
  // two transverse sphere offsets (m, w), both scaling with the front-face
  // variable v
  bdf.clear();
  val.clear();
  for (double j : js) {
    const double v = std::pow(2.0, -j), u = 0.8, m = 0.5, w0 = 0.3;
    auto mapf = [&](double uu, double mm, double ww, double vv) {
      const double du = std::sin(mm * vv) / (1.0 + std::cos(mm * vv));
      const double dv = std::sin(ww * vv) / (1.0 + std::cos(ww * vv));
      return Eigen::Vector4d(uu * vv, vv, du, dv);
    };
    Eigen::Matrix4d J;
    const double hu = 1e-6 * u, hm = 1e-6 * m, hw = 1e-6 * w0, hv = 1e-6 * v;
    J.col(0) = (mapf(u + hu, m, w0, v) - mapf(u - hu, m, w0, v)) / (2 * hu);
    J.col(1) = (mapf(u, m + hm, w0, v) - mapf(u, m - hm, w0, v)) / (2 * hm);
    J.col(2) = (mapf(u, m, w0 + hw, v) - mapf(u, m, w0 - hw, v)) / (2 * hw);
    J.col(3) = (mapf(u, m, w0, v + hv) - mapf(u, m, w0, v - hv)) / (2 * hv);
    const Eigen::Vector4d pc = mapf(u, m, w0, v);
    bdf.push_back(v);
    val.push_back(haar_collar_density_cplx(pc(0), pc(2), pc(3)) *
                  haar_collar_density_cplx(pc(1), 0.0, 0.0) * std::abs(J.determinant()) * u * v);
  }
  f = loglog_slope(bdf, val);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(0.02));  // -2k, complex x-exponent
}

TEST_CASE("G[1;P] defining functions and charts") {
  // exact identity rho0 rho1 rho2^2 = t
  for (auto [t, s] : std::vector<std::pair<double, double>>{{1e-3, 0.04}, {1e-8, 0.3}, {0.2, -0.1}}) {
    auto r = g1P_bdfs(t, s);
    CHECK(r[0] * r[1] * r[2] * r[2] == doctest::Approx(t).epsilon(1e-12));
  }

  // collar extraction round trip: beta(t,s)/sqrt(det) has collar coords (t,s)
  for (auto [t, s] : std::vector<std::pair<double, double>>{{1e-4, 0.02}, {0.01, -0.15}}) {
    Mat2d beta;
    beta << t + s * s, s, s, 1.0;
    const PCollar c = p_collar_coords(Mat2d(beta / std::sqrt(t)));
    CHECK(c.valid);
    CHECK(c.t == doctest::Approx(t).epsilon(1e-10));
    CHECK(c.s == doctest::Approx(s).epsilon(1e-10));
  }

  // diagonal curve tau fixed, x -> infinity lands in the interior of the
  // second front face with eta -> 1/tau (either overlap chart may be active)
  for (double tau : {0.5, 2.0, 0.9}) {
    Mat2d g = diag_split<RealField>(tau) * unipotent_upper(-1e5);
    auto p = g1P_lift(g);
    double eta;
    if (p.chart.rfind("eta", 0) == 0)
      eta = p.coords[0];
    else {
      REQUIRE(p.chart.rfind("sigma", 0) == 0);
      eta = 1.0 / p.coords[0];
    }
    CHECK(eta == doctest::Approx(1.0 / tau).epsilon(1e-4));
    CHECK(p.bdf.at("rho2") < 1e-4);
  }

  // chart transition on the eta/sigma overlap: both describe the same (t,s)
  for (double s : {0.01, -0.02}) {
    const double t = s * s;  // eta = 1 = sigma: both admissible
    const auto r = g1P_bdfs(t, s);
    Mat2d beta;
    beta << t + s * s, s, s, 1.0;
    auto p = g1P_lift(Mat2d(beta / std::sqrt(t)));
    // reconstruct (t,s) from either chart form
    double t_back, s_back;
    if (p.chart.rfind("eta", 0) == 0) {
      t_back = p.coords[0] * p.coords[1] * p.coords[1];
      s_back = (p.chart == "eta_m" ? -1.0 : 1.0) * p.coords[1];
    } else {
      REQUIRE(p.chart.rfind("sigma", 0) == 0);
      t_back = p.coords[1] * p.coords[1] / p.coords[0] * p.coords[0] * p.coords[0];  // (t/s)^2 sigma
      s_back = (p.chart == "sigma_m" ? -1.0 : 1.0) * p.coords[0] * p.coords[1];
    }
    CHECK(t_back == doctest::Approx(t).epsilon(1e-10));
    CHECK(s_back == doctest::Approx(s).epsilon(1e-10));
    (void)r;
  }

  // fallback outside the collar (near q(e1))
  Mat2d ge1 = Mat2d::Zero();
  ge1(0, 0) = 100.0;
  ge1(1, 1) = 0.01;
  auto p = g1P_lift(ge1);
  CHECK(p.chart.rfind("g1_fallback", 0) == 0);
}

TEST_CASE("beta and piP pull-back slopes") {
  std::vector<double> js;
  for (int j = 6; j <= 20; ++j) js.push_back(double(j));

  auto run_family = [&](auto fam) {
    // returns slopes of (beta* rho, pi* rho0, pi* rho1) vs the family's face bdf
    std::vector<double> bdf, betav, pr0, pr1;
    for (double j : js) {
      auto [t, s, lead] = fam(j);
      Mat2d beta;
      beta << t + s * s, s, s, 1.0;
      Mat2d g = (beta / std::sqrt(t)).eval();
      bdf.push_back(lead);
      betav.push_back(boundary_param<RealField>(g));
      auto [k, dpt] = piP(g);
      pr0.push_back(dpt.bdf.at("rho0"));
      pr1.push_back(dpt.bdf.at("rho1"));
    }
    return std::array<SlopeFit, 3>{loglog_slope(bdf, betav), loglog_slope(bdf, pr0),
                                   loglog_slope(bdf, pr1)};
  };

  // face-0 family: chart (eta, s), eta = 2^-j at fixed s
  auto s0 = run_family([](double j) {
    const double s = 0.05, eta = std::pow(2.0, -j);
    return std::tuple{eta * s * s, s, eta};
  });
  CHECK(s0[0].slope == doctest::Approx(1.0).epsilon(0.01));  // beta* rho: 1 on rho0
  CHECK(s0[1].slope == doctest::Approx(1.0).epsilon(0.01));  // pi* rho0: 1
  CHECK(std::abs(s0[2].slope) < 0.02);                       // pi* rho1: 0
  // face-1 family: chart (sigma, u), sigma = 2^-j at fixed u
  auto s1 = run_family([](double j) {
    const double u = 0.05, sig = std::pow(2.0, -j);
    return std::tuple{sig * u * u, sig * u, sig};
  });
  CHECK(s1[0].slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(s1[1].slope) < 0.02);
  CHECK(s1[2].slope == doctest::Approx(1.0).epsilon(0.01));  // pi* rho1: 1 on rho1
  // face-2 family: chart (eta, s), s = 2^-j at fixed eta
  auto s2 = run_family([](double j) {
    const double eta = 0.5, s = std::pow(2.0, -j);
    return std::tuple{eta * s * s, s, s};
  });
  CHECK(s2[0].slope == doctest::Approx(2.0).epsilon(0.01));  // beta* rho: 2 on rho2
  CHECK(std::abs(s2[1].slope) < 0.02);                       // pi* rho0: 0 on rho2
  CHECK(std::abs(s2[2].slope) < 0.02);                       // pi* rho1: 0 on rho2 (fixed face)

  CHECK(piP_exponents().b_normal());
  CHECK(beta_exponents().b_normal());
}

TEST_CASE("piP is constant on N-orbits") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const double phi = rng.uniform(0, 2 * M_PI), d = std::exp(rng.uniform(-2, 2));
    Mat2d base = rotation(phi) * diag_split<RealField>(d);
    auto [k0, p0] = piP(Mat2d(base * unipotent_upper(0.0)));
    for (double x : {-30.0, -1.0, 0.3, 7.0, 1000.0}) {
      auto [k, p] = piP(Mat2d(base * unipotent_upper(x)));
      CHECK(p.coords[0] == doctest::Approx(p0.coords[0]).epsilon(1e-12));
      CHECK((k - k0).norm() < 1e-9);  // same K factor too
    }
    // g = k d n drops n exactly
    CHECK(p0.bdf.at("rho1") == doctest::Approx(d / (1.0 + d)).epsilon(1e-12));
  }
}

TEST_CASE("unipotent vector field") {
  // vanishes at q_1(N)
  CHECK(vfield_N(0.0, 0.0).norm() == 0.0);

  // matches the finite-difference flow derivative on a 20x20 grid
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double t = 1e-3 + 0.08 * i / 19.0;
      const double s = -0.15 + 0.3 * j / 19.0;
      worst = std::max(worst, (vfield_N(t, s) - unipotent_flow_fd(t, s)).norm());
    }
  CHECK(worst < 1e-8);

  // lifted degeneracy V = rho1 rho2^2 W with W smooth and transverse to
  // face 2 (W rho2 != 0 there): the chart-coordinate components of V vanish
  // to orders 1 in rho1 and 2 in rho2
  auto cnorm_eta = [](double t, double s) {
    // chart (eta = t/s^2, s): components (d eta/dx, ds/dx, dtheta/dx)
    const Eigen::Vector3d V = vfield_N(t, s);
    const double Veta = V(0) / (s * s) - 2.0 * t * V(1) / (s * s * s);
    return std::sqrt(Veta * Veta + V(1) * V(1) + V(2) * V(2));
  };
  auto cnorm_sigma = [](double t, double s) {
    // chart (sigma = s^2/t, u = t/s): components (d sigma/dx, du/dx, dtheta/dx)
    const Eigen::Vector3d V = vfield_N(t, s);
    const double Vsig = 2.0 * s * V(1) / t - s * s * V(0) / (t * t);
    const double Vu = V(0) / s - t * V(1) / (s * s);
    return std::sqrt(Vsig * Vsig + Vu * Vu + V(2) * V(2));
  };
  std::vector<double> bdf, val;
  for (int j = 6; j <= 18; ++j) {  // rho2 family: s = 2^-j, eta fixed
    const double s = std::pow(2.0, -j), t = 0.5 * s * s;
    bdf.push_back(s);
    val.push_back(cnorm_eta(t, s));
  }
  auto f2 = loglog_slope(bdf, val);
  CHECK(f2.slope == doctest::Approx(2.0).epsilon(0.05));
  bdf.clear();
  val.clear();
  for (int j = 6; j <= 18; ++j) {  // rho1 family: sigma = 2^-j at fixed u = t/s
    const double sig = std::pow(2.0, -j), u = 0.05;
    const double t = sig * u * u, s = sig * u;
    bdf.push_back(sig);
    val.push_back(cnorm_sigma(t, s));
  }
  auto f1 = loglog_slope(bdf, val);
  CHECK(f1.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("g1Npm: simultaneous antipodal resolutions") {
  // near q(e2): same chart as g1P_lift
  Mat2d beta;
  const double t = 1e-5, s = 0.03;
  beta << t + s * s, s, s, 1.0;
  Mat2d g = (beta / std::sqrt(t)).eval();
  auto p = g1Npm_lift(g);
  CHECK(p.chart == "plus:" + g1P_lift(g).chart);
  CHECK(p.bdf.at("rho1m") == 1.0);
  CHECK(p.bdf.at("rho1p") < 1.0);

  // near q(e1): the mirror chart via the Weyl rotation
  static const Mat2d w = rotation(M_PI / 2.0);
  Mat2d gm = (w.transpose() * g * w).eval();
  auto pm = g1Npm_lift(gm);
  CHECK(pm.chart.rfind("minus:", 0) == 0);
  CHECK(pm.bdf.at("rho1p") == 1.0);
  CHECK(pm.bdf.at("rho1m") == doctest::Approx(p.bdf.at("rho1p")).epsilon(1e-9));

  // interior: all bdf well away from zero
  auto pi = g1Npm_lift(Mat2d(Mat2d::Identity()));
  CHECK(pi.bdf.at("rho0") == doctest::Approx(1.0));
}
