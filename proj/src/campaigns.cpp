#include "sl2c/campaigns.hpp"

#include <cmath>
#include <stdexcept>

#include "sl2c/blowup.hpp"
#include "sl2c/charts.hpp"
#include "sl2c/conormal.hpp"
#include "sl2c/harmonic.hpp"
#include "sl2c/rng.hpp"

namespace sl2c {

namespace {

CheckResult check_close(const std::string& name, double value, double expected, double tol,
                        std::string detail = "") {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.expected = expected;
  c.tol = tol;
  c.pass = std::isfinite(value) && std::abs(value - expected) <= tol;
  c.detail = std::move(detail);
  return c;
}

CheckResult check_below(const std::string& name, double value, double bound,
                        std::string detail = "") {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.expected = bound;
  c.tol = bound;
  c.pass = std::isfinite(value) && value <= bound;
  c.detail = std::move(detail);
  return c;
}

CheckResult check_flag(const std::string& name, bool pass, std::string detail = "") {
  CheckResult c;
  c.name = name;
  c.pass = pass;
  c.value = pass ? 1.0 : 0.0;
  c.expected = 1.0;
  c.tol = 0.0;
  c.detail = std::move(detail);
  return c;
}

Mat2d collar_elem(double phi, double th, double t) {
  const Mat2d q = axis_projector(th);
  return rotation(phi) * (q / std::sqrt(t) + std::sqrt(t) * (Mat2d::Identity() - q));
}

std::vector<double> jgrid(int j0, int j1) {
  std::vector<double> v;
  for (int j = j0; j <= j1; ++j) v.push_back(double(j));
  return v;
}

// ---------------------------------------------------------------------------
// decompose: round trips, closed forms, eigenvalue asymptotics

template <class F>
void decompose_field(const CampaignConfig& cfg, CampaignOutput& out) {
  Rng rng(cfg.seed);
  double worst_polar = 0.0, worst_iwa = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat2<F> g = rng.template group_element<F>();
    const auto p = polar_decompose<F>(g);
    worst_polar = std::max(worst_polar, (p.k * p.a - g).template lpNorm<Eigen::Infinity>());
    for (auto s : {ParabolicSign::Plus, ParabolicSign::Minus}) {
      const auto w = iwasawa<F>(g, s);
      worst_iwa = std::max(worst_iwa, (recompose<F>(w) - g).template lpNorm<Eigen::Infinity>());
    }
  }
  const std::string tag = F::name;
  out.checks.push_back(check_below("decompose/" + tag + "/polar_round_trip", worst_polar, 1e-12,
                                   "sup residual over 1e4 elements"));
  out.checks.push_back(check_below("decompose/" + tag + "/iwasawa_round_trip", worst_iwa, 1e-12,
                                   "both signs"));
}

CampaignOutput decompose_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  if (cfg.field == "real")
    decompose_field<RealField>(cfg, out);
  else
    decompose_field<ComplexField>(cfg, out);

  // closed forms of the unipotent flow on a 20x20 (tau, x) grid
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double tau = 0.1 + 4.9 * i / 19.0, x = -5.0 + 10.0 * j / 19.0;
      const Mat2d g = (diag_split<RealField>(tau) * unipotent_upper(-x)).eval();
      const auto gen = polar_decompose<RealField>(g);
      const auto cf = polar_unipotent_closed_form<RealField>(tau, x);
      worst = std::max(worst, (gen.a - cf.a).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (gen.k - cf.k).lpNorm<Eigen::Infinity>());
    }
  out.checks.push_back(
      check_below("decompose/closed_form_vs_generic", worst, 1e-12, "20x20 (tau,x) grid"));

  // eigenvalue asymptotics: slope of log|lambda t / cosh(2s) - 1| vs log t is 2
  CsvTable tab;
  tab.name = "eig_asymptotics";
  tab.header = {"s", "slope", "r2"};
  for (double s : {0.1, 0.2}) {
    std::vector<double> bdf, val;
    const double C = std::cosh(2.0 * s);
    for (int j = 2; j <= 12; ++j) {
      const double t = std::pow(2.0, -j);
      // stable rearrangement of (lambda t / cosh - 1) for a(s)^2 =
      // [[cosh/t, sinh],[sinh, t cosh]]
      const double tt = t * t;
      const double inner = (1.0 - tt) * (1.0 - tt) + 4.0 * tt * std::tanh(2.0 * s) * std::tanh(2.0 * s);
      const double rel = 0.5 * ((tt - 1.0) + std::sqrt(inner));
      bdf.push_back(t);
      val.push_back(std::abs(rel));
    }
    const auto f = loglog_slope(bdf, val);
    tab.rows.push_back({s, f.slope, f.r2});
    out.checks.push_back(check_close("decompose/eig_asym_slope_s=" + std::to_string(s), f.slope,
                                     2.0, 0.1, "r2=" + std::to_string(f.r2)));
    out.checks.push_back(check_flag("decompose/eig_asym_r2_s=" + std::to_string(s), f.r2 > 0.999));
  }
  out.tables.push_back(tab);
  return out;
}

// ---------------------------------------------------------------------------
// haar: edge exponent regressions

CampaignOutput haar_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  std::vector<double> bdf, val;
  CsvTable tab;
  tab.name = "haar_density_levels";
  tab.header = {"j", "t", "density"};
  const bool cplx = cfg.field == "complex";
  for (int j = cfg.level_lo; j <= cfg.level_hi; ++j) {
    const double t = std::pow(2.0, -j);
    double d;
    if (cplx) {
      ChartPoint p{"At1c", "collar+z", {0.2, -0.3, t}, {{"t", t}}};
      d = haar_density<ComplexField>(p, {0.1, 0.0, -0.2});
    } else {
      ChartPoint p{"At1", "collar", {0.7, t}, {{"t", t}}};
      d = haar_density<RealField>(p, {0.3});
    }
    bdf.push_back(t);
    val.push_back(d);
    tab.rows.push_back({double(j), t, d});
  }
  out.tables.push_back(tab);
  const auto f = loglog_slope(bdf, val);
  const double expect = cplx ? -3.0 : -2.0;
  out.checks.push_back(check_close("haar/" + cfg.field + "/edge_exponent", f.slope, expect, 0.05,
                                   "expect -(1+2 kappa)"));
  out.checks.push_back(check_flag("haar/" + cfg.field + "/edge_r2", f.r2 > 0.999,
                                  "r2=" + std::to_string(f.r2)));
  bool positive = true;
  for (double v : val) positive = positive && v > 0;
  out.checks.push_back(check_flag("haar/" + cfg.field + "/positivity", positive));
  return out;
}

// ---------------------------------------------------------------------------
// spherical

CampaignOutput spherical_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  const bool cplx = cfg.field == "complex";
  const double kap = cplx ? ComplexField::kappa : RealField::kappa;

  const double phi_e = cplx ? spherical_cplx_t(1.0) : spherical_real_t(1.0);
  out.checks.push_back(check_close("spherical/" + cfg.field + "/phi_at_identity", phi_e, 1.0, 1e-8));

  // bi-K-invariance
  double dev = 0.0;
  if (cplx) {
    const double t0 = 0.2;
    const Mat2<ComplexField> g = diag_split<ComplexField>(1.0 / t0);
    const double base = spherical_cplx(g, 256, 26, 8);
    const Mat2<ComplexField> k1 = detail::su2_exp(0.3, -0.2, 0.5);
    const Mat2<ComplexField> k2 = detail::su2_exp(-0.1, 0.7, 0.2);
    dev = std::abs(spherical_cplx(Mat2<ComplexField>(k1 * g * k2), 256, 26, 8) - base);
  } else {
    Rng rng(cfg.seed + 1);
    for (int i = 0; i < 6; ++i) {
      const Mat2d g = (rotation(rng.uniform(0, 2 * M_PI)) *
                       diag_split<RealField>(std::exp(rng.uniform(-4, 4))) *
                       unipotent_upper(rng.uniform(-2, 2)))
                          .eval();
      const double base = spherical_real(g);
      const Mat2d k1 = rotation(rng.uniform(0, 2 * M_PI)), k2 = rotation(rng.uniform(0, 2 * M_PI));
      dev = std::max(dev, std::abs(spherical_real(Mat2d(k1 * g * k2)) - base));
    }
  }
  out.checks.push_back(check_below("spherical/" + cfg.field + "/bi_invariance", dev, 1e-8));

  // two-basis fit over 14 dyadic levels; sandwich bounds at every level
  std::vector<double> ts, vals;
  CsvTable tab;
  tab.name = "spherical_levels_" + cfg.field;
  tab.header = {"j", "t", "phi"};
  for (int j = cfg.level_lo; j <= cfg.level_lo + 14; ++j) {
    const double t = std::pow(2.0, -j);
    ts.push_back(t);
    vals.push_back(cplx ? spherical_cplx_t(t) : spherical_real_t(t));
    tab.rows.push_back({double(j), t, vals.back()});
  }
  out.tables.push_back(tab);
  const auto fit = asym_fit(ts, vals, kap);
  out.checks.push_back(check_below("spherical/" + cfg.field + "/fit_residual", fit.residual, 1e-3,
                                   "basis {t^mu, t^mu log 1/t}, mu=kappa"));
  out.checks.push_back(check_flag("spherical/" + cfg.field + "/fit_b_positive", fit.b > 0,
                                  "b=" + std::to_string(fit.b)));
  const double c0 = vals.front() / std::pow(ts.front(), kap) * 0.9;
  const double C0 = vals.front() / (std::pow(ts.front(), kap) * std::log(1.0 / ts.front())) * 1.1;
  bool sandwich = true;
  for (size_t i = 0; i < ts.size(); ++i) {
    sandwich = sandwich && vals[i] >= c0 * std::pow(ts[i], kap);
    sandwich = sandwich && vals[i] <= C0 * std::pow(ts[i], kap) * std::log(1.0 / ts[i]);
  }
  out.checks.push_back(check_flag("spherical/" + cfg.field + "/sandwich_bounds", sandwich,
                                  "c t^k <= Phi <= C t^k log(1/t) at all levels"));
  return out;
}

// ---------------------------------------------------------------------------
// charts: atlas consistency, blow-up exponent matrices, unipotent field

CampaignOutput charts_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  const bool cplx = cfg.field == "complex";
  const double kap = cplx ? ComplexField::kappa : RealField::kappa;
  Rng rng(cfg.seed + 2);

  // chart transition consistency on the overlap band
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    if (cplx) {
      Vec2<ComplexField> xi;
      xi << std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1)),
          std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
      if (xi.norm() < 0.1) continue;
      xi.normalize();
      const double t = rng.uniform(kCollarLo, kCollarHi);
      Mat2<ComplexField> q = axis_projector<ComplexField>(xi);
      Mat2<ComplexField> b =
          (q + std::complex<double>(t) * (Mat2<ComplexField>::Identity() - q)) / (1.0 + t);
      auto pi = at1_embed<ComplexField>(b, "interior");
      auto pc = at1_embed<ComplexField>(b);
      worst = std::max(worst, (at1_extract<ComplexField>(pi) - b).norm());
      worst = std::max(worst, (at1_extract<ComplexField>(pc) - b).norm());
    } else {
      const double th = rng.uniform(0, M_PI), t = rng.uniform(kCollarLo, kCollarHi);
      const Mat2d q = axis_projector(th);
      const Mat2d b = ((q + t * (Mat2d::Identity() - q)) / (1.0 + t)).eval();
      worst = std::max(worst, (at1_extract<RealField>(at1_embed<RealField>(b, "interior")) - b).norm());
      worst = std::max(worst, (at1_extract<RealField>(at1_embed<RealField>(b, "collar")) - b).norm());
    }
  }
  out.checks.push_back(check_below("charts/" + cfg.field + "/transition_consistency", worst, 1e-10));

  // blow-up exponent matrix of the lifted maps on G[2]:
  //   left projection (1,0,1,1); right projection (0,1,1,1); twisted
  //   product chi (1,1,2,0) on (tau1, tau2, s, x)
  auto family_slopes = [&](auto family) {
    std::vector<double> bdfv, chiv, lv, rv;
    for (int j = 6; j <= 20; ++j) {
      auto [th1, t1, th2, t2, lead] = family(double(j));
      bdfv.push_back(lead);
      if (cplx) {
        const Mat2<ComplexField> g = collar_elem(th1 / 2.0, th1, t1).cast<std::complex<double>>();
        const Mat2<ComplexField> h = collar_elem(0.1, th2, t2).cast<std::complex<double>>();
        chiv.push_back(boundary_param<ComplexField>(Mat2<ComplexField>(g * invert<ComplexField>(h))));
      } else {
        const Mat2d g = collar_elem(0.0, th1, t1), h = collar_elem(0.0, th2, t2);
        chiv.push_back(chi_lifted<RealField>(g2_lift<RealField>(g, h)).at.bdf.at("t"));
      }
      lv.push_back(t1);
      rv.push_back(t2);
    }
    return std::array<SlopeFit, 3>{loglog_slope(bdfv, chiv), loglog_slope(bdfv, lv),
                                   loglog_slope(bdfv, rv)};
  };
  struct Fam {
    const char* face;
    double chi_mu, piL_mu, piR_mu;
    std::function<std::tuple<double, double, double, double, double>(double)> fn;
  };
  const std::vector<Fam> fams = {
      {"tau1", 1, 1, 0,
       [](double j) {
         const double t2 = std::pow(2.0, -5.0), t1 = std::pow(2.0, -j) * t2;
         return std::tuple{0.9, t1, 0.0, t2, t1 / (t1 + t2)};
       }},
      {"tau2", 1, 0, 1,
       [](double j) {
         const double t1 = std::pow(2.0, -5.0), t2 = std::pow(2.0, -j) * t1;
         return std::tuple{0.9, t1, 0.0, t2, t2 / (t1 + t2)};
       }},
      {"s", 2, 1, 1,
       [](double j) {
         const double t1 = 0.7 * std::pow(2.0, -j), t2 = 0.3 * std::pow(2.0, -j);
         return std::tuple{0.9, t1, 0.0, t2, (t1 + t2) / std::hypot(std::sin(0.9), t1 + t2)};
       }},
      {"x", 0, 1, 1,
       [](double j) {
         const double t1 = 0.6 * std::pow(2.0, -j), t2 = 0.4 * std::pow(2.0, -j);
         const double dth = 0.5 * std::pow(2.0, -j);
         return std::tuple{dth, t1, 0.0, t2, std::hypot(std::sin(dth), t1 + t2)};
       }}};
  CsvTable mtab;
  mtab.name = "g2_exponent_rows_" + cfg.field;
  mtab.header = {"face", "chi_slope", "piL_slope", "piR_slope"};
  for (size_t fi = 0; fi < fams.size(); ++fi) {
    const auto& fam = fams[fi];
    auto [sc, sl, sr] = family_slopes(fam.fn);
    mtab.rows.push_back({double(fi), sc.slope, sl.slope, sr.slope});
    const std::string base = "blowup/" + cfg.field + "/" + fam.face;
    out.checks.push_back(check_close(base + "/chi", sc.slope, fam.chi_mu, 0.05));
    out.checks.push_back(check_close(base + "/piL", sl.slope, fam.piL_mu, 0.05));
    out.checks.push_back(check_close(base + "/piR", sr.slope, fam.piR_mu, 0.05));
    if (fam.chi_mu != 0.0)
      out.checks.push_back(check_flag(base + "/chi_r2", sc.r2 > 0.999));
  }
  out.tables.push_back(mtab);

  // beta and piP exponents on G[1;P] (real geometry; the collar is the real
  // slice in the complex case as well)
  {
    auto run = [&](auto fam) {
      std::vector<double> bdf, betav, p0, p1;
      for (int j = 6; j <= 20; ++j) {
        auto [t, s, lead] = fam(double(j));
        Mat2d beta;
        beta << t + s * s, s, s, 1.0;
        const Mat2d g = (beta / std::sqrt(t)).eval();
        bdf.push_back(lead);
        betav.push_back(boundary_param<RealField>(g));
        auto [k, dp] = piP(g);
        p0.push_back(dp.bdf.at("rho0"));
        p1.push_back(dp.bdf.at("rho1"));
      }
      return std::array<SlopeFit, 3>{loglog_slope(bdf, betav), loglog_slope(bdf, p0),
                                     loglog_slope(bdf, p1)};
    };
    auto s0 = run([](double j) {
      const double s = 0.05, eta = std::pow(2.0, -j);
      return std::tuple{eta * s * s, s, eta};
    });
    auto s1 = run([](double j) {
      const double u = 0.05, sig = std::pow(2.0, -j);
      return std::tuple{sig * u * u, sig * u, sig};
    });
    auto s2 = run([](double j) {
      const double eta = 0.5, s = std::pow(2.0, -j);
      return std::tuple{eta * s * s, s, s};
    });
    out.checks.push_back(check_close("blowup/beta_rho0", s0[0].slope, 1.0, 0.05));
    out.checks.push_back(check_close("blowup/beta_rho1", s1[0].slope, 1.0, 0.05));
    out.checks.push_back(check_close("blowup/beta_rho2", s2[0].slope, 2.0, 0.05));
    out.checks.push_back(check_flag("blowup/beta_r2", s0[0].r2 > 0.999 && s1[0].r2 > 0.999 &&
                                                          s2[0].r2 > 0.999));
    // realized piP rows (fixed front face: no rho2 factor; see ledger)
    out.checks.push_back(check_close("blowup/piP_rho0_on_rho0t", s0[1].slope, 1.0, 0.05));
    out.checks.push_back(check_close("blowup/piP_rho1_on_rho1t", s1[2].slope, 1.0, 0.05));
    out.checks.push_back(check_below("blowup/piP_rho1_on_rho2t", std::abs(s2[2].slope), 0.05,
                                     "face 2 is the fixed face of the fibration"));
  }

  // G[2] measure exponents
  {
    std::vector<double> bdf, val;
    for (int j = 4; j <= 16; ++j) {
      const double v = std::pow(2.0, -j);
      bdf.push_back(v);
      val.push_back(cplx ? g2_measure_cplx_corner(0.7, v, 0.2, -0.1)
                         : g2_measure_real("corner_c1", {0.3, 0.9, 0.7, 1.0, 0.0, v}));
    }
    auto f = loglog_slope(bdf, val);
    out.checks.push_back(
        check_close("blowup/" + cfg.field + "/measure_s", f.slope, -4.0 * kap, 0.05));
    out.checks.push_back(check_flag("blowup/" + cfg.field + "/measure_s_r2", f.r2 > 0.999));

    bdf.clear();
    val.clear();
    for (int j = 4; j <= 16; ++j) {
      const double u = std::pow(2.0, -j);
      bdf.push_back(u);
      val.push_back(cplx ? g2_measure_cplx_corner(u, std::pow(2.0, -5), 0.2, -0.1)
                         : g2_measure_real("corner_c1", {0.3, 0.9, u, 1.0, 0.0, std::pow(2.0, -5)}));
    }
    f = loglog_slope(bdf, val);
    out.checks.push_back(
        check_close("blowup/" + cfg.field + "/measure_tau1", f.slope, -2.0 * kap, 0.05));

    // x family
    bdf.clear();
    val.clear();
    if (cplx) {
      for (int j = 4; j <= 16; ++j) {
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
    } else {
      for (int j = 4; j <= 16; ++j) {
        const double v = std::pow(2.0, -j);
        bdf.push_back(v);
        val.push_back(g2_measure_real("diag_mid_c1", {0.3, 0.7, 1.0, 0.8, 0.5, v}));
      }
    }
    f = loglog_slope(bdf, val);
    out.checks.push_back(
        check_close("blowup/" + cfg.field + "/measure_x", f.slope, -2.0 * kap, 0.05));
  }

  // unipotent generating field: formula vs finite differences; lifted
  // degeneracy orders (1,2) in (rho1, rho2) of the chart components
  {
    double worst_fd = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double t = 1e-3 + 0.08 * i / 19.0, s = -0.15 + 0.3 * j / 19.0;
        worst_fd = std::max(worst_fd, (vfield_N(t, s) - unipotent_flow_fd(t, s)).norm());
      }
    out.checks.push_back(check_below("vfield/fd_agreement", worst_fd, 1e-8, "20x20 (t,s) grid"));

    std::vector<double> bdf, val;
    for (int j = 6; j <= 18; ++j) {
      const double s = std::pow(2.0, -j), t = 0.5 * s * s;
      const Eigen::Vector3d V = vfield_N(t, s);
      const double Veta = V(0) / (s * s) - 2.0 * t * V(1) / (s * s * s);
      bdf.push_back(s);
      val.push_back(std::sqrt(Veta * Veta + V(1) * V(1) + V(2) * V(2)));
    }
    auto f2 = loglog_slope(bdf, val);
    out.checks.push_back(check_close("vfield/degeneracy_rho2", f2.slope, 2.0, 0.1));
    bdf.clear();
    val.clear();
    for (int j = 6; j <= 18; ++j) {
      const double sig = std::pow(2.0, -j), u = 0.05;
      const double t = sig * u * u, s = sig * u;
      const Eigen::Vector3d V = vfield_N(t, s);
      const double Vsig = 2.0 * s * V(1) / t - s * s * V(0) / (t * t);
      const double Vu = V(0) / s - t * V(1) / (s * s);
      bdf.push_back(sig);
      val.push_back(std::sqrt(Vsig * Vsig + Vu * Vu + V(2) * V(2)));
    }
    auto f1 = loglog_slope(bdf, val);
    out.checks.push_back(check_close("vfield/degeneracy_rho1", f1.slope, 1.0, 0.1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// convolve: closure on G (real), approximate identity, associativity, GL toy

CampaignOutput convolve_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  QuadratureSpec q;
  q.angular = cfg.angular;
  q.boundary_levels = 26;
  q.panel_order = 4;

  // The GL_+ toy suite runs for both fields (the compactified half line has
  // no field dependence)
  out.checks.push_back(check_close("glplus/compactify_at_1", glplus_compactify(1.0), 0.5, 0.0,
                                   "exact: (2/pi) arctan 1"));
  {
    auto mk = [](double width) {
      GLFunc f;
      f.cert = HypersurfaceWeight{0.0, 0.0, true, false};
      f.f = [=](double tau) {
        const double y = std::log(tau);
        return std::exp(-y * y / (2.0 * width));
      };
      return f;
    };
    GLFunc f1 = mk(3.0), f2 = mk(2.0);
    Axis lv = Axis::boundary("rho0", 6.0, 26.0, 1.0);
    GridFunction low = glplus_convolve(f1, f2, q, lv, false);
    GridFunction high = glplus_convolve(f1, f2, q, lv, true);
    auto rl = decay_scan(low, WeightSpec::hc("rho0", 0.0), 1);
    WeightSpec sup_spec;
    sup_spec.faces["rho0"] = HypersurfaceWeight{0.0, 0.0, true, false};
    auto rh = decay_scan(high, sup_spec, 1);
    out.checks.push_back(check_flag("glplus/convolve_log_rapid_low_end", rl.verdict));
    out.checks.push_back(check_flag("glplus/convolve_log_rapid_high_end", rh.verdict));

    // b-fibration exponents: pi_L slope 1 at each front face, chi constant
    std::vector<double> bdf, pl00, pl11, ch;
    for (int j = 6; j <= 20; ++j) {
      const double e = std::pow(2.0, -j);
      bdf.push_back(glplus2_lift(0.7 * e, 0.3 * e).bdf.at("ff00"));
      pl00.push_back(0.7 * e);
      pl11.push_back(1.0 / (0.7 / e));
      ch.push_back(0.7 / 0.3);
    }
    out.checks.push_back(check_close("glplus/piL_ff00", loglog_slope(bdf, pl00).slope, 1.0, 0.05));
    out.checks.push_back(check_close("glplus/piL_ff11", loglog_slope(bdf, pl11).slope, 1.0, 0.05));
    out.checks.push_back(
        check_below("glplus/chi_fixed_faces", std::abs(loglog_slope(bdf, ch).slope), 0.05));
  }

  if (cfg.field != "real") {
    out.checks.push_back(check_flag(
        "convolve/complex_scope", true,
        "group convolution quadrature is real-only; complex runs the GL_+ suite"));
    return out;
  }

  GFunc f1 = hc_test_member(RealField::kappa, 4, 0.4, 0.2, 0.0);
  GFunc f2 = hc_test_member(RealField::kappa, 4, -0.2, 0.3, 0.0);

  // closure: decay scan of f1 * f2 passes power kappa with log order >= 3
  {
    Axis th = Axis::angular("theta", 8, M_PI);
    Axis lvax = Axis::boundary("t", 5.0, 19.0, 0.5);
    GridFunction conv = convolve_G(f1, f2, q, th, lvax);
    WeightSpec spec = WeightSpec().with("t", RealField::kappa, 3.0);
    auto rep = decay_scan(conv, spec, 1);
    out.checks.push_back(check_flag("convolve/closure_scan", rep.verdict));
    double logord = 1e300, power = 0.0;
    for (auto& row : rep.rows)
      if (row.word == "id") {
        logord = row.fitted_log_order;
        power = row.fitted_power;
      }
    out.checks.push_back(check_close("convolve/closure_power", power, RealField::kappa, 0.05));
    out.checks.push_back(check_flag("convolve/closure_log_order", logord >= 3.0,
                                    "fitted=" + std::to_string(logord)));
    CsvTable tab;
    tab.name = "convolution_levels";
    tab.header = {"j", "sup"};
    for (auto& row : rep.rows)
      if (row.word == "id") {
        for (size_t i = 0; i < row.levels.size(); ++i) tab.rows.push_back({row.levels[i], row.sup[i]});
        break;
      }
    out.tables.push_back(tab);
  }

  // approximate identity ladder
  {
    const Mat2d probe = collar_elem(0.0, 0.6, 0.2);
    double prev = 1e300;
    bool monotone = true;
    for (double eps : {0.4, 0.2, 0.1}) {
      GFunc bump = bump_at_identity(eps, q);
      const double err = std::abs(convolve_eval(f1, bump, probe, q) - f1.f(probe));
      monotone = monotone && err < prev;
      prev = err;
    }
    out.checks.push_back(check_flag("convolve/approx_identity_ladder", monotone,
                                    "3 eps-levels strictly decreasing"));
  }

  // associativity at probes, against the refinement estimate
  {
    QuadratureSpec qs;
    qs.angular = 24;
    qs.boundary_levels = 14;
    qs.panel_order = 2;
    GFunc f3 = hc_gaussian_member(RealField::kappa, 6.0, 0.1, -0.2, 0.0);
    GFunc g12, g23;
    g12.cert = f1.cert;
    g12.f = [&, qs](const Mat2d& g) { return convolve_eval(f1, f2, g, qs); };
    g23.cert = f2.cert;
    g23.f = [&, qs](const Mat2d& g) { return convolve_eval(f2, f3, g, qs); };
    const Mat2d probe = collar_elem(0.3, 0.8, 0.3);
    const double lhs = convolve_eval(g12, f3, probe, qs);
    const double rhs = convolve_eval(f1, g23, probe, qs);
    // refinement estimate from the single-convolution level
    QuadratureSpec qr = qs.refined();
    const double v1 = convolve_eval(f1, f2, probe, qs), v1r = convolve_eval(f1, f2, probe, qr);
    const double est = std::abs(v1r - v1) + 1e-4 * std::abs(lhs);
    out.checks.push_back(check_below("convolve/associativity_defect", std::abs(lhs - rhs),
                                     5.0 * est, "vs refinement estimate"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// average + module actions

CampaignOutput average_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  if (cfg.field != "real") {
    out.checks.push_back(
        check_flag("average/complex_scope", true, "unipotent machinery is real-only"));
    return out;
  }
  QuadratureSpec q;
  q.angular = 32;
  q.boundary_levels = 22;
  q.panel_order = 4;

  GFunc f = hc_test_member(RealField::kappa, 4, 0.4, 0.2, 0.3);
  GNFunc av = average_N(f, q);

  // endpoint exponents +-kappa
  std::vector<double> js, v0, v1;
  CsvTable tab;
  tab.name = "average_endpoints";
  tab.header = {"j", "value_rho0_end", "value_rho1_end"};
  for (int j = 6; j <= 20; ++j) {
    js.push_back(double(j));
    v0.push_back(av.f(0.2, std::pow(2.0, j)));
    v1.push_back(av.f(0.2, std::pow(2.0, -j)));
    tab.rows.push_back({double(j), v0.back(), v1.back()});
  }
  out.tables.push_back(tab);
  const auto f0 = fit_power_log(js, v0);
  const auto f1 = fit_power_log(js, v1);
  out.checks.push_back(check_close("average/rho0_exponent", f0.power, RealField::kappa, 0.05));
  out.checks.push_back(check_close("average/rho1_exponent", f1.power, -RealField::kappa, 0.05));

  // module actions
  GNFunc u = gn_test_member(RealField::kappa, 6.0);
  {
    QuadratureSpec qc = q;
    qc.boundary_levels = 20;
    bool ok = true;
    std::string det;
    for (auto [th, d] : std::vector<std::pair<double, double>>{{0.3, 1.0}, {1.2, 0.2}, {2.5, 4.0}}) {
      const double direct = act_on_GN_eval(f, u, th, d, qc);
      const double kernel = act_on_GN_kernel_eval(f, u, th, d, qc);
      QuadratureSpec qr = qc.refined();
      const double direct_r = act_on_GN_eval(f, u, th, d, qr);
      const double kernel_r = act_on_GN_kernel_eval(f, u, th, d, qr);
      const double est =
          std::abs(direct_r - direct) + std::abs(kernel_r - kernel) + 1e-4 * std::abs(kernel_r);
      ok = ok && std::abs(kernel_r - direct_r) < 5.0 * est;
    }
    out.checks.push_back(check_flag("module/dual_route_agreement", ok, det));
  }

  // outputs pass the HC(G/N) weight at both ends
  auto scan_gn = [&](const GNFunc& w, const std::string& name) {
    Axis th = Axis::angular("theta", 8, 2 * M_PI);
    Axis l1 = Axis::boundary("rho1", 5.0, 17.0, 1.0);
    GridFunction grid1 = GridFunction::sample({th, l1}, [&](const std::vector<double>& c) {
      return w.f(c[0], std::pow(2.0, -c[1]));
    });
    WeightSpec s1;
    s1.faces["rho1"] = HypersurfaceWeight{-RealField::kappa, 0.0, false, false};
    auto r1 = decay_scan(grid1, s1, 1);
    Axis l0 = Axis::boundary("rho0", 5.0, 17.0, 1.0);
    GridFunction grid0 = GridFunction::sample({th, l0}, [&](const std::vector<double>& c) {
      return w.f(c[0], std::pow(2.0, c[1]));
    });
    WeightSpec s0;
    s0.faces["rho0"] = HypersurfaceWeight{RealField::kappa, 0.0, false, false};
    auto r0 = decay_scan(grid0, s0, 1);
    out.checks.push_back(check_flag(name + "_rho1_spec", r1.verdict));
    out.checks.push_back(check_flag(name + "_rho0_spec", r0.verdict));
  };
  {
    QuadratureSpec qa = q;
    qa.angular = 16;
    qa.boundary_levels = 22;
    GNFunc fu = act_on_GN(f, u, qa);
    scan_gn(fu, "module/act_on_GN");
    DFunc v = d_test_member(2.0, 0.2);
    scan_gn(act_D(u, v, qa), "module/act_D");
    LFunc psi;
    psi.plus = d_test_member(2.0, 0.0);
    psi.minus = d_test_member(3.0, 0.4);
    scan_gn(act_L(u, psi, qa), "module/act_L");
  }

  // commuting square: average_N (f0 * .) = act_on_GN(f0) average_N at probes
  {
    GFunc f0 = hc_gaussian_member(RealField::kappa, 6.0, 0.2, 0.1, 0.2);
    GFunc fg = hc_gaussian_member(RealField::kappa, 8.0, 0.3, -0.1, 0.0);
    GNFunc avg = average_N(fg, q);
    GFunc conv;
    conv.cert = fg.cert;
    QuadratureSpec qs;
    qs.angular = 24;
    qs.boundary_levels = 16;
    qs.panel_order = 2;
    conv.f = [&, qs](const Mat2d& g) { return convolve_eval(f0, fg, g, qs); };
    const double lhs = average_N_eval(conv, 0.4, 1.5, 30, 4);
    const double rhs = act_on_GN_kernel_eval(f0, avg, 0.4, 1.5, qs);
    out.checks.push_back(check_close("module/commuting_square", lhs, rhs,
                                     0.02 * std::abs(rhs) + 1e-6, "quadrature tolerance"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// intertwine

CampaignOutput intertwine_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  if (cfg.field != "real") {
    out.checks.push_back(
        check_flag("intertwine/complex_scope", true, "intertwining kernels are real-only"));
    return out;
  }
  GNFunc u = gn_test_member(RealField::kappa, 6.0, 1.0, 0.0, 0.4);

  // null class of the leading kernel
  GNFunc odd = gn_test_member(RealField::kappa, 6.0, 0.0, 1.0, 0.0);
  double worst = 0.0;
  for (double th : {0.0, 0.7, 2.2})
    worst = std::max(worst, std::abs(intertwine_leading(odd, ParabolicSign::Plus, th, 60, 8)));
  out.checks.push_back(check_below("intertwine/null_class", worst, 1e-10,
                                   "first-harmonic inputs annihilate the leading kernel"));

  // kernel vs its high-resolution quadrature oracle
  const double th0 = 0.5;
  const double K = intertwine_leading(u, ParabolicSign::Plus, th0, 60, 8);
  const double K2 = intertwine_leading(u, ParabolicSign::Plus, th0, 96, 12);
  out.checks.push_back(check_close("intertwine/kernel_oracle", K, K2, 1e-6 * std::abs(K2)));

  // delta^{-1/2} J f converges to K with monotonically decreasing error
  std::vector<double> errs;
  CsvTable tab;
  tab.name = "intertwine_ladder";
  tab.header = {"j", "scaled_J", "err"};
  for (int j = 4; j <= 12; j += 2) {
    const double a = std::pow(2.0, j);
    const double J = intertwine_eval(u, ParabolicSign::Plus, th0, a * a, 70, 8);
    errs.push_back(std::abs(a * J - K));
    tab.rows.push_back({double(j), a * J, errs.back()});
  }
  out.tables.push_back(tab);
  bool monotone = true;
  for (size_t i = errs.size() - 4; i < errs.size(); ++i)
    if (i > 0) monotone = monotone && errs[i] < errs[i - 1];
  out.checks.push_back(check_flag("intertwine/boundary_limit_monotone", monotone,
                                  "error decreasing over the last 4 levels"));

  // HC remainder after subtracting the extended leading part
  {
    QuadratureSpec q;
    q.boundary_levels = 24;
    q.panel_order = 8;
    Axis th = Axis::angular("theta", 8, 2 * M_PI);
    Axis l0 = Axis::boundary("rho0", 3.0, 13.0, 0.5);
    GridFunction rem = GridFunction::sample({th, l0}, [&](const std::vector<double>& c) {
      const double a = std::pow(2.0, c[1] / 2.0);  // rho0 ~ a^{-2} = 2^{-j}
      const double J = intertwine_eval(u, ParabolicSign::Plus, c[0], a * a, 60, 8);
      const double lead = intertwine_leading(u, ParabolicSign::Plus, c[0], 60, 8);
      return J - lead / a;
    });
    WeightSpec s;
    s.faces["rho0"] = HypersurfaceWeight{RealField::kappa, 0.0, false, false};
    auto r = decay_scan(rem, s, 0);
    out.checks.push_back(check_flag("intertwine/hc_remainder", r.verdict,
                                    "J - delta^{1/2} K decays like rho0^kappa"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// decay: conormal engine self-tests

CampaignOutput decay_impl(const CampaignConfig& cfg) {
  CampaignOutput out;
  (void)cfg;

  // ilog weight identity
  {
    Axis ax = Axis::boundary("t", 16.0, 48.0, 1.0);
    GridFunction u = GridFunction::sample(
        {ax}, [](const std::vector<double>& c) { return ilog(std::pow(2.0, -c[0])); });
    GridFunction du = b_derivative(u, {0}, 6);
    double worst = 0.0;
    for (size_t i = 4; i + 4 < u.size(); ++i)
      worst = std::max(worst, std::abs(du.values[i] - u.values[i] * u.values[i]));
    out.checks.push_back(check_below("conormal/ilog_weight_identity", worst, 1e-8));
  }

  // test operator annihilation of polynomials
  {
    Axis ax = Axis::boundary("t", 4.0, 16.0, 1.0 / 16.0);
    GridFunction u = GridFunction::sample({ax}, [](const std::vector<double>& c) {
      const double t = std::pow(2.0, -c[0]);
      return 2.0 + t + 0.5 * t * t - t * t * t;
    });
    GridFunction Tu = test_operator(u, 3, 0, 10);
    double worst = 0.0;
    for (size_t i = 6; i + 6 < Tu.size(); ++i) worst = std::max(worst, std::abs(Tu.values[i]));
    out.checks.push_back(check_below("conormal/test_operator_annihilation", worst, 1e-8));
  }

  // classification of the 12-member closed-form library
  {
    Axis th = Axis::angular("theta", 16);
    Axis ax = Axis::boundary("t", 6.0, 24.0, 0.5);
    const double kap = cfg.field == "complex" ? ComplexField::kappa : RealField::kappa;
    using Member = std::pair<std::function<double(double, double)>, bool>;  // f(theta, t), expected
    const WeightSpec hc = WeightSpec::hc("t", kap);
    WeightSpec pow_only;
    pow_only.with("t", kap);
    struct Case {
      std::function<double(double, double)> f;
      const WeightSpec* spec;
      bool expect;
    };
    WeightSpec log3 = WeightSpec().with("t", kap, 3.0);
    std::vector<Case> cases = {
        {[=](double, double t) { return std::pow(t, kap); }, &pow_only, true},
        {[=](double th_, double t) { return std::pow(t, kap) * (1 + 0.3 * std::sin(th_)); },
         &pow_only, true},
        {[=](double, double t) { return std::pow(t, kap) * ilog(t / 2); }, &pow_only, true},
        {[=](double, double t) { return std::pow(t, kap + 0.1); }, &hc, true},
        {[=](double, double t) {
           return std::pow(t, kap) * std::exp(-std::sqrt(std::log(1.0 / t)));
         },
         &hc, true},
        {[=](double, double t) {
           const double lg = std::log(t);
           return std::pow(t, kap) * std::exp(-lg * lg / 16.0);
         },
         &hc, true},
        {[=](double, double t) { return std::pow(t, kap) * std::pow(ilog(t / 2), 4); }, &log3,
         true},
        {[=](double, double t) { return std::pow(t, kap) * std::pow(ilog(t / 2), 3); }, &hc,
         false},
        {[=](double, double t) { return std::pow(t, kap - 0.2); }, &pow_only, false},
        {[=](double, double t) { return std::pow(t, kap) / ilog(t / 2); }, &pow_only, false},
        {[=](double, double t) { return std::pow(t, kap) * ilog(t / 2); }, &log3, false},
        {[=](double, double t) { return std::pow(t, kap - 0.3) * std::pow(ilog(t / 2), 6); }, &hc,
         false},
    };
    int wrong = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
      GridFunction u = GridFunction::sample({th, ax}, [&](const std::vector<double>& c) {
        return cases[i].f(c[0], std::pow(2.0, -c[1]));
      });
      const auto rep = decay_scan(u, *cases[i].spec, 2);
      if (rep.verdict != cases[i].expect) ++wrong;
    }
    out.checks.push_back(check_flag("conormal/library_classification", wrong == 0,
                                    std::to_string(wrong) + " misclassifications of 12"));
  }

  // chi pull-back of an HC member reproduces the (kappa, 2 kappa, kappa)
  // pattern on (tau1, s, tau2) with log-rapid decay at the non-fixed faces
  if (cfg.field == "real") {
    GFunc f = hc_gaussian_member(RealField::kappa, 10.0, 0.2, 0.1, 0.0);
    struct FamilyCase {
      const char* face;
      double expect;
      std::function<std::pair<Mat2d, Mat2d>(double)> fn;
    };
    std::vector<FamilyCase> fams = {
        {"tau1", RealField::kappa,
         [](double j) {
           return std::make_pair(collar_elem(0, 0.9, std::pow(2.0, -j - 5)),
                                 collar_elem(0, 0.0, std::pow(2.0, -5.0)));
         }},
        {"tau2", RealField::kappa,
         [](double j) {
           return std::make_pair(collar_elem(0, 0.9, std::pow(2.0, -5.0)),
                                 collar_elem(0, 0.0, std::pow(2.0, -j - 5)));
         }},
        {"s", 2.0 * RealField::kappa,
         [](double j) {
           return std::make_pair(collar_elem(0, 0.9, 0.7 * std::pow(2.0, -j)),
                                 collar_elem(0, 0.0, 0.3 * std::pow(2.0, -j)));
         }},
    };
    for (auto& fam : fams) {
      std::vector<double> js, vals;
      for (int j = 6; j <= 20; ++j) {
        auto [g, h] = fam.fn(double(j));
        js.push_back(double(j));
        vals.push_back(f.f(g * invert<RealField>(h)));
      }
      const auto fit = fit_power_log(js, vals);
      // Gaussian log decay rides on the power; the windowed secant bounds it
      double secant = 1e300;
      for (size_t i = js.size() - 6; i < js.size(); ++i)
        secant = std::min(secant, (std::log2(vals[i - 1]) - std::log2(vals[i])));
      out.checks.push_back(check_flag(std::string("conormal/chi_pullback_") + fam.face,
                                      secant >= fam.expect - 0.05,
                                      "decay at least the declared exponent"));
    }
  }
  return out;
}

}  // namespace

void CampaignConfig::validate() const {
  if (field != "real" && field != "complex")
    throw std::invalid_argument("config: field must be real or complex");
  static const std::vector<std::string> names = {"decompose", "charts",  "haar",
                                                 "spherical", "convolve", "average",
                                                 "intertwine", "decay",   "all"};
  bool ok = false;
  for (auto& n : names) ok = ok || n == campaign;
  if (!ok) throw std::invalid_argument("config: unknown campaign " + campaign);
  if (!(level_lo < level_hi)) throw std::invalid_argument("config: need level_lo < level_hi");
  if (angular < 8) throw std::invalid_argument("config: angular must be >= 8");
  if (!(tolerance > 0)) throw std::invalid_argument("config: tolerance must be positive");
}

CampaignOutput campaign_decompose(const CampaignConfig& c) { return decompose_impl(c); }
CampaignOutput campaign_charts(const CampaignConfig& c) { return charts_impl(c); }
CampaignOutput campaign_haar(const CampaignConfig& c) { return haar_impl(c); }
CampaignOutput campaign_spherical(const CampaignConfig& c) { return spherical_impl(c); }
CampaignOutput campaign_convolve(const CampaignConfig& c) { return convolve_impl(c); }
CampaignOutput campaign_average(const CampaignConfig& c) { return average_impl(c); }
CampaignOutput campaign_intertwine(const CampaignConfig& c) { return intertwine_impl(c); }
CampaignOutput campaign_decay(const CampaignConfig& c) { return decay_impl(c); }

CampaignOutput run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  CampaignOutput out;
  auto merge = [&](CampaignOutput o) {
    for (auto& c : o.checks) out.checks.push_back(std::move(c));
    for (auto& t : o.tables) out.tables.push_back(std::move(t));
  };
  const std::string& c = cfg.campaign;
  if (c == "decompose" || c == "all") merge(campaign_decompose(cfg));
  if (c == "charts" || c == "all") merge(campaign_charts(cfg));
  if (c == "haar" || c == "all") merge(campaign_haar(cfg));
  if (c == "spherical" || c == "all") merge(campaign_spherical(cfg));
  if (c == "convolve" || c == "all") merge(campaign_convolve(cfg));
  if (c == "average" || c == "all") merge(campaign_average(cfg));
  if (c == "intertwine" || c == "all") merge(campaign_intertwine(cfg));
  if (c == "decay" || c == "all") merge(campaign_decay(cfg));
  return out;
}

}  // namespace sl2c
