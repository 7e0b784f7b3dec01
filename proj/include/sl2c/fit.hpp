#pragma once

// Least-squares fits shared by the exponent-regression checks: log-log
// slopes, power + log-order fits, and the two-basis boundary fit
// {t^mu, t^mu log(1/t)} for the spherical function.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sl2c {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

/// OLS of y against x.  r2 is reported as 1 when y is (numerically)
/// constant, so that a clean zero slope is not flagged as a bad fit.
inline SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  if (n < 2 || y.size() != x.size()) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double ss_res = (A * c - b).squaredNorm();
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  SlopeFit f;
  f.slope = c(0);
  f.intercept = c(1);
  f.r2 = (ss_tot <= 1e-24 * std::max(1.0, mean * mean) || ss_res <= 1e-20 * ss_tot)
             ? 1.0
             : 1.0 - ss_res / ss_tot;
  return f;
}

/// Slope of log2(value) against log2(bdf) along a one-parameter family.
inline SlopeFit loglog_slope(const std::vector<double>& bdf, const std::vector<double>& value) {
  std::vector<double> x(bdf.size()), y(value.size());
  for (size_t i = 0; i < bdf.size(); ++i) {
    if (!(bdf[i] > 0) || !(value[i] > 0))
      throw std::domain_error("loglog_slope: values and defining functions must be positive");
    x[i] = std::log2(bdf[i]);
    y[i] = std::log2(value[i]);
  }
  return fit_line(x, y);
}

struct PowerLogFit {
  double power = 0.0;      // v ~ t^power ...
  double log_order = 0.0;  // ... * log(1/t)^{-log_order}
  double r2 = 1.0;
};

/// Fit v_j ~ C * t_j^p * (log 1/t_j)^{-q} on levels t_j = 2^{-j}.  Over a
/// dyadic window j and log2 j are nearly collinear, so a free joint fit
/// trades power against log order; instead the log order runs over a
/// half-integer grid and p is fit conditionally, keeping the power estimate
/// well posed.
inline PowerLogFit fit_power_log(const std::vector<double>& j, const std::vector<double>& v,
                                 double q_min = -8.0, double q_max = 16.0) {
  const int n = int(j.size());
  if (n < 4) throw std::invalid_argument("fit_power_log: need >= 4 levels");
  std::vector<double> lv(n);
  for (int i = 0; i < n; ++i) {
    if (!(v[i] > 0)) throw std::domain_error("fit_power_log: values must be positive");
    lv[i] = std::log2(v[i]);
  }
  double mean = 0.0;
  for (double y : lv) mean += y;
  mean /= n;
  double ss_tot = 0.0;
  for (double y : lv) ss_tot += (y - mean) * (y - mean);

  PowerLogFit best;
  double best_ss = std::numeric_limits<double>::infinity();
  for (double q = q_min; q <= q_max + 1e-9; q += 0.5) {
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = -j[i];
      y[i] = lv[i] + q * std::log2(j[i]);
    }
    const SlopeFit line = fit_line(x, y);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - (line.slope * x[i] + line.intercept);
      ss += r * r;
    }
    if (ss < best_ss) {
      best_ss = ss;
      best.power = line.slope;
      best.log_order = q;
    }
  }
  best.r2 = (ss_tot <= 1e-24 || best_ss <= 1e-20 * ss_tot) ? 1.0 : 1.0 - best_ss / ss_tot;
  return best;
}

struct AsymFit {
  double a = 0.0;        // coefficient of t^mu
  double b = 0.0;        // coefficient of t^mu log(1/t)
  double mu = 0.0;       // exponent used for the basis
  double residual = 0.0; // relative sup-norm of the fit error
};

/// Least squares of values against {t^mu, t^mu log(1/t)}.
inline AsymFit asym_fit(const std::vector<double>& t_levels, const std::vector<double>& values,
                        double mu) {
  const int n = int(t_levels.size());
  if (n < 4 || values.size() != t_levels.size())
    throw std::invalid_argument("asym_fit: need >= 4 levels");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double tm = std::pow(t_levels[i], mu);
    A(i, 0) = tm;
    A(i, 1) = tm * std::log(1.0 / t_levels[i]);
    b(i) = values[i];
  }
  Eigen::Matrix2d N = A.transpose() * A;
  if (std::abs(N.determinant()) < 1e-14 * N.squaredNorm())
    throw std::domain_error("asym_fit: degenerate levels, singular normal equations");
  AsymFit f;
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  f.a = c(0);
  f.b = c(1);
  f.mu = mu;
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    r = std::max(r, std::abs((A.row(i) * c)(0) - values[i]) / std::abs(values[i]));
  f.residual = r;
  return f;
}

/// Pairwise (cascade) summation: deterministic reduction order with
/// O(log n) error growth; used by all quadrature accumulators.
inline double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> acc(v);
  size_t n = acc.size();
  while (n > 1) {
    size_t m = (n + 1) / 2;
    for (size_t i = 0; i < n / 2; ++i) acc[i] = acc[2 * i] + acc[2 * i + 1];
    if (n % 2) acc[n / 2] = acc[n - 1];
    n = m;
  }
  return acc[0];
}

}  // namespace sl2c
