#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "sl2c/matgroup.hpp"
#include "sl2c/rng.hpp"

using namespace sl2c;

namespace {

// Independent oracle: positive square root of g^* g through Eigen's
// self-adjoint eigensolver.  Kept separate from the closed form used by
// polar_decompose.
template <class F>
Mat2<F> eigen_sqrt_oracle(const Mat2<F>& g) {
  Eigen::SelfAdjointEigenSolver<Mat2<F>> es(g.adjoint() * g);
  Mat2<F> d = Mat2<F>::Zero();
  d(0, 0) = typename F::Scalar(std::sqrt(es.eigenvalues()(0)));
  d(1, 1) = typename F::Scalar(std::sqrt(es.eigenvalues()(1)));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("multiply and invert basics") {
  Mat2d id = Mat2d::Identity();
  Mat2d g = unipotent_upper(1.5);
  CHECK((multiply<RealField>(id, g) - g).norm() == 0.0);
  CHECK((multiply<RealField>(g, invert<RealField>(g)) - id).norm() < 1e-15);
  CHECK((multiply<RealField>(unipotent_upper(1), unipotent_upper(2)) - unipotent_upper(3)).norm() <
        1e-15);

  Mat2d d = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  CHECK((invert<RealField>(d) - Mat2d(Eigen::Vector2d(0.5, 2.0).asDiagonal())).norm() == 0.0);
  CHECK((invert<RealField>(unipotent_upper(0.7)) - unipotent_upper(-0.7)).norm() == 0.0);

  // invert is involutive exactly (adjugate of a det-1 matrix)
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    Mat2d r = rng.group_element<RealField>();
    CHECK((invert<RealField>(invert<RealField>(r)) - r).norm() == 0.0);
  }
}

TEST_CASE("field mismatch and invalid input are rejected") {
  Mat2d g;
  g << 1, 1, 1, 1;  // det 0
  CHECK_THROWS_AS(polar_decompose<RealField>(g), std::invalid_argument);
  Mat2d inf = Mat2d::Identity() * std::numeric_limits<double>::infinity();
  CHECK_THROWS(polar_decompose<RealField>(inf));
}

TEST_CASE("polar decomposition closed values") {
  // identity and already-positive inputs
  auto p = polar_decompose<RealField>(Mat2d::Identity());
  CHECK((p.k - Mat2d::Identity()).norm() < 1e-15);
  CHECK((p.a - Mat2d::Identity()).norm() < 1e-15);

  Mat2d d = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  p = polar_decompose<RealField>(d);
  CHECK((p.k - Mat2d::Identity()).norm() < 1e-14);
  CHECK((p.a - d).norm() < 1e-14);

  // polar of n(1), values checked against the eigen square-root oracle:
  // a = (1/sqrt5)[[2,1],[1,3]], k = (1/sqrt5)[[2,1],[-1,2]]
  Mat2d n1 = unipotent_upper(1.0);
  p = polar_decompose<RealField>(n1);
  Mat2d a_ref, k_ref;
  a_ref << 2, 1, 1, 3;
  k_ref << 2, 1, -1, 2;
  a_ref /= std::sqrt(5.0);
  k_ref /= std::sqrt(5.0);
  CHECK((p.a - a_ref).norm() < 1e-14);
  CHECK((p.k - k_ref).norm() < 1e-14);
  CHECK((p.a - eigen_sqrt_oracle<RealField>(n1)).norm() < 1e-14);
}

TEST_CASE("polar round trip on random elements, both fields") {
  Rng rng(42);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    Mat2d g = rng.group_element<RealField>();
    auto p = polar_decompose<RealField>(g);
    worst = std::max(worst, (p.k * p.a - g).template lpNorm<Eigen::Infinity>());
    // k orthogonal, a symmetric positive
    CHECK((p.k.transpose() * p.k - Mat2d::Identity()).norm() < 1e-12);
  }
  CHECK(worst < 1e-12);

  double worst_c = 0;
  for (int i = 0; i < 10000; ++i) {
    Mat2<ComplexField> g = rng.group_element<ComplexField>();
    auto p = polar_decompose<ComplexField>(g);
    worst_c = std::max(worst_c, (p.k * p.a - g).template lpNorm<Eigen::Infinity>());
    CHECK((p.a - p.a.adjoint()).norm() < 1e-12);
  }
  CHECK(worst_c < 1e-12);
}

TEST_CASE("unipotent-flow closed form") {
  // (tau=1, x=0) -> identity factors
  auto p = polar_unipotent_closed_form<RealField>(1.0, 0.0);
  CHECK((p.a - Mat2d::Identity()).norm() < 1e-15);
  CHECK((p.k - Mat2d::Identity()).norm() < 1e-15);

  // direct substitution at tau=1, x=1: a = (1/sqrt5)[[2,-1],[-1,3]],
  // (c, s) = (2/sqrt5, -1/sqrt5)
  p = polar_unipotent_closed_form<RealField>(1.0, 1.0);
  Mat2d a_ref;
  a_ref << 2, -1, -1, 3;
  a_ref /= std::sqrt(5.0);
  CHECK((p.a - a_ref).norm() < 1e-14);
  CHECK(p.k(0, 0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(p.k(0, 1) == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-14));

  CHECK_THROWS_AS(polar_unipotent_closed_form<RealField>(-1.0, 0.0), std::invalid_argument);

  // generic-path oracle on a 20x20 grid: closed form == polar_decompose of
  // diag(tau^{1/2}, tau^{-1/2}) n(-x)
  double worst = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double tau = 0.1 + 4.9 * i / 19.0;
      const double x = -5.0 + 10.0 * j / 19.0;
      Mat2d g = diag_split<RealField>(tau) * unipotent_upper(-x);
      auto generic = polar_decompose<RealField>(g);
      auto closed = polar_unipotent_closed_form<RealField>(tau, x);
      worst = std::max(worst, (generic.a - closed.a).template lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (generic.k - closed.k).template lpNorm<Eigen::Infinity>());
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("iwasawa decomposition") {
  // already-factored input
  const double d = 3.7, x = -0.9;
  Mat2d g = diag_split<RealField>(d) * unipotent_upper(x);
  auto w = iwasawa<RealField>(g, ParabolicSign::Plus);
  CHECK((w.k - Mat2d::Identity()).norm() < 1e-14);
  CHECK(w.d == doctest::Approx(d).epsilon(1e-13));
  CHECK(re(w.n) == doctest::Approx(x).epsilon(1e-13));

  // compact input: (k, 1, 0)
  w = iwasawa<RealField>(rotation(0.8), ParabolicSign::Plus);
  CHECK(w.d == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(re(w.n)) < 1e-14);

  // recomposition residual over 1e4 random elements, both signs, both fields
  Rng rng(5);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    Mat2d r = rng.group_element<RealField>();
    for (auto s : {ParabolicSign::Plus, ParabolicSign::Minus}) {
      auto wi = iwasawa<RealField>(r, s);
      worst = std::max(worst, (recompose<RealField>(wi) - r).template lpNorm<Eigen::Infinity>());
      CHECK(wi.d > 0);
    }
  }
  CHECK(worst < 1e-12);
  for (int i = 0; i < 10000; ++i) {
    Mat2<ComplexField> r = rng.group_element<ComplexField>();
    for (auto s : {ParabolicSign::Plus, ParabolicSign::Minus}) {
      auto wi = iwasawa<ComplexField>(r, s);
      worst = std::max(worst, (recompose<ComplexField>(wi) - r).template lpNorm<Eigen::Infinity>());
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("pseudocharacter") {
  // paper normalization: delta(diag(tau^{-1/2}, tau^{1/2})) = 1/tau
  const double tau = 4.0;
  Mat2d g = Mat2d::Zero();
  g(0, 0) = 1.0 / std::sqrt(tau);
  g(1, 1) = std::sqrt(tau);
  CHECK(pseudocharacter<RealField>(g) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK(pseudocharacter<RealField>(rotation(1.1)) == doctest::Approx(1.0).epsilon(1e-14));

  // right N_+-invariance
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Mat2d r = rng.group_element<RealField>();
    const double base = pseudocharacter<RealField>(r);
    const double shifted = pseudocharacter<RealField>(Mat2d(r * unipotent_upper(rng.uniform(-20, 20))));
    CHECK(shifted == doctest::Approx(base).epsilon(1e-12));
  }

  // multiplicativity on the diagonal subgroup
  for (int i = 0; i < 100; ++i) {
    const double t1 = std::exp(rng.uniform(-3, 3)), t2 = std::exp(rng.uniform(-3, 3));
    const double lhs = pseudocharacter<RealField>(Mat2d(diag_split<RealField>(t1) * diag_split<RealField>(t2)));
    const double rhs = pseudocharacter<RealField>(diag_split<RealField>(t1)) *
                       pseudocharacter<RealField>(diag_split<RealField>(t2));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("eig_split") {
  // diagonal input
  Mat2d b = Eigen::Vector2d(1.0, 0.03).asDiagonal();
  auto s = eig_split<RealField>(b);
  CHECK(s.theta == doctest::Approx(0.0));
  CHECK(s.small_eig == doctest::Approx(0.03).epsilon(1e-14));

  // rank-one projector at theta0 = pi/3
  const double th0 = M_PI / 3.0;
  s = eig_split<RealField>(axis_projector(th0));
  CHECK(s.theta == doctest::Approx(th0).epsilon(1e-13));
  CHECK(s.small_eig == doctest::Approx(0.0));

  // reconstruction identity for random (theta, t), t < 0.7
  Rng rng(3);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    const double th = rng.uniform(0, M_PI), t = rng.uniform(0, 0.7);
    const Mat2d q = axis_projector(th);
    const Mat2d m = q + t * (Mat2d::Identity() - q);
    auto sp = eig_split<RealField>(m);
    worst = std::max(worst, (reconstruct<RealField>(sp) - m).template lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-12);

  // complex round trip
  for (int i = 0; i < 2000; ++i) {
    Vec2<ComplexField> xi;
    xi << std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1)),
        std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
    xi.normalize();
    const double t = rng.uniform(0, 0.7);
    Mat2<ComplexField> q = axis_projector<ComplexField>(xi);
    Mat2<ComplexField> m = q + std::complex<double>(t) * (Mat2<ComplexField>::Identity() - q);
    auto sp = eig_split<ComplexField>(m);
    worst = std::max(worst, (reconstruct<ComplexField>(sp) - m).template lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-12);

  // nearly equal eigenvalues rejected
  CHECK_THROWS_AS(eig_split<RealField>(Mat2d::Identity()), std::domain_error);
}

TEST_CASE("boundary parameter is stable to extreme depth") {
  // t(diag(e, 1/e)) = e^2 without cancellation
  for (double e : {1e-3, 1e-30, 1e-120}) {
    Mat2d g = Mat2d::Zero();
    g(0, 0) = 1.0 / e;
    g(1, 1) = e;
    CHECK(boundary_param<RealField>(g) == doctest::Approx(e * e).epsilon(1e-12));
  }
}
