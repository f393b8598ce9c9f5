#include <doctest.h>

#include <levymax/error.hpp>
#include <levymax/norms.hpp>
#include <levymax/rng.hpp>
#include <levymax/semigroup.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace levymax;

namespace {
// Operator norm in l^2 by direction sampling (exact largest singular value as a cross-check).
double sampled_operator_norm(const Eigen::MatrixXd& m, std::uint64_t seed) {
  Philox4x32 g({seed, 0, 0});
  std::normal_distribution<double> d;
  double best = 0;
  for (int t = 0; t < 512; ++t) {
    Eigen::VectorXd x(m.cols());
    for (auto& v : x) v = d(g);
    best = std::max(best, (m * x).norm() / x.norm());
  }
  return best;
}

Semigroup sample_dense() {
  Eigen::Matrix3d a;
  a << -1.0, 0.5, 0.0,
       -0.5, -1.0, 0.2,
        0.0, -0.2, -0.3;
  // symmetric part has eigenvalues <= 0, so the semigroup is a contraction
  return Semigroup::matrix(a, 0.0);
}
}  // namespace

TEST_SUITE("semigroup") {
  TEST_CASE("action at zero is the identity") {
    CHECK(sample_dense().action(0).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    const auto d = Semigroup::diagonal(Eigen::Vector3d(-1, -2, 0.5), 0.5);
    CHECK(d.action(0).isApprox(Eigen::Matrix3d::Identity()));
    CHECK(Semigroup::identity(4).is_trivial());
    CHECK(Semigroup::identity(4).action(3.0).isApprox(Eigen::Matrix4d::Identity()));
  }

  TEST_CASE("flow property to 1e-10 relative") {
    for (const auto& s : {sample_dense(), Semigroup::diagonal(Eigen::Vector3d(-1, -4, 0.3), 0.3)})
      for (double a : {0.1, 0.7, 2.0})
        for (double b : {0.05, 1.3}) {
          const Eigen::MatrixXd lhs = s.action(a + b), rhs = s.action(a) * s.action(b);
          CHECK((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        }
  }

  TEST_CASE("diagonal action is the exact exponential") {
    const auto d = Semigroup::diagonal(Eigen::Vector2d(-1, -3), 0);
    CHECK(d.apply(0.5, Eigen::Vector2d(1, 1)).isApprox(Eigen::Vector2d(std::exp(-0.5), std::exp(-1.5)), 1e-15));
  }

  TEST_CASE("dense exponential of a rotation generator") {
    Eigen::Matrix2d a;
    a << 0, -1, 1, 0;
    const auto s = Semigroup::matrix(a, 0);
    Eigen::Matrix2d rot;
    rot << std::cos(0.8), -std::sin(0.8), std::sin(0.8), std::cos(0.8);
    CHECK(s.action(0.8).isApprox(rot, 1e-13));
  }

  TEST_CASE("growth bound holds in the l^2 norm") {
    const auto dense = sample_dense();
    Eigen::Matrix2d shifted;
    shifted << -0.5, 0.0, 0.0, 0.5;
    const auto grow = Semigroup::matrix(shifted, 0.5);
    for (double t : {0.0, 0.1, 1.0, 3.0, 10.0}) {
      CHECK(sampled_operator_norm(dense.action(t), 1) <= std::exp(dense.growth_alpha() * t) * (1 + 1e-12));
      CHECK(sampled_operator_norm(grow.action(t), 2) <= std::exp(0.5 * t) * (1 + 1e-12));
    }
  }

  TEST_CASE("integrated action matches quadrature") {
    const auto s = sample_dense();
    const Eigen::Vector3d c(1, -2, 0.5);
    const Eigen::VectorXd exact = s.integrated_apply(1.5, c);
    for (int i = 0; i < 3; ++i) {
      const double q = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double u) { return s.apply(u, c)(i); }, 0.0, 1.5, 8, 1e-13);
      CHECK(exact(i) == doctest::Approx(q).epsilon(1e-10));
    }
    const auto d = Semigroup::diagonal(Eigen::Vector2d(-2, 0), 0);
    CHECK(d.integrated_apply(1.0, Eigen::Vector2d(1, 1)).isApprox(Eigen::Vector2d((1 - std::exp(-2.0)) / 2, 1.0)));
  }

  TEST_CASE("argument validation") {
    CHECK_THROWS_AS(Semigroup::diagonal(Eigen::Vector2d(-1, 1), 0.5), ArgumentError);
    CHECK_THROWS_AS(Semigroup::diagonal(Eigen::Vector2d(-1, -1), -1.0), ArgumentError);
    CHECK_THROWS_AS(Semigroup::matrix(Eigen::MatrixXd::Zero(2, 3), 0), ArgumentError);
    CHECK_THROWS_AS(sample_dense().apply(1.0, Eigen::Vector2d(1, 1)), ArgumentError);
  }
}
