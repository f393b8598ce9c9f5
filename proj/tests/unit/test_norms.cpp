#include <doctest.h>

#include <levymax/error.hpp>
#include <levymax/norms.hpp>
#include <levymax/rng.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace levymax;

namespace {
Vector gaussian(Philox4x32& g, std::size_t n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto& x : v) x = d(g);
  return v;
}

// Central differences of psi_p at step 1e-5 (1 + |x|).
Vector fd_gradient(const NormedSpace& s, const Vector& x, double p) {
  const double h = 1e-5 * (1 + s.norm(x));
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    out(i) = (s.psi(a, p) - s.psi(b, p)) / (2 * h);
  }
  return out;
}
}  // namespace

TEST_SUITE("norms") {
  TEST_CASE("norm values") {
    CHECK(NormedSpace::lq(2, 2).norm(Vector{{3.0, 4.0}}) == doctest::Approx(5.0));
    CHECK(NormedSpace::lq(4, 4).norm(Vector::Ones(4)) == doctest::Approx(std::pow(4.0, 0.25)));
    CHECK(NormedSpace::lq(3, 1.5, 1.5).norm(Vector{{1.0, -2.0, 3.0}}) ==
          doctest::Approx(std::pow(1.0 + std::pow(2.0, 1.5) + std::pow(3.0, 1.5), 1.0 / 1.5)));
    CHECK(NormedSpace::lq(5, 3, 2).norm(Vector::Zero(5)) == 0.0);
    CHECK(NormedSpace::spectral_sobolev(8, 0.5, 4).norm(Vector::Zero(64)) == 0.0);
  }

  TEST_CASE("dimension mismatch and bad exponents are rejected") {
    const auto s = NormedSpace::lq(3, 2);
    CHECK_THROWS_AS(s.norm(Vector::Zero(2)), ArgumentError);
    CHECK_THROWS_AS(NormedSpace::lq(3, 2, 2.5), ArgumentError);
    CHECK_THROWS_AS(NormedSpace::lq(3, 1.5, 2.0), ArgumentError);
    CHECK_NOTHROW(NormedSpace::lq(3, 1.5, 1.5));
    CHECK_THROWS_AS(psi_p_gradient(s, Vector::Ones(3), 1.0), UnsupportedExponentError);
    CHECK_THROWS_AS(psi_p_gradient(s, Vector::Ones(3), 0.5), UnsupportedExponentError);
    CHECK_THROWS_AS(psi_p_gradient(s, Vector::Ones(3), 1.5), ArgumentError);
  }

  TEST_CASE("norm axioms on random vectors") {
    Philox4x32 g({1, 0, 0});
    const std::vector<NormedSpace> spaces{NormedSpace::lq(6, 2), NormedSpace::lq(6, 4), NormedSpace::lq(6, 1.5, 1.5),
                                          NormedSpace::spectral_sobolev(8, 0.5, 4),
                                          NormedSpace::spectral_sobolev(8, -0.25, 2)};
    for (const auto& s : spaces)
      for (int t = 0; t < 50; ++t) {
        const Vector x = gaussian(g, s.dim()), y = gaussian(g, s.dim());
        const double c = std::exp(gaussian(g, 1)(0));
        CHECK(s.norm(c * x) == doctest::Approx(c * s.norm(x)).epsilon(1e-13));
        CHECK(s.norm(-x) == doctest::Approx(s.norm(x)).epsilon(1e-13));
        CHECK(s.norm(x + y) <= s.norm(x) + s.norm(y) + 1e-12);
        CHECK(s.psi(c * x, 3.0) == doctest::Approx(std::pow(c, 3.0) * s.psi(x, 3.0)).epsilon(1e-12));
        CHECK(s.norm(x) > 0);
      }
  }

  TEST_CASE("gradient values") {
    const auto s = NormedSpace::lq(2, 2);
    const Vector x{{3.0, 4.0}};
    const auto g2 = psi_p_gradient(s, x, 2);
    CHECK(g2.gradient(0) == doctest::Approx(6.0));
    CHECK(g2.gradient(1) == doctest::Approx(8.0));
    const auto g4 = psi_p_gradient(s, x, 4);
    const Vector fd = fd_gradient(s, x, 4);
    CHECK(g4.gradient(0) == doctest::Approx(300.0));
    CHECK(g4.gradient(1) == doctest::Approx(400.0));
    CHECK(fd(0) == doctest::Approx(300.0).epsilon(1e-7));
    CHECK(psi_p_gradient(s, Vector{{1.0, 0.0}}, 2).apply(Vector{{1.0, 0.0}}) == doctest::Approx(2.0));
    CHECK(psi_p_gradient(s, Vector::Zero(2), 2.5).gradient.isZero());
  }

  TEST_CASE("gradients match finite differences on 100 random triples") {
    Philox4x32 g({2, 0, 0});
    const std::vector<NormedSpace> spaces{NormedSpace::lq(4, 2), NormedSpace::lq(5, 3), NormedSpace::lq(3, 4),
                                          NormedSpace::lq(4, 1.5, 1.5), NormedSpace::spectral_sobolev(8, 0.5, 4),
                                          NormedSpace::spectral_sobolev(8, -0.3, 2)};
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const auto& s = spaces[t % spaces.size()];
      const double p = s.smoothness_r() + 3.0 * g.uniform01();
      const Vector x = gaussian(g, s.dim());
      const Vector a = psi_p_gradient(s, x, p).gradient;
      const Vector fd = fd_gradient(s, x, p);
      worst = std::max(worst, (a - fd).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("Euler identity to 1e-12") {
    Philox4x32 g({3, 0, 0});
    const std::vector<NormedSpace> spaces{NormedSpace::lq(4, 2), NormedSpace::lq(5, 3), NormedSpace::lq(4, 1.5, 1.5),
                                          NormedSpace::spectral_sobolev(8, 0.5, 4)};
    for (int t = 0; t < 100; ++t) {
      const auto& s = spaces[t % spaces.size()];
      const double p = s.smoothness_r() + 3.0 * g.uniform01();
      const Vector x = gaussian(g, s.dim());
      const double lhs = psi_p_gradient(s, x, p).apply(x);
      CHECK(std::abs(lhs - p * s.psi(x, p)) <= 1e-12 * p * s.psi(x, p));
    }
  }

  TEST_CASE("derivative bound |psi_p'(x)(h)| <= p |x|^{p-1} |h|") {
    Philox4x32 g({4, 0, 0});
    const std::vector<NormedSpace> spaces{NormedSpace::lq(4, 2), NormedSpace::lq(4, 4), NormedSpace::lq(4, 1.5, 1.5)};
    for (int t = 0; t < 300; ++t) {
      const auto& s = spaces[t % spaces.size()];
      const double p = 2.0 + g.uniform01();
      const Vector x = gaussian(g, 4), h = gaussian(g, 4);
      CHECK(std::abs(psi_p_gradient(s, x, p).apply(h)) <= p * std::pow(s.norm(x), p - 1) * s.norm(h) * (1 + 1e-12));
    }
  }

  TEST_CASE("functional norm is the dual norm on l^q") {
    const Vector gvec{{1.0, -2.0, 2.0}};
    CHECK(functional_norm(NormedSpace::lq(3, 2), gvec) == doctest::Approx(3.0));
    // dual of l^4 is l^{4/3}
    CHECK(functional_norm(NormedSpace::lq(3, 4), gvec) ==
          doctest::Approx(std::pow(1.0 + 2 * std::pow(2.0, 4.0 / 3), 0.75)));
  }

  TEST_CASE("Hoelder probe") {
    const auto s = NormedSpace::lq(3, 2);
    const double c22 = holder_constant_probe(s, 2, 2, 2000, 1);
    CHECK(c22 <= 2.0 + 1e-9);
    CHECK(c22 > 1.9);
    const double a = holder_constant_probe(s, 4, 2, 10000, 2);
    const double b = holder_constant_probe(s, 4, 2, 20000, 2);
    CHECK(std::isfinite(a));
    CHECK(std::abs(b - a) <= 0.1 * a);
    CHECK_THROWS_AS(holder_constant_probe(s, 2, 2, 0, 1), ArgumentError);
    CHECK_THROWS_AS(holder_constant_probe(s, 1.5, 2, 10, 1), ArgumentError);
  }

  TEST_CASE("Hoelder probe does not grow under 10x samples") {
    const auto s = NormedSpace::lq(2, 2);
    for (double p : {2.0, 3.0}) {
      const double a = holder_constant_probe(s, p, 2, 2000, 5);
      const double b = holder_constant_probe(s, p, 2, 20000, 5);
      CHECK(b <= a * 1.1);
    }
  }

  TEST_CASE("type constant probe") {
    const Estimate real = type_constant_probe(NormedSpace::lq(1, 2), 2, 20000, 8, 1);
    CHECK(std::abs(real.value - 1.0) <= 3 * real.se + 1e-12);
    const Estimate l2 = type_constant_probe(NormedSpace::lq(8, 2), 2, 20000, 8, 2);
    CHECK(l2.value <= 1.0 + 3 * l2.se);
    const Estimate one = type_constant_probe(NormedSpace::lq(4, 4), 2, 1000, 1, 3);
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("gamma norm") {
    const auto s = NormedSpace::lq(2, 2);
    const GammaFactor id{Matrix::Identity(2, 2)};
    const double v = gamma_norm(s, id, 100000, 1);
    CHECK(std::abs(v - std::sqrt(2.0)) < 0.01);
    CHECK(gamma_norm(s, GammaFactor{Matrix::Zero(2, 3)}, 100, 1) == 0.0);
    const GammaFactor twice{2.0 * id.matrix};
    CHECK(gamma_norm(s, twice, 500, 9) == doctest::Approx(2.0 * gamma_norm(s, id, 500, 9)).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_norm(s, id, 0, 1), ArgumentError);
    CHECK_THROWS_AS(gamma_norm(s, GammaFactor{Matrix::Identity(3, 3)}, 10, 1), ArgumentError);
  }

  TEST_CASE("Hessian of psi_p on l^2 matches differences of the gradient") {
    const auto s = NormedSpace::lq(3, 2);
    Philox4x32 g({6, 0, 0});
    for (double p : {2.0, 3.0, 4.0}) {
      const Vector x = gaussian(g, 3);
      const Matrix h = psi_p_hessian(s, x, p);
      const double step = 1e-6;
      for (int j = 0; j < 3; ++j) {
        Vector a = x, b = x;
        a(j) += step;
        b(j) -= step;
        const Vector col = (psi_p_gradient(s, a, p).gradient - psi_p_gradient(s, b, p).gradient) / (2 * step);
        CHECK((h.col(j) - col).norm() <= 1e-6 * (1 + h.norm()));
      }
    }
    CHECK_THROWS_AS(psi_p_hessian(NormedSpace::lq(3, 4), Vector::Ones(3), 2), CapabilityError);
  }
}
