#include <doctest.h>

#include <levymax/error.hpp>
#include <levymax/qge.hpp>
#include <levymax/stats.hpp>

#include <cmath>
#include <limits>
#include <numbers>

using namespace levymax;
using namespace levymax::qge;

namespace {
const Complex I(0.0, 1.0);

Field single_mode(const SpectralGrid& g, int k1, int k2, Complex c) {
  Field f = Field::Zero(static_cast<Eigen::Index>(g.size()));
  f(g.index_of(k1, k2)) = c;
  f(g.index_of(-k1, -k2)) = std::conj(c);
  return f;
}

ZPath zero_z(const SpectralGrid& g, double horizon, std::size_t n_steps) {
  ZPath z;
  z.jumps.horizon = horizon;
  for (std::size_t j = 0; j <= n_steps; ++j) {
    z.times.push_back(horizon * double(j) / double(n_steps));
    z.values.push_back(Field::Zero(static_cast<Eigen::Index>(g.size())));
  }
  return z;
}

double imag_scale(const SpectralGrid& g, const Field& f) {
  const Eigen::ArrayXcd phys = g.inverse_complex(f);
  const double scale = phys.abs().maxCoeff();
  return scale > 0 ? phys.imag().abs().maxCoeff() / scale : 0.0;
}

NoiseSpec standard_noise() {
  return {{{{{1, 0}, {0, 1}}, 4.0, 1.0}, {{{2, 1}, {3, 3}}, 2.0, 0.5}}, 0.25, true};
}

NoiseSpec silent_noise() { return {{{{{1, 1}}, 1e-300, 1.0}}, 0.25, true}; }

RunConfig small_run(std::size_t n_steps = 100) {
  RunConfig c;
  c.n = 32;
  c.horizon = 0.25;
  c.n_steps = n_steps;
  c.noise = standard_noise();
  c.theta0_modes = 4;
  c.seed = 7;
  return c;
}
}  // namespace

TEST_SUITE("qge") {
  TEST_CASE("Riesz velocity of the mode (3,4)") {
    SpectralGrid g(32);
    const Complex a(0.7, -0.2);
    const auto v = riesz_velocity(g, single_mode(g, 3, 4, a));
    const auto k = g.index_of(3, 4);
    // (-R_2 theta, R_1 theta) with R_j = -i k_j/|k|: the multipliers (-4/5, 3/5) times -i
    CHECK(std::abs(v.v1(k) - (-I) * (-0.8) * a) < 1e-15);
    CHECK(std::abs(v.v2(k) - (-I) * (0.6) * a) < 1e-15);
    CHECK(divergence_defect(g, v) < 1e-15);
    // the velocity of a real field is real
    CHECK(imag_scale(g, v.v1) < 1e-14);
    CHECK(imag_scale(g, v.v2) < 1e-14);
    CHECK(g.inverse(v.v1).abs().maxCoeff() > 0.1);
  }

  TEST_CASE("Riesz velocity of zero and of a field with a mean") {
    SpectralGrid g(16);
    const Field zero = Field::Zero(static_cast<Eigen::Index>(g.size()));
    const auto v = riesz_velocity(g, zero);
    CHECK(v.v1.isZero());
    CHECK(v.v2.isZero());
    Field mean = zero;
    mean(0) = 1.0;
    CHECK_THROWS_AS(riesz_velocity(g, mean), ArgumentError);
  }

  TEST_CASE("divergence-free velocity on random fields") {
    SpectralGrid g(64);
    for (std::uint32_t r = 0; r < 100; ++r) {
      const Field theta = random_band_limited(g, 21, 1.0, 1, r);
      REQUIRE(divergence_defect(g, riesz_velocity(g, theta)) <= 1e-13 * theta.abs().maxCoeff());
    }
  }

  TEST_CASE("random band-limited fields") {
    SpectralGrid g(32);
    const Field f = random_band_limited(g, 5, 2.5, 3);
    CHECK(l2_norm(g, f) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f(0) == Complex(0, 0));
    CHECK(imag_scale(g, f) < 1e-13);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::max(std::abs(g.k1(i)), std::abs(g.k2(i))) > 5) REQUIRE(f(i) == Complex(0, 0));
    CHECK((random_band_limited(g, 5, 2.5, 3) - f).abs().maxCoeff() == 0.0);
    CHECK((random_band_limited(g, 5, 2.5, 3, 1) - f).abs().maxCoeff() > 0.0);
  }

  TEST_CASE("single-mode nonlinear term vanishes") {
    SpectralGrid g(64);
    for (auto [k1, k2] : {std::pair{1, 0}, {3, 4}, {-5, 2}, {7, 7}}) {
      const Field theta = single_mode(g, k1, k2, Complex(1.0, 0.5));
      CHECK(l2_norm(g, nonlinear_term(g, theta)) <= 1e-12 * l2_norm(g, theta));
    }
  }

  TEST_CASE("cancellation <B(R theta, theta), theta> = 0 on 100 random fields") {
    SpectralGrid g(64);
    double worst = 0;
    for (std::uint32_t r = 0; r < 100; ++r) {
      const Field theta = random_band_limited(g, 4 + int(r % 18), 1.0 + r % 3, 2, r);
      const Field b = nonlinear_term(g, theta);
      worst = std::max(worst, std::abs(inner(g, b, theta)) / (l2_norm(g, b) * l2_norm(g, theta)));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("antisymmetry <B(R theta, phi), eta> = -<B(R theta, eta), phi>") {
    SpectralGrid g(64);
    for (std::uint32_t r = 0; r < 30; ++r) {
      const Field theta = random_band_limited(g, 10, 1.0, 3, r);
      const Field phi = random_band_limited(g, 12, 1.0, 4, r);
      const Field eta = random_band_limited(g, 8, 1.0, 5, r);
      const double a = inner(g, transport(g, theta, phi), eta);
      const double b = inner(g, transport(g, theta, eta), phi);
      const double scale = l2_norm(g, transport(g, theta, phi)) * l2_norm(g, eta);
      REQUIRE(std::abs(a + b) <= 1e-10 * scale);
    }
  }

  TEST_CASE("heat semigroup decays each mode exactly") {
    SpectralGrid g(16);
    const Field f = single_mode(g, 2, -3, Complex(1.0, 2.0));
    const Field h = heat(g, f, 0.1);
    CHECK(std::abs(h(g.index_of(2, -3)) - std::exp(-1.3) * Complex(1.0, 2.0)) < 1e-15);
    CHECK((heat(g, f, 0.0) - f).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("dealiasing removes the mean and modes outside the band") {
    SpectralGrid g(16);
    Field f = Field::Ones(static_cast<Eigen::Index>(g.size()));
    const Field d = dealias(g, f);
    CHECK(d(0) == Complex(0, 0));
    CHECK(d(g.index_of(5, 0)) == Complex(1, 0));
    CHECK(d(g.index_of(6, 0)) == Complex(0, 0));
  }

  TEST_CASE("Sobolev norms") {
    SpectralGrid g(32);
    const Field f = random_band_limited(g, 8, 1.3, 6);
    CHECK(sobolev_norm(g, f, 0.0, 2.0) == doctest::Approx(l2_norm(g, f)).epsilon(1e-12));
    CHECK(l2_norm(g, f) == doctest::Approx(std::sqrt(g.domain_area() * f.abs2().sum())).epsilon(1e-14));
    Field c = Field::Zero(static_cast<Eigen::Index>(g.size()));
    c(0) = -2.0;
    CHECK(sobolev_norm(g, c, 0.0, 4.0) == doctest::Approx(2.0 * std::pow(g.domain_area(), 0.25)).epsilon(1e-13));
    CHECK(sobolev_norm(g, c, 0.3, 4.0) == doctest::Approx(2.0 * std::pow(g.domain_area(), 0.25)).epsilon(1e-13));
    const Field m = single_mode(g, 1, 1, 1.0);
    CHECK(gradient_norm(g, m) == doctest::Approx(std::sqrt(2.0) * l2_norm(g, m)));
  }

  TEST_CASE("interpolation constant is stable over random fields") {
    SpectralGrid g(64);
    const double s = 0.25;
    double first_half = 0, all = 0;
    for (std::uint32_t r = 0; r < 100; ++r) {
      const Field z = random_band_limited(g, 2 + int(r % 15), 1.0, 8, r);
      const double c = std::pow(sobolev_norm(g, z, 0, 4), 4) /
                       (std::pow(sobolev_norm(g, z, s, 4), 2) * std::pow(sobolev_norm(g, z, -s, 4), 2));
      all = std::max(all, c);
      if (r < 50) first_half = all;
    }
    CHECK(std::isfinite(all));
    CHECK(all <= 1.1 * first_half);
  }

  TEST_CASE("Ladyzhenskaya constant 2^{1/4} on mean-zero fields") {
    SpectralGrid g(64);
    double worst = 0;
    for (std::uint32_t r = 0; r < 100; ++r)
      worst = std::max(worst, ladyzhenskaya_ratio(g, random_band_limited(g, 1 + int(r % 21), 1.0, 9, r)));
    CHECK(worst <= std::pow(2.0, 0.25));
    CHECK(worst > 0.3);
  }

  TEST_CASE("Riesz L^4 constant probe") {
    SpectralGrid g(32);
    const double c = riesz_l4_constant(g, 50, 1);
    CHECK(c > 0.5);
    CHECK(c < 2.0);
    CHECK(riesz_l4_constant(g, 50, 1) == c);
  }

  TEST_CASE("noise model") {
    SpectralGrid g(32);
    const NoiseModel noise(g, standard_noise());
    CHECK(noise.marks().size() == 4);
    CHECK(noise.compensator_rate().isZero());
    for (std::size_t b = 0; b < 2; ++b)
      CHECK(sobolev_norm(g, noise.amplitude(b), -0.25, 4) ==
            doctest::Approx(standard_noise().bundles[b].target_norm).epsilon(1e-12));
    CHECK(noise.assumption_integral(0.5) == doctest::Approx(0.5 * (4.0 * 1.0 + 2.0 * 0.25)));
    CHECK(imag_scale(g, noise.amplitude(1)) < 1e-14);

    NoiseSpec asym = standard_noise();
    asym.symmetric = false;
    const NoiseModel one_sided(g, asym);
    CHECK(one_sided.marks().size() == 2);
    CHECK((one_sided.compensator_rate() - (4.0 * one_sided.amplitude(0) + 2.0 * one_sided.amplitude(1))).abs().maxCoeff() <
          1e-15);
  }

  TEST_CASE("noise validation") {
    SpectralGrid g(32);
    auto bad = standard_noise();
    bad.s = 0.5;
    CHECK_THROWS_AS(NoiseModel(g, bad), ArgumentError);
    bad = standard_noise();
    bad.bundles[0].modes.push_back({0, 0});
    CHECK_THROWS_AS(NoiseModel(g, bad), ArgumentError);
    bad = standard_noise();
    bad.bundles[0].modes.push_back({11, 0});
    CHECK_THROWS_AS(NoiseModel(g, bad), ArgumentError);
    bad = standard_noise();
    bad.bundles[1].rate = 0;
    CHECK_THROWS_AS(NoiseModel(g, bad), ArgumentError);
  }

  TEST_CASE("Z without jumps is identically zero") {
    SpectralGrid g(32);
    const NoiseModel noise(g, silent_noise());
    const ZPath z = ou_convolution_z(g, noise, 1.0, 20, 1);
    CHECK(z.jumps.events.empty());
    for (const auto& v : z.values) CHECK(v.isZero());
  }

  TEST_CASE("Z matches the closed form sum of decayed jumps minus the decayed compensator") {
    SpectralGrid g(32);
    for (bool symmetric : {true, false}) {
      NoiseSpec spec = standard_noise();
      spec.symmetric = symmetric;
      const NoiseModel noise(g, spec);
      const ZPath z = ou_convolution_z(g, noise, 0.5, 40, 3);
      REQUIRE_FALSE(z.jumps.events.empty());
      Eigen::ArrayXd kappa(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) kappa(i) = std::max(g.k_squared(i), 1e-300);
      for (std::size_t j = 0; j < z.times.size(); ++j) {
        const double t = z.times[j];
        Field expected = -noise.compensator_rate() * (1.0 - (-kappa * t).exp()) / kappa;
        for (const auto& e : z.jumps.events)
          if (e.time <= t) expected += (-kappa * (t - e.time)).exp() * noise.jump(e.mark);
        REQUIRE((z.values[j] - expected).abs().maxCoeff() <= 1e-12 * (1 + expected.abs().maxCoeff()));
      }
    }
  }

  TEST_CASE("single jump decays like exp(-|k|^2 (t - tau))") {
    SpectralGrid g(16);
    const NoiseModel noise(g, {{{{{2, 1}}, 1.0, 1.0}}, 0.25, true});
    const auto k = g.index_of(2, 1);
    std::uint32_t rep = 0;
    ZPath z = ou_convolution_z(g, noise, 1.0, 10, 5, rep);
    while (z.jumps.events.size() != 1) z = ou_convolution_z(g, noise, 1.0, 10, 5, ++rep);
    const JumpEvent& ev = z.jumps.events.front();
    const Complex amp = noise.jump(ev.mark)(k);
    CHECK(std::abs(amp) > 0);
    for (std::size_t j = 0; j < z.times.size(); ++j) {
      const double t = z.times[j];
      const Complex expected = t >= ev.time ? std::exp(-5.0 * (t - ev.time)) * amp : Complex(0, 0);
      CHECK(std::abs(z.values[j](k) - expected) < 1e-15);
    }
  }

  TEST_CASE("moment bound: E sup |Z|^2_{W^{-s,4}} against the assumption integral") {
    SpectralGrid g(32);
    const NoiseModel noise(g, standard_noise());
    std::vector<double> sups;
    for (std::uint32_t r = 0; r < 400; ++r) {
      const ZPath z = ou_convolution_z(g, noise, 0.5, 50, 4, r);
      double s = 0;
      for (const auto& v : z.values) s = std::max(s, std::pow(sobolev_norm(g, v, -0.25, 4), 2));
      sups.push_back(s);
    }
    const Estimate e = mean_estimate(sups);
    const double ratio = e.value / noise.assumption_integral(0.5);
    CHECK(std::isfinite(ratio));
    CHECK(ratio > 0.0);
    CHECK(ratio < 10.0);
  }

  TEST_CASE("Y equation without noise: single mode decays exactly") {
    SpectralGrid g(32);
    const Complex a(0.4, -0.3);
    const ZPath z = zero_z(g, 0.5, 50);
    const FieldPath y = solve_y(g, z, single_mode(g, 3, 1, a));
    for (std::size_t j = 0; j < y.times.size(); ++j)
      REQUIRE(std::abs(y.values[j](g.index_of(3, 1)) - a * std::exp(-10.0 * y.times[j])) < 1e-15);
    const FieldPath zero = solve_y(g, z, Field::Zero(static_cast<Eigen::Index>(g.size())));
    for (const auto& v : zero.values) REQUIRE(v.isZero());
  }

  TEST_CASE("non-finite state raises a blow-up error") {
    SpectralGrid g(16);
    Field y0 = single_mode(g, 1, 1, 1.0);
    y0(g.index_of(1, 1)) = Complex(std::numeric_limits<double>::quiet_NaN(), 0);
    CHECK_THROWS_AS(solve_y(g, zero_z(g, 0.1, 5), y0), BlowUpError);
  }

  TEST_CASE("assembly: heat decay without Y and Z, theta(0) = theta0, splitting identity") {
    SpectralGrid g(32);
    const Field theta0 = random_band_limited(g, 6, 1.0, 10);
    const ZPath z = zero_z(g, 0.2, 10);
    const FieldPath y{z.times, z.values};
    const FieldPath theta = assemble_theta(g, theta0, y, z);
    CHECK((theta.values[0] - theta0).abs().maxCoeff() == 0.0);
    for (std::size_t j = 0; j < theta.times.size(); ++j)
      REQUIRE((theta.values[j] - heat(g, theta0, theta.times[j])).abs().maxCoeff() == 0.0);

    const Run r = run(small_run());
    for (std::size_t j = 0; j < r.theta.times.size(); ++j) {
      const Field sum = heat(r.grid, r.theta0, r.theta.times[j]) + r.y.values[j] + r.z.values[j];
      REQUIRE(l2_norm(r.grid, r.theta.values[j] - sum) <= 1e-10 * l2_norm(r.grid, r.theta.values[j]));
    }
    FieldPath short_y = y;
    short_y.times.pop_back();
    short_y.values.pop_back();
    CHECK_THROWS_AS(assemble_theta(g, theta0, short_y, z), ArgumentError);
  }

  TEST_CASE("mean zero and Hermitian symmetry are preserved along a run") {
    const Run r = run(small_run());
    for (std::size_t j = 0; j < r.theta.times.size(); ++j) {
      REQUIRE(r.y.values[j](0) == Complex(0, 0));
      REQUIRE(r.z.values[j](0) == Complex(0, 0));
      REQUIRE(r.theta.values[j](0) == Complex(0, 0));
      REQUIRE(imag_scale(r.grid, r.theta.values[j]) <= 1e-12);
      REQUIRE(imag_scale(r.grid, r.y.values[j]) <= 1e-12);
    }
  }

  TEST_CASE("mild residual decreases at first order under step halving") {
    std::vector<double> log_dt, log_res;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n : {25, 50, 100, 200, 400}) {
      const Run r = run(small_run(n));
      const double res = mild_residual(r.grid, r.theta0, r.theta, r.z);
      CHECK(res < previous);
      previous = res;
      log_dt.push_back(std::log(0.25 / double(n)));
      log_res.push_back(std::log(res));
    }
    CHECK(std::abs(least_squares(log_dt, log_res).slope - 1.0) <= 0.25);
  }

  TEST_CASE("final Y converges at first order without jumps") {
    std::vector<double> errors;
    for (std::size_t n : {25, 50, 100, 200}) {
      RunConfig c = small_run(n), f = small_run(2 * n);
      c.noise = f.noise = silent_noise();
      const Run coarse = run(c), fine = run(f);
      errors.push_back(l2_norm(coarse.grid, coarse.y.values.back() - fine.y.values.back()));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) CHECK(std::log2(errors[i] / errors[i + 1]) >= 0.9);
  }

  TEST_CASE("final Y converges with jumps") {
    // A jump inside a cell costs (cell end - tau) |dB|, so single paths are
    // erratic under halving; the RMS over replicates still shrinks.
    auto rms = [](std::size_t n) {
      double sq = 0.0;
      for (std::uint32_t r = 0; r < 16; ++r) {
        const Run coarse = run(small_run(n), r), fine = run(small_run(2 * n), r);
        sq += std::pow(l2_norm(coarse.grid, coarse.y.values.back() - fine.y.values.back()), 2);
      }
      return std::sqrt(sq / 16);
    };
    const double coarse = rms(25), fine = rms(800);
    MESSAGE("RMS error " << coarse << " -> " << fine);
    CHECK(fine < coarse / 8);
  }

  TEST_CASE("energy ledger without noise reduces to energy decay") {
    RunConfig c = small_run();
    c.noise = silent_noise();
    const Run r = run(c);
    const EnergyLedger ledger = energy_diagnostics(r, riesz_l4_constant(r.grid, 20, 1));
    CHECK(ledger.holds());
    CHECK(ledger.gronwall_sup.rhs == doctest::Approx(ledger.rows.front().y_l2_sq));
    for (std::size_t j = 0; j + 1 < ledger.rows.size(); ++j) REQUIRE(ledger.rows[j + 1].y_l2_sq <= ledger.rows[j].y_l2_sq);
  }

  TEST_CASE("energy ledger on a stochastic run") {
    const Run r = run(small_run());
    const double c = riesz_l4_constant(r.grid, 20, 1);
    const EnergyLedger ledger = energy_diagnostics(r, c);
    CHECK(ledger.c >= c);
    CHECK(ledger.c1 == doctest::Approx(13.5 * std::pow(ledger.c, 4)));
    CHECK(ledger.c2 == doctest::Approx(2 * ledger.c * ledger.c));
    CHECK(ledger.rows.size() == r.theta.times.size());
    CHECK(ledger.stepwise.ok);
    CHECK(ledger.gronwall_sup.ok);
    CHECK(ledger.gronwall_gradient.ok);
    CHECK(ledger.ladyzhenskaya.ok);
    CHECK_FALSE(ledger.ladyzhenskaya_flagged);
  }
}
