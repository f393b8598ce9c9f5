#include <doctest.h>

#include <levymax/error.hpp>
#include <levymax/point_process.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

using namespace levymax;

namespace {
Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

MarkSpace single_atom(double rate, double value = 1.0) { return MarkSpace::finite({{"a", rate, vec1(value)}}); }

// Two-sample Kolmogorov-Smirnov statistic for integer samples.
double ks_statistic(std::vector<long> a, std::vector<long> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const long hi = std::max(a.back(), b.back());
  double d = 0;
  for (long v = 0; v <= hi; ++v) {
    const double fa = double(std::upper_bound(a.begin(), a.end(), v) - a.begin()) / a.size();
    const double fb = double(std::upper_bound(b.begin(), b.end(), v) - b.begin()) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

// 5% critical value of the two-sample KS statistic.
double ks_critical(std::size_t n, std::size_t m) { return 1.358 * std::sqrt(double(n + m) / (double(n) * m)); }

JumpPath hand_path(std::vector<std::pair<double, std::size_t>> events, double horizon = 1.0) {
  JumpPath p;
  p.horizon = horizon;
  for (auto [t, layer] : events) p.events.push_back({t, {layer, vec1(1.0)}});
  return p;
}
}  // namespace

TEST_SUITE("point_process") {
  TEST_CASE("Poisson count mean") {
    const auto marks = single_atom(2.0);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += double(sample_jump_path(marks, 1.0, 1, i).events.size());
    CHECK(std::abs(sum / n - 2.0) <= 3 * std::sqrt(2.0 / n));
  }

  TEST_CASE("zero-mass layer produces no events") {
    const auto marks = MarkSpace::layered({{"empty", 0.0, PointMass{vec1(1.0)}}}, 1);
    for (std::uint32_t i = 0; i < 100; ++i) CHECK(sample_jump_path(marks, 5.0, 3, i).events.empty());
  }

  TEST_CASE("superposition of two layers has mean (l1 + l2) T") {
    const auto marks = MarkSpace::finite({{"a", 1.0, vec1(1.0)}, {"b", 3.0, vec1(-1.0)}});
    const int n = 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += double(sample_jump_path(marks, 2.0, 7, i).events.size());
    CHECK(std::abs(sum / n - 8.0) <= 3 * std::sqrt(8.0 / n));
  }

  TEST_CASE("superposition: merged independent paths match the union layer in law (KS, 5%)") {
    const auto a = single_atom(1.0), b = single_atom(3.0), both = single_atom(4.0);
    const std::size_t n = 10000;
    std::vector<long> merged, direct;
    for (std::uint32_t i = 0; i < n; ++i) {
      merged.push_back(long(sample_jump_path(a, 1.0, 11, i).events.size() + sample_jump_path(b, 1.0, 12, i).events.size()));
      direct.push_back(long(sample_jump_path(both, 1.0, 13, i).events.size()));
    }
    CHECK(ks_statistic(merged, direct) < ks_critical(n, n));
  }

  TEST_CASE("restriction to D_n matches sampling D_n alone in law (KS, 5%)") {
    std::vector<Layer> shells{{"d1", 1.0, PointMass{vec1(1.0)}},
                              {"d2", 2.0, UniformBox{vec1(1.0), vec1(2.0)}},
                              {"d3", 3.0, PointMass{vec1(5.0)}}};
    const auto full = MarkSpace::layered(shells, 3);
    const auto first_two = MarkSpace::layered(shells, 2);
    CHECK(first_two.truncation_tail_mass() == doctest::Approx(3.0));
    const std::size_t n = 10000;
    std::vector<long> filtered, direct;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto p = sample_jump_path(full, 1.0, 21, i);
      filtered.push_back(long(std::count_if(p.events.begin(), p.events.end(), [](const JumpEvent& e) { return e.mark.layer < 2; })));
      direct.push_back(long(sample_jump_path(first_two, 1.0, 22, i).events.size()));
    }
    CHECK(ks_statistic(filtered, direct) < ks_critical(n, n));
  }

  TEST_CASE("events are strictly ordered in (0, T] and marks lie in their layer") {
    std::vector<Layer> shells{{"small", 5.0, UniformBox{vec1(-1.0), vec1(1.0)}},
                              {"big", 2.0, DiscreteLaw{{vec1(10.0), vec1(-10.0)}, {0.5, 0.5}}}};
    const auto marks = MarkSpace::layered(shells, 2);
    for (std::uint32_t r = 0; r < 500; ++r) {
      const auto p = sample_jump_path(marks, 1.5, 4, r);
      for (std::size_t i = 0; i < p.events.size(); ++i) {
        const auto& e = p.events[i];
        REQUIRE(e.time > 0.0);
        REQUIRE(e.time <= 1.5);
        if (i > 0) REQUIRE(p.events[i - 1].time < e.time);
        if (e.mark.layer == 0) REQUIRE(std::abs(e.mark.value(0)) <= 1.0);
        else REQUIRE(std::abs(e.mark.value(0)) == 10.0);
      }
    }
  }

  TEST_CASE("reproducibility: identical inputs give identical paths") {
    const auto marks = MarkSpace::finite({{"a", 3.0, vec1(1.0)}, {"b", 1.0, vec1(2.0)}});
    const auto p = sample_jump_path(marks, 2.0, 99, 5), q = sample_jump_path(marks, 2.0, 99, 5);
    std::ostringstream a, b;
    p.write_csv(a);
    q.write_csv(b);
    CHECK(a.str() == b.str());
    const auto other = sample_jump_path(marks, 2.0, 99, 6);
    std::ostringstream c;
    other.write_csv(c);
    CHECK(a.str() != c.str());
  }

  TEST_CASE("argument errors") {
    CHECK_THROWS_AS(MarkSpace::finite({{"a", 0.0, vec1(1.0)}}), ArgumentError);
    CHECK_THROWS_AS(MarkSpace::finite({{"a", -1.0, vec1(1.0)}}), ArgumentError);
    CHECK_THROWS_AS(MarkSpace::finite({}), ArgumentError);
    CHECK_THROWS_AS(MarkSpace::layered({{"x", -2.0, PointMass{vec1(1.0)}}}, 1), ArgumentError);
    CHECK_THROWS_AS(sample_jump_path(single_atom(1.0), 0.0, 1), ArgumentError);
    CHECK_THROWS_AS(sample_wiener(1.0, 0, 1, 1), ArgumentError);
  }

  TEST_CASE("sigma-finite truncation reports an infinite tail") {
    const auto marks = MarkSpace::layered({{"d1", 1.0, PointMass{vec1(1.0)}}, {"d2", 1.0, PointMass{vec1(0.5)}}}, 1,
                                          std::numeric_limits<double>::infinity());
    CHECK(marks.size() == 1);
    CHECK(std::isinf(marks.truncation_tail_mass()));
    CHECK_FALSE(marks.total_mass_finite());
    CHECK(marks.simulated_mass() == 1.0);
  }

  TEST_CASE("quadrature nodes integrate the mark law") {
    const auto marks = MarkSpace::layered({{"u", 2.0, UniformBox{vec1(0.0), vec1(3.0)}},
                                           {"d", 1.0, DiscreteLaw{{vec1(1.0), vec1(4.0)}, {1.0, 3.0}}}}, 2);
    double mass = 0, first = 0, second = 0;
    for (const auto& n : marks.nodes()) {
      mass += n.weight;
      first += n.weight * n.value(0);
      second += n.weight * n.value(0) * n.value(0);
    }
    CHECK(mass == doctest::Approx(3.0));
    CHECK(first == doctest::Approx(2.0 * 1.5 + (0.25 * 1 + 0.75 * 4)));
    CHECK(second == doctest::Approx(2.0 * 3.0 + (0.25 * 1 + 0.75 * 16)));
  }

  TEST_CASE("counting measure") {
    CHECK(counting_measure(hand_path({}), 0.0, 1.0) == 0);
    const auto p = hand_path({{0.3, 0}, {0.7, 0}});
    CHECK(counting_measure(p, 0.0, 0.5) == 1);
    CHECK(counting_measure(p, 0.3, 0.7) == 1);
    CHECK(counting_measure(p, 0.0, 1.0, [](const JumpEvent& e) { return e.time > 0.5; }) == 1);
    CHECK_THROWS_AS(counting_measure(p, 0.5, 0.5), ArgumentError);
  }

  TEST_CASE("counting measure is additive on 1000 random paths") {
    const auto marks = single_atom(5.0);
    for (std::uint32_t r = 0; r < 1000; ++r) {
      const auto p = sample_jump_path(marks, 1.0, 8, r);
      const double t1 = 0.1 + 0.8 * ((r * 37) % 100) / 100.0;
      REQUIRE(counting_measure(p, 0.0, t1) + counting_measure(p, t1, 1.0) == counting_measure(p, 0.0, 1.0));
      REQUIRE(counting_measure(p, 0.0, 1.0) == p.events.size());
    }
  }

  TEST_CASE("Wiener increments have variance dt") {
    const auto w = sample_wiener(1.0, 10000, 1, 3);
    const Eigen::VectorXd inc = w.increments.col(0);
    const double mean = inc.mean();
    const double var = (inc.array() - mean).square().sum() / (inc.size() - 1);
    CHECK(std::abs(var - 1e-4) <= 3 * std::sqrt(2.0) * 1e-4 / 100);
  }

  TEST_CASE("Wiener terminal values are centred") {
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += sample_wiener(1.0, 4, 1, 5, i).increments.sum();
    CHECK(std::abs(sum / n) <= 3 / std::sqrt(double(n)));
  }

  TEST_CASE("Wiener determinism and grid layout") {
    const auto a = sample_wiener(2.0, 16, 3, 1, 2), b = sample_wiener(2.0, 16, 3, 1, 2);
    CHECK(a.increments == b.increments);
    CHECK(a.times.size() == 17);
    CHECK(a.times.back() == 2.0);
    CHECK(a.values().row(16).isApprox(a.increments.colwise().sum()));
  }

  TEST_CASE("Brownian bridge refinement keeps the coarse path") {
    const auto w = sample_wiener(1.0, 8, 2, 4);
    const auto fine = w.refine({0.01, 0.3, 0.3, 0.61, 0.99, 1.5});
    CHECK(fine.times.size() == 9 + 4);
    const auto cv = w.values(), fv = fine.values();
    for (std::size_t i = 0; i < w.times.size(); ++i) {
      const auto it = std::find(fine.times.begin(), fine.times.end(), w.times[i]);
      REQUIRE(it != fine.times.end());
      CHECK((fv.row(it - fine.times.begin()) - cv.row(i)).norm() < 1e-14);
    }
  }

  TEST_CASE("bridge midpoints have the conditional variance dt/4") {
    const int n = 20000;
    double sum2 = 0;
    for (int r = 0; r < n; ++r) {
      const auto w = sample_wiener(1.0, 1, 1, 6, r);
      const auto fine = w.refine({0.5});
      const double mid = fine.values()(1, 0);
      const double dev = mid - 0.5 * w.increments(0, 0);
      sum2 += dev * dev;
    }
    CHECK(std::abs(sum2 / n - 0.25) <= 3 * 0.25 * std::sqrt(2.0 / n));
  }

  TEST_CASE("coarsen sums blocks of increments") {
    const auto w = sample_wiener(1.0, 12, 2, 4);
    const auto c = w.coarsen(3);
    CHECK(c.n_steps() == 4);
    CHECK(c.times[1] == w.times[3]);
    CHECK(c.increments.row(2).isApprox(w.increments.middleRows(6, 3).colwise().sum()));
    CHECK_THROWS_AS(w.coarsen(5), ArgumentError);
  }

  TEST_CASE("jump path CSV columns") {
    JumpPath p;
    p.horizon = 1;
    p.events.push_back({0.25, {1, Eigen::Vector2d(1.5, -2)}});
    std::ostringstream out;
    p.write_csv(out);
    CHECK(out.str() == "tau,layer,mark_0,mark_1\n0.25,1,1.5,-2\n");
  }
}
