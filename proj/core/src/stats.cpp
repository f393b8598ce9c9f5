#include "levymax/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "levymax/error.hpp"

namespace levymax {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate mean_estimate(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw ArgumentError("mean_estimate: no samples");
  const double mean = pairwise_sum(samples) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("sample_covariance: bad sizes");
  const std::size_t n = x.size();
  const double mx = pairwise_sum(x) / static_cast<double>(n);
  const double my = pairwise_sum(y) / static_cast<double>(n);
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  return pairwise_sum(prod) / static_cast<double>(n - 1);
}

Estimate ratio_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ArgumentError("ratio_estimate: bad sizes");
  const Estimate ex = mean_estimate(x);
  const Estimate ey = mean_estimate(y);
  if (ey.value == 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const double r = ex.value / ey.value;
  if (x.size() < 2) return {r, 0.0};
  const double n = static_cast<double>(x.size());
  const double vx = ex.se * ex.se * n;
  const double vy = ey.se * ey.se * n;
  const double cxy = sample_covariance(x, y);
  const double var = (vx - 2.0 * r * cxy + r * r * vy) / (ey.value * ey.value * n);
  return {r, std::sqrt(std::max(var, 0.0))};
}

Estimate power_estimate(Estimate e, double exponent) {
  const double v = std::pow(e.value, exponent);
  const double d = exponent * std::pow(e.value, exponent - 1.0);
  return {v, std::abs(d) * e.se};
}

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ArgumentError("confidence must lie in (0,1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + confidence / 2.0);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0) throw ArgumentError("wilson_interval: zero trials");
  const double z = normal_quantile_two_sided(confidence);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("least_squares: need >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double res = y[i] - fit.intercept - fit.slope * x[i];
      rss += res * res;
    }
    fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

FoldSpread fold_spread(std::span<const double> numerator, std::span<const double> denominator,
                       std::size_t n_folds) {
  if (numerator.size() != denominator.size() || n_folds == 0)
    throw ArgumentError("fold_spread: bad sizes");
  std::vector<double> ratios;
  for (std::size_t f = 0; f < n_folds; ++f) {
    std::vector<double> num, den;
    for (std::size_t i = f; i < numerator.size(); i += n_folds) {
      num.push_back(numerator[i]);
      den.push_back(denominator[i]);
    }
    if (num.empty()) continue;
    const double d = pairwise_sum(den);
    if (d != 0.0) ratios.push_back(pairwise_sum(num) / d);
  }
  FoldSpread out;
  if (ratios.empty()) return out;
  out.min = *std::min_element(ratios.begin(), ratios.end());
  out.max = *std::max_element(ratios.begin(), ratios.end());
  if (ratios.size() > 1) {
    const double m = pairwise_sum(ratios) / static_cast<double>(ratios.size());
    double v = 0.0;
    for (double r : ratios) v += (r - m) * (r - m);
    out.stddev = std::sqrt(v / static_cast<double>(ratios.size() - 1));
  }
  return out;
}

unsigned default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace levymax
