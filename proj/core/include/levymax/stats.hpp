#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace levymax {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Pairwise (cascade) summation. The association order depends only on the
/// length of the input, so reductions are reproducible bit for bit.
double pairwise_sum(std::span<const double> values);

/// Sample mean and its standard error sd/sqrt(n).
Estimate mean_estimate(std::span<const double> samples);

/// Ratio of means mean(x)/mean(y) from paired samples with a delta-method SE.
Estimate ratio_estimate(std::span<const double> x, std::span<const double> y);

/// (estimate)^exponent with the delta-method SE.
Estimate power_estimate(Estimate e, double exponent);

/// Sample covariance of paired samples.
double sample_covariance(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes out of n at the given two-sided
/// confidence level.
Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence);

/// Two-sided standard normal quantile for a confidence level (0.95 -> 1.95996...).
double normal_quantile_two_sided(double confidence);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct FoldSpread {
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;
};

/// Worker count used when a caller passes jobs == 0.
unsigned default_jobs();

/// Evaluates fn(i) for i in [0, n) on up to `jobs` threads and returns the
/// results in index order. Work is split into contiguous blocks, and each
/// result depends only on its index, so the output does not depend on `jobs`.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<T> out(n);
  if (jobs == 0) jobs = default_jobs();
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (unsigned w = 0; w < jobs; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Min, max and standard deviation of the per-fold ratios
/// sum(numerator)/sum(denominator); fold f holds replicas i with i % n_folds == f.
FoldSpread fold_spread(std::span<const double> numerator, std::span<const double> denominator,
                       std::size_t n_folds = 10);

}  // namespace levymax
