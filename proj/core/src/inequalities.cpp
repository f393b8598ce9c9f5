#include "levymax/inequalities.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <utility>

#include "levymax/error.hpp"
#include "levymax/ito.hpp"

namespace levymax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMomentSteps = 1024;

enum class PathKind { martingale, convolution, levy };

struct PathSample {
  double sup = 0.0;
  double max_increment = 0.0;
  double counting_r = 0.0;
  double counting_p = 0.0;
  double counting_1 = 0.0;
};

struct Moments {
  double nu_r = 0.0;  // int int |xi|^r dnu ds
  double nu_p = 0.0;
  double nu_1 = 0.0;
};

void validate(const ExperimentSpec& spec) {
  if (!(spec.r > 1.0 && spec.r <= 2.0)) throw ArgumentError("r must lie in (1,2]");
  if (!(spec.p > 0.0)) throw ArgumentError("p must be positive");
  if (!(spec.horizon > 0.0)) throw ArgumentError("horizon T must be positive");
  if (spec.n_paths < 2) throw ArgumentError("need at least two paths");
  if (spec.n_steps == 0) throw ArgumentError("need at least one time step");
  if (spec.marks.mark_dim() != spec.space.dim())
    throw ArgumentError("marks must be vectors of the space (mark dim " + std::to_string(spec.marks.mark_dim()) +
                        ", space dim " + std::to_string(spec.space.dim()) + ")");
  if (spec.semigroup && spec.semigroup->dim() != spec.space.dim())
    throw ArgumentError("semigroup dimension differs from the space dimension");
}

Moments moments(const ExperimentSpec& spec, const IntegrandFamily& family) {
  const JumpField xi = family.field(spec.space.dim());
  const auto fine = uniform_grid(spec.horizon, kMomentSteps);
  return {nu_moment(xi, spec.marks, spec.r, spec.space, fine),
          nu_moment(xi, spec.marks, spec.p, spec.space, fine),
          nu_moment(xi, spec.marks, 1.0, spec.space, fine)};
}

std::vector<PathSample> simulate(const ExperimentSpec& spec, const IntegrandFamily& family, PathKind kind) {
  const std::size_t dim = spec.space.dim();
  const JumpField xi = family.field(dim);
  const auto grid = uniform_grid(spec.horizon, spec.n_steps);
  const Semigroup identity = Semigroup::identity(dim);
  const Semigroup& sg = spec.semigroup ? *spec.semigroup : identity;
  WienerField g;
  if (kind == PathKind::levy && spec.wiener) {
    const Matrix gm = family.scale * *spec.wiener;
    g = {dim, static_cast<std::size_t>(gm.cols()), [gm](double) { return gm; }};
  }
  return parallel_map<PathSample>(spec.n_paths, spec.jobs, [&](std::size_t i) {
    const auto rep = static_cast<std::uint32_t>(i);
    const JumpPath path = sample_jump_path(spec.marks, spec.horizon, spec.seed, rep);
    SamplePath x;
    switch (kind) {
      case PathKind::martingale:
        x = integrate_compensated(xi, path, spec.marks, grid);
        break;
      case PathKind::convolution:
        x = convolve(xi, path, spec.marks, sg, grid);
        break;
      case PathKind::levy: {
        const std::size_t k = g ? g.k : 1;
        const WienerPath w = sample_wiener(spec.horizon, spec.n_steps, k, spec.seed, rep);
        x = convolve_levy(g, xi, w, path, spec.marks, sg, grid);
        break;
      }
    }
    PathSample s;
    s.sup = x.sup_norm(spec.space);
    for (Eigen::Index c = 0; c + 1 < x.values.cols(); ++c)
      s.max_increment = std::max(s.max_increment, spec.space.norm(x.left_limits.col(c + 1) - x.values.col(c)));
    for (const auto& e : path.events) {
      const double n = spec.space.norm(xi(e.time, e.mark));
      s.counting_r += std::pow(n, spec.r);
      s.counting_p += std::pow(n, spec.p);
      s.counting_1 += n;
    }
    return s;
  });
}

struct Sides {
  std::vector<double> lhs;
  std::vector<std::pair<std::string, std::vector<double>>> rhs;
  double resolution = 0.0;
};

using SideBuilder = std::function<Sides(const ExperimentSpec&, const IntegrandFamily&)>;

double resolution_of(const std::vector<PathSample>& samples, double p) {
  std::vector<double> base(samples.size()), padded(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    base[i] = std::pow(samples[i].sup, p);
    padded[i] = std::pow(samples[i].sup + samples[i].max_increment, p) - base[i];
  }
  const double b = pairwise_sum(base);
  return b > 0.0 ? pairwise_sum(padded) / b : 0.0;
}

std::vector<double> column(const std::vector<PathSample>& s, double (*f)(const PathSample&, double), double arg) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = f(s[i], arg);
  return out;
}

double declared_doob(const ExperimentSpec& spec) {
  const bool trivial = !spec.semigroup || spec.semigroup->is_trivial();
  return (spec.p == 2.0 && spec.r == 2.0 && spec.space.is_hilbert() && trivial) ? 4.0 : kNaN;
}

VariantResult make_variant(const std::string& label, const std::vector<double>& x, const std::vector<double>& y,
                           double declared, std::size_t n_folds) {
  VariantResult v;
  v.label = label;
  v.rhs = mean_estimate(y);
  v.ratio = ratio_estimate(x, y);
  v.declared_constant = declared;
  const double lhs = mean_estimate(x).value;
  if (v.rhs.value == 0.0) {
    v.ratio = {kNaN, 0.0};
    v.violated = lhs > 0.0;
  } else {
    v.violated = !std::isfinite(v.ratio.value) ||
                 (std::isfinite(declared) && v.ratio.value > declared + 3.0 * v.ratio.se);
  }
  v.spread = fold_spread(x, y, n_folds);
  return v;
}

InequalityReport assemble(const std::string& name, const ExperimentSpec& spec, SideBuilder build,
                          const std::vector<double>& declared) {
  const Sides base = build(spec, spec.family);
  InequalityReport report;
  report.name = name;
  report.lhs = mean_estimate(base.lhs);
  report.resolution = base.resolution;
  report.n_paths = spec.n_paths;
  report.seed = spec.seed;
  if (base.resolution > 0.1)
    report.warnings.push_back("sup under-resolved: continuous variation is " +
                              std::to_string(100.0 * base.resolution) + "% of the left-hand side");
  for (std::size_t v = 0; v < base.rhs.size(); ++v)
    report.variants.push_back(make_variant(base.rhs[v].first, base.lhs, base.rhs[v].second, declared[v], spec.n_folds));
  if (spec.homogeneity) {
    const Sides doubled = build(spec, spec.family.scaled(2.0));
    for (std::size_t v = 0; v < base.rhs.size(); ++v) {
      VariantResult& vr = report.variants[v];
      const Estimate r2 = ratio_estimate(doubled.lhs, doubled.rhs[v].second);
      if (!std::isfinite(vr.ratio.value) && !std::isfinite(r2.value)) continue;
      vr.homogeneity_drift = r2.value - vr.ratio.value;
      vr.homogeneity_ok = std::abs(vr.homogeneity_drift) <= 3.0 * std::max(vr.ratio.se, 1e-12 * std::abs(vr.ratio.value));
      if (!vr.homogeneity_ok) report.warnings.push_back("homogeneity drift in variant " + vr.label);
    }
  }
  return report;
}

double sup_p(const PathSample& s, double p) { return std::pow(s.sup, p); }
double counting_r_pow(const PathSample& s, double e) { return std::pow(s.counting_r, e); }
double counting_p_val(const PathSample& s, double) { return s.counting_p; }

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

std::vector<double> scaled(std::vector<double> v, double c) {
  for (double& x : v) x *= c;
  return v;
}

Sides martingale_sides(const ExperimentSpec& spec, const IntegrandFamily& family,
                       const std::vector<PathSample>& samples, PathKind kind,
                       const std::vector<std::string>& labels, double prefactor) {
  const Moments m = moments(spec, family);
  const double q = spec.p / spec.r;
  const std::size_t n = samples.size();
  Sides s;
  s.lhs = column(samples, sup_p, spec.p);
  if (kind != PathKind::martingale) s.resolution = resolution_of(samples, spec.p);
  for (const auto& label : labels) {
    std::vector<double> y;
    if (label == "counting_r")
      y = column(samples, counting_r_pow, q);
    else if (label == "counting_p")
      y = column(samples, counting_p_val, 0.0);
    else if (label == "compensator_r")
      y = constant(n, std::pow(m.nu_r, q));
    else if (label == "compensator_p")
      y = constant(n, m.nu_p);
    else if (label == "two_term")
      y = constant(n, m.nu_p + std::pow(m.nu_r, q));
    else
      throw ArgumentError("unknown right-hand side '" + label + "'");
    s.rhs.emplace_back(label, scaled(std::move(y), prefactor));
  }
  return s;
}

std::vector<std::string> convolution_labels(const ExperimentSpec& spec) {
  std::vector<std::string> labels{"counting_r"};
  if (spec.p >= spec.r) labels.push_back("two_term");
  if (spec.p <= spec.r) labels.push_back("compensator_r");
  if (spec.p <= spec.r && spec.p >= 1.0) labels.push_back("compensator_p");
  return labels;
}

}  // namespace

JumpField IntegrandFamily::field(std::size_t dim) const {
  const double c = scale;
  std::function<double(double)> profile;
  if (name == "marks")
    profile = [](double) { return 1.0; };
  else if (name == "time_ramp")
    profile = [](double t) { return t; };
  else if (name == "decaying")
    profile = [](double t) { return std::exp(-t); };
  else
    throw ArgumentError("unknown integrand family '" + name + "'");
  return {dim, [dim, c, profile](double t, const Mark& z) -> Vector {
            if (static_cast<std::size_t>(z.value.size()) != dim)
              throw ArgumentError("mark dimension differs from the space dimension");
            return (c * profile(t)) * z.value;
          }};
}

const std::vector<std::string>& integrand_family_names() {
  static const std::vector<std::string> names{"marks", "time_ramp", "decaying"};
  return names;
}

bool InequalityReport::holds() const {
  return std::none_of(variants.begin(), variants.end(), [](const VariantResult& v) { return v.violated; });
}

bool TailReport::holds() const {
  return std::all_of(rows.begin(), rows.end(), [](const TailRow& r) { return r.ok; });
}

InequalityReport bdg_report(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.p < 1.0) throw ArgumentError("bdg_report needs p >= 1");
  return assemble("bdg", spec,
                  [](const ExperimentSpec& s, const IntegrandFamily& f) {
                    const auto samples = simulate(s, f, PathKind::martingale);
                    return martingale_sides(s, f, samples, PathKind::martingale, {"counting_r"}, 1.0);
                  },
                  {declared_doob(spec)});
}

std::vector<InequalityReport> small_p_reports(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.p > spec.r) throw ArgumentError("small_p_reports needs p <= r");
  std::vector<std::string> labels{"compensator_r"};
  if (spec.p >= 1.0) {
    labels.push_back("counting_r");
    labels.push_back("compensator_p");
    labels.push_back("counting_p");
  }
  // One simulation shared by all variants; split into one report per variant.
  const double doob = declared_doob(spec);
  InequalityReport joint = assemble(
      "small_p", spec,
      [&labels](const ExperimentSpec& s, const IntegrandFamily& f) {
        const auto samples = simulate(s, f, PathKind::martingale);
        return martingale_sides(s, f, samples, PathKind::martingale, labels, 1.0);
      },
      std::vector<double>(labels.size(), doob));
  std::vector<InequalityReport> out;
  for (const auto& v : joint.variants) {
    InequalityReport r = joint;
    r.name = "small_p." + v.label;
    r.variants = {v};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InequalityReport> lp_reports(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.p < spec.r) throw ArgumentError("lp_reports needs p >= r");
  const bool doob = std::isfinite(declared_doob(spec));
  InequalityReport main = assemble(
      "lp", spec,
      [](const ExperimentSpec& s, const IntegrandFamily& f) {
        const auto samples = simulate(s, f, PathKind::martingale);
        return martingale_sides(s, f, samples, PathKind::martingale, {"two_term"}, 1.0);
      },
      {doob ? 2.0 : kNaN});
  InequalityReport companion = assemble(
      "lp.companion", spec,
      [](const ExperimentSpec& s, const IntegrandFamily& f) {
        const auto samples = simulate(s, f, PathKind::martingale);
        Sides sides = martingale_sides(s, f, samples, PathKind::martingale, {"two_term"}, 1.0);
        sides.lhs = column(samples, counting_r_pow, s.p / s.r);
        return sides;
      },
      {kNaN});
  return {std::move(main), std::move(companion)};
}

InequalityReport kallenberg_report(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.p < 1.0) throw ArgumentError("kallenberg_report needs p >= 1");
  const double p = spec.p;
  return assemble(
      "kallenberg", spec,
      [](const ExperimentSpec& s, const IntegrandFamily& f) {
        const auto samples = simulate(s, f, PathKind::martingale);
        const Moments m = moments(s, f);
        Sides sides;
        sides.lhs = constant(samples.size(), std::pow(m.nu_1, s.p));
        std::vector<double> y(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) y[i] = std::pow(samples[i].counting_1, s.p);
        sides.rhs.emplace_back("counting_1", std::move(y));
        return sides;
      },
      {std::pow(p, p)});
}

InequalityReport convolution_maximal_report(const ExperimentSpec& spec) {
  validate(spec);
  if (!spec.semigroup) throw ArgumentError("convolution_maximal_report needs a semigroup");
  const auto labels = convolution_labels(spec);
  std::vector<double> declared;
  for (const auto& l : labels) {
    const double d = declared_doob(spec);
    declared.push_back(l == "two_term" && std::isfinite(d) ? 2.0 : d);
  }
  return assemble("conv-maximal", spec,
                  [&labels](const ExperimentSpec& s, const IntegrandFamily& f) {
                    const double pre = std::exp(s.semigroup->growth_alpha() * s.p * s.horizon);
                    const auto samples = simulate(s, f, PathKind::convolution);
                    return martingale_sides(s, f, samples, PathKind::convolution, labels, pre);
                  },
                  declared);
}

InequalityReport levy_maximal_report(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.p < 2.0 || spec.r != 2.0) throw ArgumentError("levy_maximal_report needs p >= 2 and r = 2");
  if (!spec.space.is_hilbert() && !std::holds_alternative<LqNorm>(spec.space.kind()))
    throw ArgumentError("levy_maximal_report needs a 2-smooth l^q space");
  if (const auto* lq = std::get_if<LqNorm>(&spec.space.kind()); lq && lq->q < 2.0)
    throw ArgumentError("levy_maximal_report needs q >= 2");
  if (spec.wiener && static_cast<std::size_t>(spec.wiener->rows()) != spec.space.dim())
    throw ArgumentError("Wiener factor g must have one row per space dimension");
  return assemble(
      "levy-maximal", spec,
      [](const ExperimentSpec& s, const IntegrandFamily& f) {
        const auto samples = simulate(s, f, PathKind::levy);
        const Moments m = moments(s, f);
        double gamma_sq = 0.0;
        if (s.wiener) {
          const double gn = gamma_norm(s.space, GammaFactor{f.scale * *s.wiener}, s.n_gaussians, s.seed);
          gamma_sq = gn * gn;
        }
        const double alpha = s.semigroup ? s.semigroup->growth_alpha() : 0.0;
        const double rhs = std::exp(alpha * s.horizon) *
                           (std::pow(gamma_sq * s.horizon, s.p / 2.0) + m.nu_p + std::pow(m.nu_r, s.p / 2.0));
        Sides sides;
        sides.lhs = column(samples, sup_p, s.p);
        sides.resolution = resolution_of(samples, s.p);
        sides.rhs.emplace_back("three_term", constant(samples.size(), rhs));
        return sides;
      },
      {declared_doob(spec)});
}

double tail_hypothesis_integral(const JumpField& xi, const MarkSpace& marks, const NormedSpace& space,
                                double lambda, const std::vector<double>& grid) {
  const double root = std::sqrt(lambda);
  double total = 0.0;
  Mark z;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    double rate = 0.0;
    for (const auto& node : marks.nodes()) {
      z.layer = node.layer;
      z.value = node.value;
      const double n = space.norm(xi(mid, z));
      rate += node.weight * std::exp(root * n) * lambda * n * n;
    }
    total += rate * (grid[i + 1] - grid[i]);
  }
  return total;
}

TailReport tail_report(const ExperimentSpec& spec, double lambda, const std::vector<double>& radii,
                       double confidence) {
  validate(spec);
  if (!(lambda > 0.0)) throw ArgumentError("tail_report needs lambda > 0");
  if (radii.empty()) throw ArgumentError("tail_report needs at least one radius");
  TailReport report;
  report.lambda = lambda;
  report.confidence = confidence;
  report.n_paths = spec.n_paths;
  report.seed = spec.seed;
  const JumpField xi = spec.family.field(spec.space.dim());
  report.m_lambda = tail_hypothesis_integral(xi, spec.marks, spec.space, lambda,
                                             uniform_grid(spec.horizon, kMomentSteps));
  if (!std::isfinite(report.m_lambda))
    throw HypothesisError("the exponential-moment hypothesis integral is not finite");
  const double r_max = *std::max_element(radii.begin(), radii.end());
  const TestFunction f = TestFunction::exponential_tail(spec.space, lambda);
  report.smoothness_c =
      derivative_holder_probe(f, spec.space, 1.0, std::max(r_max, 1.0 / std::sqrt(lambda)), 4000, spec.seed) / lambda;
  report.c_lambda = std::exp(1.0 + 3.0 * report.smoothness_c * report.m_lambda);

  const auto samples = simulate(spec, spec.family, PathKind::convolution);
  for (double radius : radii) {
    TailRow row;
    row.radius = radius;
    for (const auto& s : samples)
      if (s.sup >= radius) ++row.exceedances;
    row.probability = static_cast<double>(row.exceedances) / static_cast<double>(samples.size());
    row.wilson = wilson_interval(row.exceedances, samples.size(), confidence);
    row.bound = report.c_lambda * std::exp(-std::sqrt(1.0 + lambda * radius * radius));
    row.ok = row.wilson.hi <= row.bound;
    report.rows.push_back(row);
  }
  std::vector<TailRow> sorted = report.rows;
  std::sort(sorted.begin(), sorted.end(), [](const TailRow& a, const TailRow& b) { return a.radius < b.radius; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1].probability > sorted[i].probability) report.monotone = false;
  return report;
}

}  // namespace levymax
