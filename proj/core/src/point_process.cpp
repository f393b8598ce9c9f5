#include "levymax/point_process.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "levymax/error.hpp"
#include "levymax/rng.hpp"

namespace levymax {

namespace {

// Gauss-Legendre nodes on [0, 1] with weights summing to 1.
template <unsigned N>
std::vector<std::pair<double, double>> unit_gauss_nodes() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.emplace_back(0.5 + 0.5 * x[i], 0.5 * w[i]);
    if (x[i] != 0.0) out.emplace_back(0.5 - 0.5 * x[i], 0.5 * w[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, double>> unit_nodes_for_dim(std::size_t dim) {
  if (dim <= 1) return unit_gauss_nodes<32>();
  if (dim == 2) return unit_gauss_nodes<16>();
  if (dim == 3) return unit_gauss_nodes<8>();
  if (dim == 4) return unit_gauss_nodes<5>();
  if (dim <= 6) return unit_gauss_nodes<4>();
  throw CapabilityError("uniform mark laws are supported up to dimension 6");
}

std::vector<double> normalised(const std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw ArgumentError("discrete mark law needs positive total probability");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) throw ArgumentError("discrete mark law has a negative probability");
    out[i] = p[i] / total;
  }
  return out;
}

void validate_law(const MarkLaw& law) {
  if (const auto* d = std::get_if<DiscreteLaw>(&law)) {
    if (d->values.empty() || d->values.size() != d->probabilities.size())
      throw ArgumentError("discrete mark law needs matching non-empty values and probabilities");
    for (const auto& v : d->values)
      if (v.size() != d->values.front().size())
        throw ArgumentError("discrete mark law values differ in dimension");
    normalised(d->probabilities);
  } else if (const auto* u = std::get_if<UniformBox>(&law)) {
    if (u->lo.size() != u->hi.size() || u->lo.size() == 0)
      throw ArgumentError("uniform mark law needs bounds of equal positive dimension");
    if ((u->hi.array() < u->lo.array()).any()) throw ArgumentError("uniform mark law has hi < lo");
  }
}

Eigen::VectorXd draw_mark(const MarkLaw& law, Philox4x32& rng) {
  return std::visit(
      [&](const auto& l) -> Eigen::VectorXd {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) {
          return l.value;
        } else if constexpr (std::is_same_v<L, DiscreteLaw>) {
          const auto p = normalised(l.probabilities);
          const double u = rng.uniform01();
          double acc = 0.0;
          for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            acc += p[i];
            if (u < acc) return l.values[i];
          }
          return l.values.back();
        } else {
          Eigen::VectorXd v(l.lo.size());
          for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = l.lo[i] + (l.hi[i] - l.lo[i]) * rng.uniform01();
          return v;
        }
      },
      law);
}

}  // namespace

std::size_t mark_dim(const MarkLaw& law) {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>)
          return static_cast<std::size_t>(l.value.size());
        else if constexpr (std::is_same_v<L, DiscreteLaw>)
          return l.values.empty() ? 0 : static_cast<std::size_t>(l.values.front().size());
        else
          return static_cast<std::size_t>(l.lo.size());
      },
      law);
}

std::vector<QuadratureNode> law_nodes(const MarkLaw& law) {
  validate_law(law);
  if (const auto* pm = std::get_if<PointMass>(&law)) return {{1.0, pm->value}};
  if (const auto* d = std::get_if<DiscreteLaw>(&law)) {
    const auto p = normalised(d->probabilities);
    std::vector<QuadratureNode> out;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) out.push_back({p[i], d->values[i]});
    return out;
  }
  const auto& box = std::get<UniformBox>(law);
  const auto dim = static_cast<std::size_t>(box.lo.size());
  const auto axis = unit_nodes_for_dim(dim);
  std::vector<QuadratureNode> out{{1.0, Eigen::VectorXd(static_cast<Eigen::Index>(dim))}};
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<QuadratureNode> next;
    next.reserve(out.size() * axis.size());
    for (const auto& node : out)
      for (const auto& [x, w] : axis) {
        QuadratureNode n = node;
        n.weight *= w;
        n.value[static_cast<Eigen::Index>(d)] = box.lo[d] + (box.hi[d] - box.lo[d]) * x;
        next.push_back(std::move(n));
      }
    out = std::move(next);
  }
  return out;
}

MarkSpace::MarkSpace(std::vector<Layer> layers, bool finite, double tail)
    : layers_(std::move(layers)), finite_(finite), tail_mass_(tail) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (!(layer.mass >= 0.0) || !std::isfinite(layer.mass))
      throw ArgumentError("layer '" + layer.id + "' needs a finite non-negative mass");
    validate_law(layer.law);
    const std::size_t d = levymax::mark_dim(layer.law);
    if (l == 0) mark_dim_ = d;
    if (d != mark_dim_) throw ArgumentError("all layers must draw marks of the same dimension");
    if (layer.mass == 0.0) continue;
    for (auto& q : law_nodes(layer.law)) nodes_.push_back({l, layer.mass * q.weight, std::move(q.value)});
  }
}

MarkSpace MarkSpace::finite(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ArgumentError("finite mark space needs at least one atom");
  std::vector<Layer> layers;
  for (auto& a : atoms) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw ArgumentError("atom '" + a.id + "' needs a positive finite weight");
    layers.push_back({a.id, a.weight, PointMass{std::move(a.value)}});
  }
  return MarkSpace(std::move(layers), true, 0.0);
}

MarkSpace MarkSpace::layered(std::vector<Layer> shells, std::size_t n_max, double beyond_mass) {
  if (shells.empty() || n_max == 0) throw ArgumentError("layered mark space needs at least one layer");
  if (!(beyond_mass >= 0.0)) throw ArgumentError("tail mass must be non-negative");
  double tail = beyond_mass;
  if (shells.size() > n_max) {
    for (std::size_t l = n_max; l < shells.size(); ++l) tail += shells[l].mass;
    shells.resize(n_max);
  }
  return MarkSpace(std::move(shells), false, tail);
}

bool MarkSpace::total_mass_finite() const noexcept { return std::isfinite(tail_mass_); }

double MarkSpace::simulated_mass() const noexcept {
  double m = 0.0;
  for (const auto& l : layers_) m += l.mass;
  return m;
}

void JumpPath::write_csv(std::ostream& out) const {
  std::size_t dim = 0;
  for (const auto& e : events) dim = std::max<std::size_t>(dim, e.mark.value.size());
  out << "tau,layer";
  for (std::size_t i = 0; i < dim; ++i) out << ",mark_" << i;
  out << '\n';
  const auto old = out.precision(17);
  for (const auto& e : events) {
    out << e.time << ',' << e.mark.layer;
    for (Eigen::Index i = 0; i < e.mark.value.size(); ++i) out << ',' << e.mark.value[i];
    out << '\n';
  }
  out.precision(old);
}

JumpPath sample_jump_path(const MarkSpace& marks, double horizon, std::uint64_t seed,
                          std::uint32_t replicate) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("horizon T must be positive");
  JumpPath path;
  path.horizon = horizon;
  path.seed = seed;
  path.replicate = replicate;
  struct Keyed {
    double time;
    std::size_t layer;
    std::size_t index;
    Eigen::VectorXd value;
  };
  std::vector<Keyed> all;
  for (std::size_t l = 0; l < marks.size(); ++l) {
    const Layer& layer = marks.layers()[l];
    if (layer.mass == 0.0) continue;
    Philox4x32 rng({seed, static_cast<std::uint32_t>(l), replicate});
    std::poisson_distribution<long> count_law(layer.mass * horizon);
    const long count = count_law(rng);
    for (long i = 0; i < count; ++i) {
      // 1 - u lies in (0, 1], so times land in (0, T].
      const double time = horizon * (1.0 - rng.uniform01());
      all.push_back({time, l, static_cast<std::size_t>(i), draw_mark(layer.law, rng)});
    }
  }
  std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.index < b.index;
  });
  path.events.reserve(all.size());
  for (auto& k : all) path.events.push_back({k.time, {k.layer, std::move(k.value)}});
  return path;
}

std::size_t counting_measure(const JumpPath& path, double t0, double t1,
                             const EventPredicate& region) {
  if (!(t0 < t1)) throw ArgumentError("counting_measure: need t0 < t1");
  auto first = std::upper_bound(path.events.begin(), path.events.end(), t0,
                                [](double t, const JumpEvent& e) { return t < e.time; });
  std::size_t n = 0;
  for (auto it = first; it != path.events.end() && it->time <= t1; ++it)
    if (!region || region(*it)) ++n;
  return n;
}

Eigen::MatrixXd WienerPath::values() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(increments.rows() + 1, increments.cols());
  for (Eigen::Index i = 0; i < increments.rows(); ++i) w.row(i + 1) = w.row(i) + increments.row(i);
  return w;
}

WienerPath WienerPath::refine(const std::vector<double>& extra_times) const {
  std::vector<double> extra;
  for (double t : extra_times)
    if (t > 0.0 && t < horizon()) extra.push_back(t);
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());

  Philox4x32 rng({seed, streams::kBridge, replicate});
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd w = values();
  const auto kk = increments.cols();

  WienerPath out;
  out.seed = seed;
  out.replicate = replicate;
  out.times.push_back(0.0);
  std::vector<Eigen::RowVectorXd> node_values{w.row(0)};
  std::size_t e = 0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double b = times[i + 1];
    Eigen::RowVectorXd wb = w.row(static_cast<Eigen::Index>(i + 1));
    while (e < extra.size() && extra[e] < b) {
      const double t = extra[e++];
      const double a = out.times.back();
      if (t <= a) continue;
      const Eigen::RowVectorXd& wa = node_values.back();
      const double frac = (t - a) / (b - a);
      const double sd = std::sqrt((t - a) * (b - t) / (b - a));
      Eigen::RowVectorXd wt = wa + frac * (wb - wa);
      for (Eigen::Index j = 0; j < kk; ++j) wt[j] += sd * normal(rng);
      out.times.push_back(t);
      node_values.push_back(std::move(wt));
    }
    out.times.push_back(b);
    node_values.push_back(std::move(wb));
  }
  out.increments.resize(static_cast<Eigen::Index>(out.times.size() - 1), kk);
  for (std::size_t i = 0; i + 1 < node_values.size(); ++i)
    out.increments.row(static_cast<Eigen::Index>(i)) = node_values[i + 1] - node_values[i];
  return out;
}

WienerPath WienerPath::coarsen(std::size_t factor) const {
  if (factor == 0 || n_steps() % factor != 0)
    throw ArgumentError("coarsen: factor must divide the number of steps");
  WienerPath out;
  out.seed = seed;
  out.replicate = replicate;
  const std::size_t m = n_steps() / factor;
  out.increments = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), increments.cols());
  for (std::size_t i = 0; i <= m; ++i) out.times.push_back(times[i * factor]);
  for (std::size_t i = 0; i < n_steps(); ++i)
    out.increments.row(static_cast<Eigen::Index>(i / factor)) += increments.row(static_cast<Eigen::Index>(i));
  return out;
}

WienerPath sample_wiener(double horizon, std::size_t n_steps, std::size_t k, std::uint64_t seed,
                         std::uint32_t replicate) {
  if (!(horizon > 0.0)) throw ArgumentError("horizon T must be positive");
  if (n_steps == 0 || k == 0) throw ArgumentError("sample_wiener: need n_steps >= 1 and k >= 1");
  WienerPath w;
  w.seed = seed;
  w.replicate = replicate;
  const double dt = horizon / static_cast<double>(n_steps);
  w.times.resize(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) w.times[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
  w.times.back() = horizon;
  w.increments.resize(static_cast<Eigen::Index>(n_steps), static_cast<Eigen::Index>(k));
  Philox4x32 rng({seed, streams::kWiener, replicate});
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (Eigen::Index i = 0; i < w.increments.rows(); ++i)
    for (Eigen::Index j = 0; j < w.increments.cols(); ++j) w.increments(i, j) = normal(rng);
  return w;
}

}  // namespace levymax
