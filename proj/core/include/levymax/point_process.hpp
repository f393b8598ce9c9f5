#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace levymax {

/// Degenerate law: every mark equals `value`.
struct PointMass {
  Eigen::VectorXd value;
};

/// Finitely many mark values with probabilities (normalised on use).
struct DiscreteLaw {
  std::vector<Eigen::VectorXd> values;
  std::vector<double> probabilities;
};

/// Uniform law on the box [lo, hi] (componentwise).
struct UniformBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

using MarkLaw = std::variant<PointMass, DiscreteLaw, UniformBox>;

/// Dimension of the mark vectors drawn from a law.
std::size_t mark_dim(const MarkLaw& law);

struct QuadratureNode {
  double weight;
  Eigen::VectorXd value;
};

/// Nodes and probability weights for integrating against a mark law. Exact for
/// point masses and discrete laws; tensor Gauss-Legendre for boxes (32 nodes
/// per axis in 1-D, fewer per axis in higher dimension, at most 4096 nodes).
std::vector<QuadratureNode> law_nodes(const MarkLaw& law);

/// A region of finite intensity: mass nu(layer) and the normalised mark law.
struct Layer {
  std::string id;
  double mass = 0.0;
  MarkLaw law;
};

/// An atom of a finite mark space: a single mark value carrying weight nu_i.
struct Atom {
  std::string id;
  double weight = 0.0;
  Eigen::VectorXd value;
};

/// Mark space (Z, nu) as a list of disjoint finite-mass layers. A layered
/// space represents the exhausting sequence D_1 c D_2 c ... by its shells:
/// D_n is the union of the first n layers.
class MarkSpace {
 public:
  /// Each atom becomes its own layer with a point-mass law.
  static MarkSpace finite(std::vector<Atom> atoms);

  /// Shells beyond n_max are dropped; their mass plus `beyond_mass` (which may
  /// be +infinity for a sigma-finite nu) is reported as the truncation tail.
  static MarkSpace layered(std::vector<Layer> shells, std::size_t n_max, double beyond_mass = 0.0);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }
  bool is_finite_kind() const noexcept { return finite_; }
  bool total_mass_finite() const noexcept;
  /// Mass of the simulated layers.
  double simulated_mass() const noexcept;
  double truncation_tail_mass() const noexcept { return tail_mass_; }
  std::size_t mark_dim() const noexcept { return mark_dim_; }

  /// Expectation-weighted nodes over all simulated layers: the weights sum to
  /// simulated_mass(), so sum w f(z) = int f d nu over the simulated region.
  struct Node {
    std::size_t layer;
    double weight;
    Eigen::VectorXd value;
  };
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  MarkSpace(std::vector<Layer> layers, bool finite, double tail);

  std::vector<Layer> layers_;
  bool finite_;
  double tail_mass_;
  std::size_t mark_dim_ = 0;
  std::vector<Node> nodes_;
};

struct Mark {
  std::size_t layer = 0;
  Eigen::VectorXd value;
};

struct JumpEvent {
  double time = 0.0;
  Mark mark;
};

/// A realisation of the Poisson point process on (0, T] x Z. Events are sorted
/// by time; ties (probability zero) are ordered by layer, then by draw index.
struct JumpPath {
  double horizon = 0.0;
  std::vector<JumpEvent> events;
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;

  /// Columns: tau, layer, mark_0, mark_1, ...
  void write_csv(std::ostream& out) const;
};

/// Samples one path: per layer, Poisson(mass * T) events with conditionally
/// uniform times on (0, T] and marks from the layer law. Layer l draws from
/// its own stream (seed, l, replicate).
JumpPath sample_jump_path(const MarkSpace& marks, double horizon, std::uint64_t seed,
                          std::uint32_t replicate = 0);

using EventPredicate = std::function<bool(const JumpEvent&)>;

/// Number of events with t0 < tau <= t1 satisfying `region` (all events when empty).
std::size_t counting_measure(const JumpPath& path, double t0, double t1,
                             const EventPredicate& region = {});

/// Brownian path of a k-dimensional Wiener process on a time grid.
struct WienerPath {
  std::vector<double> times;      // n+1 nodes, times[0] = 0
  Eigen::MatrixXd increments;     // n x k, row i is W(times[i+1]) - W(times[i])
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;

  std::size_t k() const noexcept { return static_cast<std::size_t>(increments.cols()); }
  std::size_t n_steps() const noexcept { return static_cast<std::size_t>(increments.rows()); }
  double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }

  /// W at every node, (n+1) x k with W(0) = 0.
  Eigen::MatrixXd values() const;

  /// Same path on a finer grid: the extra times (inside (0, T)) are filled by
  /// Brownian-bridge sampling from the (seed, bridge, replicate) stream.
  WienerPath refine(const std::vector<double>& extra_times) const;

  /// Sums blocks of `factor` consecutive increments (uniform grids).
  WienerPath coarsen(std::size_t factor) const;
};

/// Uniform-grid Wiener increments, N(0, dt) per coordinate.
WienerPath sample_wiener(double horizon, std::size_t n_steps, std::size_t k, std::uint64_t seed,
                         std::uint32_t replicate = 0);

}  // namespace levymax
