#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "levymax/norms.hpp"
#include "levymax/point_process.hpp"
#include "levymax/semigroup.hpp"

namespace levymax {

/// xi(t, z) with values in a dim-dimensional space. Evaluators must be pure.
struct JumpField {
  std::size_t dim = 1;
  std::function<Vector(double, const Mark&)> f;

  Vector operator()(double t, const Mark& z) const { return f(t, z); }
  explicit operator bool() const noexcept { return static_cast<bool>(f); }
};

/// g(t) in gamma(H; E), a dim x k matrix.
struct WienerField {
  std::size_t dim = 1;
  std::size_t k = 1;
  std::function<Matrix(double)> f;

  Matrix operator()(double t) const { return f(t); }
  explicit operator bool() const noexcept { return static_cast<bool>(f); }
};

/// Drift a(t).
struct DriftField {
  std::size_t dim = 1;
  std::function<Vector(double)> f;

  Vector operator()(double t) const { return f(t); }
  explicit operator bool() const noexcept { return static_cast<bool>(f); }
};

/// The coefficients of X = X_0 + int a ds + int g dW + int xi dN~ + int eta dN.
/// Parts left empty are zero. xi and eta must have disjoint supports.
struct Integrand {
  std::size_t dim = 1;
  JumpField xi;
  JumpField eta;
  WienerField g;
  DriftField a;
};

/// Constant-in-time jump field xi(t, z) = scale * z (marks live in E).
JumpField mark_proportional(std::size_t dim, double scale);

/// A cadlag path on a grid that contains every jump time.
struct SamplePath {
  std::vector<double> times;
  Matrix values;       // dim x nodes, X(t_i)
  Matrix left_limits;  // dim x nodes, X(t_i-); equal to values off jump nodes
  std::vector<char> is_jump;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t size() const noexcept { return times.size(); }
  Vector terminal() const { return values.col(values.cols() - 1); }

  /// sup_t |X_t| taken over node values and left limits.
  double sup_norm(const NormedSpace& space) const;

  /// Columns: t, x_0, ..., left_0, ..., is_jump.
  void write_csv(std::ostream& out) const;
};

/// n+1 equispaced nodes on [0, T].
std::vector<double> uniform_grid(double horizon, std::size_t n_steps);

/// The grid with every jump time of `path` inserted (duplicates merged).
std::vector<double> augmented_grid(const std::vector<double>& grid, const JumpPath& path);

/// int_Z xi(t, z) nu(dz) over the simulated layers.
Vector compensator(const JumpField& xi, const MarkSpace& marks, double t);

/// u_t = sum_{tau <= t} xi(tau, z) - int_0^t int_Z xi dnu ds. The compensator
/// is integrated by the midpoint rule on the jump-augmented grid.
SamplePath integrate_compensated(const JumpField& xi, const JumpPath& path, const MarkSpace& marks,
                                 const std::vector<double>& grid);

/// Running sum of f over the jumps (integral against N).
SamplePath integrate_counting(const JumpField& f, const JumpPath& path, const std::vector<double>& grid);

/// Left-point sums of g(t_i) dW_i on the grid of w.
SamplePath integrate_wiener(const WienerField& g, const WienerPath& w);

/// X_t = int_0^t int_Z e^{(t-s)A} xi(s, z) N~(ds, dz), stepped exactly in the
/// jumps with the compensator frozen at interval midpoints.
SamplePath convolve(const JumpField& xi, const JumpPath& path, const MarkSpace& marks,
                    const Semigroup& semigroup, const std::vector<double>& grid);

/// Wiener convolution (left point, e^{Delta A} g(t_i) dW_i) plus convolve().
/// w must live on `grid`; it is refined to the jump times by Brownian bridges.
SamplePath convolve_levy(const WienerField& g, const JumpField& xi, const WienerPath& w,
                         const JumpPath& path, const MarkSpace& marks, const Semigroup& semigroup,
                         const std::vector<double>& grid);

struct QuadraticFunctionals {
  SamplePath counting;  // int int |xi|^r dN
  SamplePath meyer;     // int int |xi|^r dnu ds
};

QuadraticFunctionals quadratic_functionals(const JumpField& xi, const JumpPath& path,
                                           const MarkSpace& marks, double r, const NormedSpace& space,
                                           const std::vector<double>& grid);

/// int_0^T int_Z |xi(s,z)|^power dnu ds by the midpoint rule on `grid`.
double nu_moment(const JumpField& xi, const MarkSpace& marks, double power, const NormedSpace& space,
                 const std::vector<double>& grid);

}  // namespace levymax
