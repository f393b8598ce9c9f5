#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levymax/integrator.hpp"
#include "levymax/norms.hpp"
#include "levymax/point_process.hpp"

namespace levymax {

/// A real function on E with its derivative (and optionally its Hessian).
class TestFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  /// psi_p(x) = |x|^p; the Hessian is available on l^2 for p >= 2.
  static TestFunction power_norm(const NormedSpace& space, double p);
  /// f(x) = (1 + lambda |x|^2)^{1/2}; Hessian on l^2.
  static TestFunction exponential_tail(const NormedSpace& space, double lambda);
  /// x -> <v, x>.
  static TestFunction linear(Vector v);
  static TestFunction smooth_user(std::string name, ValueFn value, GradientFn gradient,
                                  HessianFn hessian = {});

  const std::string& name() const noexcept { return name_; }
  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }
  bool has_hessian() const noexcept { return static_cast<bool>(hessian_); }
  /// Throws CapabilityError when no second derivative was supplied.
  Matrix hessian(const Vector& x) const;

 private:
  TestFunction(std::string name, ValueFn v, GradientFn g, HessianFn h);

  std::string name_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

struct DerivativeCheck {
  double gradient_error = 0.0;  // max over points and components, relative to |grad|_inf
  double hessian_error = 0.0;   // same for the Hessian (0 when absent)
  bool ok = false;
};

/// Compares the supplied derivatives with central differences at step
/// 1e-5 (1 + |x|) on n_points standard Gaussian points.
DerivativeCheck validate_derivatives(const TestFunction& phi, std::size_t dim, std::size_t n_points,
                                     std::uint64_t seed, double tolerance = 1e-6);

/// Empirical sup |phi'(x) - phi'(y)|_{E*} / |x - y|^alpha over random pairs
/// with |x|, |y| <= radius.
double derivative_holder_probe(const TestFunction& phi, const NormedSpace& space, double alpha,
                               double radius, std::size_t n_samples, std::uint64_t seed);

/// R(x, y) = int_0^1 (phi'(x + s(y-x)) - phi'(x))(y - x) ds by 32-point Gauss-Legendre.
double taylor_remainder(const TestFunction& phi, const Vector& x, const Vector& y);

/// Jump times with marks in D_n, the union of the first n layers.
std::vector<double> interlace(const JumpPath& path, const MarkSpace& marks, std::size_t n);

struct ItoReport {
  double lhs = 0.0;                                   // phi(X_T) - phi(X_0)
  std::vector<std::pair<std::string, double>> terms;  // right-hand side, in formula order
  double residual = 0.0;                              // lhs - sum of terms
  double dt = 0.0;                                    // largest step of the base grid
  std::size_t n_jumps = 0;

  double term(const std::string& name) const;
  double rhs() const;
};

/// Term names used in ItoReport::terms.
namespace ito_terms {
inline constexpr const char* kDrift = "drift";
inline constexpr const char* kWiener = "wiener";
inline constexpr const char* kTrace = "trace";
inline constexpr const char* kEta = "eta_jumps_N";
inline constexpr const char* kXi = "xi_jumps_compensated";
inline constexpr const char* kCorrection = "correction_nu";
}  // namespace ito_terms

/// Checks the jump Ito formula pathwise for X = x0 + int a + int xi dN~ + int eta dN.
/// X is linear between grid nodes (coefficients frozen at midpoints), so every
/// ds-integral is evaluated by adaptive Gauss-Kronrod along exact segments and
/// the residual is at round-off level.
ItoReport ito_residual_jump(const TestFunction& phi, const Vector& x0, const Integrand& x,
                            const JumpPath& path, const MarkSpace& marks, const std::vector<double>& grid);

/// Adds int phi'(X)(g) dW (left point) and (1/2) int tr phi''(X)(g, g) ds.
/// Requires a Hessian. w must live on `grid` and is bridged to the jump times.
ItoReport ito_residual_levy(const TestFunction& phi, const Vector& x0, const Integrand& x,
                            const JumpPath& path, const MarkSpace& marks, const WienerPath& w,
                            const std::vector<double>& grid);

}  // namespace levymax
