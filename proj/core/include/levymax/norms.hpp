#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <variant>

#include "levymax/spectral.hpp"
#include "levymax/stats.hpp"

namespace levymax {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LqNorm {
  double q = 2.0;
};

/// Bessel-potential Sobolev norm |(1+|k|^2)^{s/2} f|_{L^q} of a real field
/// sampled on an n x n periodic grid (so dim = n*n).
struct SpectralSobolevNorm {
  double s = 0.0;
  double q = 2.0;
  std::size_t n = 16;
};

/// A finite-dimensional normed space together with its declared martingale
/// type / smoothness exponent r in (1, 2].
class NormedSpace {
 public:
  static NormedSpace lq(std::size_t dim, double q, double smoothness_r = 2.0);
  static NormedSpace spectral_sobolev(std::size_t n, double s, double q, double smoothness_r = 2.0);

  std::size_t dim() const noexcept { return dim_; }
  double smoothness_r() const noexcept { return r_; }
  const std::variant<LqNorm, SpectralSobolevNorm>& kind() const noexcept { return kind_; }
  bool is_hilbert() const noexcept;

  double norm(const Vector& x) const;
  /// psi_p(x) = |x|^p.
  double psi(const Vector& x, double p) const;

  /// The sampling grid of a spectral_sobolev space, nullptr for l^q.
  const SpectralGrid* grid() const noexcept { return grid_ ? &*grid_ : nullptr; }

 private:
  NormedSpace(std::size_t dim, std::variant<LqNorm, SpectralSobolevNorm> kind, double r);

  std::size_t dim_;
  std::variant<LqNorm, SpectralSobolevNorm> kind_;
  double r_;
  std::optional<SpectralGrid> grid_;

};

/// Coordinates of the functional psi_p'(x) in L(E, R): psi_p'(x)(h) = gradient . h.
struct PowerNormDerivative {
  double p = 2.0;
  Vector gradient;

  double apply(const Vector& h) const { return gradient.dot(h); }
};

/// Derivative of psi_p = |.|^p at x. At x = 0 the zero functional is returned
/// (p > 1). Throws UnsupportedExponentError for p <= 1 and ArgumentError for
/// p below the declared smoothness exponent.
PowerNormDerivative psi_p_gradient(const NormedSpace& space, const Vector& x, double p);

/// Gradient of x -> |x| at x != 0.
Vector norm_gradient(const NormedSpace& space, const Vector& x);

/// Hessian of psi_p, available on Hilbert (l^2) spaces for p >= 2.
Matrix psi_p_hessian(const NormedSpace& space, const Vector& x, double p);

/// Operator norm of the functional h -> g.h on the space: the exact dual norm
/// for l^q; for spectral norms the maximum over 512 random unit directions and
/// the direction aligned with g.
double functional_norm(const NormedSpace& space, const Vector& g, std::uint64_t seed = 0);

/// Empirical maximum of
///   |psi_p'(x) - psi_p'(y)| (|x|+|y|)^{r-p} |x-y|^{1-r}
/// over n_samples random pairs x != y. Throws for n_samples == 0 or p < r.
double holder_constant_probe(const NormedSpace& space, double p, double r, std::size_t n_samples,
                             std::uint64_t seed);

/// Empirical ratio E|M_n|^r / sum_k E|M_k - M_{k-1}|^r over simulated
/// martingales with sign-symmetric increments and adapted random scales. The
/// largest ratio over the built-in martingale families is returned, with its SE.
Estimate type_constant_probe(const NormedSpace& space, double r, std::size_t n_martingales,
                             std::size_t n_steps, std::uint64_t seed);

/// An operator g in gamma(H; E) written as a dim x k matrix.
struct GammaFactor {
  Matrix matrix;
  std::size_t k() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
};

/// (mean over n_gaussians standard Gaussian vectors gamma of |g gamma|^2)^{1/2}.
double gamma_norm(const NormedSpace& space, const GammaFactor& g, std::size_t n_gaussians,
                  std::uint64_t seed);

}  // namespace levymax
