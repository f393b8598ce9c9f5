#include "levymax/norms.hpp"

#include <cmath>
#include <random>

#include "levymax/error.hpp"
#include "levymax/rng.hpp"

namespace levymax {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_dim(const NormedSpace& space, const Vector& x, const char* where) {
  if (static_cast<std::size_t>(x.size()) != space.dim())
    throw ArgumentError(std::string(where) + ": vector has length " + std::to_string(x.size()) +
                        ", space has dim " + std::to_string(space.dim()));
}

// Real symmetric Fourier multiplier (1+|k|^2)^{s/2} acting on a physical field.
Vector apply_bessel(const SpectralGrid& grid, const Vector& x, double s) {
  const Eigen::ArrayXcd c = bessel_multiplier(grid, grid.forward(x.array()), s);
  return grid.inverse(c).matrix();
}

Vector gaussian_vector(Philox4x32& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& c : v) c = normal(rng);
  return v;
}

// Gradient of |y|_q^p with respect to y for the grid L^q norm with cell weight w.
Vector lq_power_gradient(const Vector& y, double q, double p, double weight, double norm_y) {
  Vector g(y.size());
  const double scale = p * std::pow(norm_y, p - q) * weight;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    g[i] = scale * std::pow(std::abs(y[i]), q - 1.0) * sign(y[i]);
  return g;
}

}  // namespace

NormedSpace::NormedSpace(std::size_t dim, std::variant<LqNorm, SpectralSobolevNorm> kind, double r)
    : dim_(dim), kind_(kind), r_(r) {}

NormedSpace NormedSpace::lq(std::size_t dim, double q, double smoothness_r) {
  if (dim == 0) throw ArgumentError("space dimension must be positive");
  if (!(q >= 1.0)) throw ArgumentError("l^q norm needs q >= 1");
  if (!(smoothness_r > 1.0 && smoothness_r <= 2.0))
    throw ArgumentError("r must lie in (1,2]");
  if (q < 2.0 && smoothness_r > q)
    throw ArgumentError("l^q with q < 2 is only r-smooth for r <= q");
  return NormedSpace(dim, LqNorm{q}, smoothness_r);
}

NormedSpace NormedSpace::spectral_sobolev(std::size_t n, double s, double q, double smoothness_r) {
  if (!(q >= 1.0)) throw ArgumentError("spectral Sobolev norm needs q >= 1");
  if (!(smoothness_r > 1.0 && smoothness_r <= 2.0))
    throw ArgumentError("r must lie in (1,2]");
  if (q < 2.0 && smoothness_r > q)
    throw ArgumentError("L^q with q < 2 is only r-smooth for r <= q");
  NormedSpace space(n * n, SpectralSobolevNorm{s, q, n}, smoothness_r);
  space.grid_.emplace(n);
  return space;
}

bool NormedSpace::is_hilbert() const noexcept {
  if (const auto* lq = std::get_if<LqNorm>(&kind_)) return lq->q == 2.0;
  return false;
}

double NormedSpace::norm(const Vector& x) const {
  check_dim(*this, x, "norm");
  if (const auto* lq = std::get_if<LqNorm>(&kind_)) {
    if (lq->q == 2.0) return x.norm();
    if (lq->q == 1.0) return x.lpNorm<1>();
    return std::pow(x.array().abs().pow(lq->q).sum(), 1.0 / lq->q);
  }
  const auto& sob = std::get<SpectralSobolevNorm>(kind_);
  return grid_lq_norm(*grid_, apply_bessel(*grid_, x, sob.s).array(), sob.q);
}

double NormedSpace::psi(const Vector& x, double p) const { return std::pow(norm(x), p); }

PowerNormDerivative psi_p_gradient(const NormedSpace& space, const Vector& x, double p) {
  check_dim(space, x, "psi_p_gradient");
  if (!(p > 1.0)) throw UnsupportedExponentError("psi_p derivative needs p > 1");
  if (p < space.smoothness_r())
    throw ArgumentError("psi_p derivative requires p >= the smoothness exponent r");
  PowerNormDerivative d{p, Vector::Zero(x.size())};
  const double nx = space.norm(x);
  if (nx == 0.0) return d;
  if (const auto* lq = std::get_if<LqNorm>(&space.kind())) {
    if (lq->q == 2.0)
      d.gradient = p * std::pow(nx, p - 2.0) * x;
    else
      d.gradient = lq_power_gradient(x, lq->q, p, 1.0, nx);
    return d;
  }
  const auto& sob = std::get<SpectralSobolevNorm>(space.kind());
  const SpectralGrid& grid = *space.grid();
  const Vector y = apply_bessel(grid, x, sob.s);
  d.gradient = apply_bessel(grid, lq_power_gradient(y, sob.q, p, grid.cell_area(), nx), sob.s);
  return d;
}

Vector norm_gradient(const NormedSpace& space, const Vector& x) {
  check_dim(space, x, "norm_gradient");
  const double nx = space.norm(x);
  if (nx == 0.0) throw ArgumentError("the norm is not differentiable at 0");
  if (const auto* lq = std::get_if<LqNorm>(&space.kind())) {
    if (lq->q == 2.0) return x / nx;
    return lq_power_gradient(x, lq->q, 1.0, 1.0, nx);
  }
  const auto& sob = std::get<SpectralSobolevNorm>(space.kind());
  const SpectralGrid& grid = *space.grid();
  const Vector y = apply_bessel(grid, x, sob.s);
  return apply_bessel(grid, lq_power_gradient(y, sob.q, 1.0, grid.cell_area(), nx), sob.s);
}

Matrix psi_p_hessian(const NormedSpace& space, const Vector& x, double p) {
  check_dim(space, x, "psi_p_hessian");
  if (!space.is_hilbert())
    throw CapabilityError("second derivative of psi_p is only implemented on l^2");
  if (p < 2.0) throw UnsupportedExponentError("psi_p is C^2 only for p >= 2");
  const auto n = x.size();
  const double nx = x.norm();
  if (nx == 0.0) return p == 2.0 ? Matrix(2.0 * Matrix::Identity(n, n)) : Matrix::Zero(n, n);
  Matrix h = p * std::pow(nx, p - 2.0) * Matrix::Identity(n, n);
  if (p != 2.0) h += p * (p - 2.0) * std::pow(nx, p - 4.0) * (x * x.transpose());
  return h;
}

double functional_norm(const NormedSpace& space, const Vector& g, std::uint64_t seed) {
  check_dim(space, g, "functional_norm");
  if (const auto* lq = std::get_if<LqNorm>(&space.kind())) {
    if (lq->q == 1.0) return g.lpNorm<Eigen::Infinity>();
    if (lq->q == 2.0) return g.norm();
    const double dual = lq->q / (lq->q - 1.0);
    return std::pow(g.array().abs().pow(dual).sum(), 1.0 / dual);
  }
  constexpr int kDirections = 512;
  double best = 0.0;
  const double ng = space.norm(g);
  if (ng > 0.0) best = std::abs(g.dot(g)) / ng;
  Philox4x32 rng({seed, streams::kProbe, 0});
  for (int i = 0; i < kDirections; ++i) {
    const Vector h = gaussian_vector(rng, space.dim());
    const double nh = space.norm(h);
    if (nh > 0.0) best = std::max(best, std::abs(g.dot(h)) / nh);
  }
  return best;
}

double holder_constant_probe(const NormedSpace& space, double p, double r, std::size_t n_samples,
                             std::uint64_t seed) {
  if (n_samples == 0) throw ArgumentError("holder_constant_probe: n_samples must be positive");
  if (p < r) throw ArgumentError("holder_constant_probe: need p >= r");
  Philox4x32 rng({seed, streams::kProbe, 1});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = space.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vector x = gaussian_vector(rng, dim);
    x *= std::pow(10.0, -1.0 + 2.0 * unit(rng)) / std::max(space.norm(x), 1e-300);
    Vector y;
    switch (i % 3) {
      case 0: {  // local perturbation over several scales
        Vector u = gaussian_vector(rng, dim);
        u /= std::max(space.norm(u), 1e-300);
        y = x + space.norm(x) * std::pow(10.0, -3.0 + 4.0 * unit(rng)) * u;
        break;
      }
      case 1:  // collinear pairs, including points near the origin
        y = (2.0 * unit(rng) - 1.0) * x;
        break;
      default:
        y = gaussian_vector(rng, dim);
        y *= std::pow(10.0, -1.0 + 2.0 * unit(rng)) / std::max(space.norm(y), 1e-300);
    }
    const double dist = space.norm(x - y);
    if (dist == 0.0) continue;
    const Vector diff = psi_p_gradient(space, x, p).gradient - psi_p_gradient(space, y, p).gradient;
    const double op = functional_norm(space, diff, seed + i);
    const double scale = std::pow(space.norm(x) + space.norm(y), r - p) * std::pow(dist, 1.0 - r);
    best = std::max(best, op * scale);
  }
  return best;
}

Estimate type_constant_probe(const NormedSpace& space, double r, std::size_t n_martingales,
                             std::size_t n_steps, std::uint64_t seed) {
  if (!(r > 1.0 && r <= 2.0)) throw ArgumentError("r must lie in (1,2]");
  if (n_martingales < 2 || n_steps == 0)
    throw ArgumentError("type_constant_probe: need >= 2 martingales and >= 1 step");
  const std::size_t dim = space.dim();
  constexpr int kFamilies = 3;
  Estimate worst{0.0, 0.0};
  for (int family = 0; family < kFamilies; ++family) {
    std::vector<double> terminal(n_martingales), increments(n_martingales);
    for (std::size_t m = 0; m < n_martingales; ++m) {
      Philox4x32 rng({seed, streams::kProbe + 16 + static_cast<std::uint32_t>(family),
                      static_cast<std::uint32_t>(m)});
      Vector state = Vector::Zero(static_cast<Eigen::Index>(dim));
      double sum_increments = 0.0;
      for (std::size_t k = 0; k < n_steps; ++k) {
        const double eps = (rng() & 1u) ? 1.0 : -1.0;
        Vector step = gaussian_vector(rng, dim);
        switch (family) {
          case 0:  // constant scale
            break;
          case 1:  // scale adapted to the current size of the martingale
            step *= 1.0 + space.norm(state);
            break;
          default:  // increments aligned with the current position
            step = state + 0.5 * step;
        }
        const Vector delta = eps * step;
        sum_increments += std::pow(space.norm(delta), r);
        state += delta;
      }
      terminal[m] = std::pow(space.norm(state), r);
      increments[m] = sum_increments;
    }
    const Estimate e = ratio_estimate(terminal, increments);
    if (e.value > worst.value) worst = e;
  }
  return worst;
}

double gamma_norm(const NormedSpace& space, const GammaFactor& g, std::size_t n_gaussians,
                  std::uint64_t seed) {
  if (n_gaussians == 0) throw ArgumentError("gamma_norm: n_gaussians must be positive");
  if (static_cast<std::size_t>(g.matrix.rows()) != space.dim())
    throw ArgumentError("gamma_norm: operator rows must equal the space dimension");
  Philox4x32 rng({seed, streams::kProbe + 8, 0});
  std::vector<double> sq(n_gaussians);
  for (std::size_t i = 0; i < n_gaussians; ++i) {
    const Vector gamma = gaussian_vector(rng, g.k());
    const double v = space.norm(g.matrix * gamma);
    sq[i] = v * v;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(n_gaussians));
}

}  // namespace levymax
