#include "levymax/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "levymax/error.hpp"

namespace levymax {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralGrid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(std::size_t n) {
    const int ni = static_cast<int>(n);
    std::lock_guard lock(planner_mutex());
    auto* in = fftw_alloc_complex(n * n);
    auto* out = fftw_alloc_complex(n * n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_2d(ni, ni, in, out, FFTW_FORWARD, flags);
    backward = fftw_plan_dft_2d(ni, ni, in, out, FFTW_BACKWARD, flags);
    fftw_free(in);
    fftw_free(out);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralGrid::SpectralGrid(std::size_t n) : n_(n) {
  if (n < 4 || (n & (n - 1)) != 0) throw ArgumentError("grid size must be a power of two >= 4");
  plans_ = std::make_shared<const Plans>(n);
}

std::size_t SpectralGrid::index_of(int k1, int k2) const noexcept {
  const int ni = static_cast<int>(n_);
  const auto wrap = [ni](int k) { return static_cast<std::size_t>(((k % ni) + ni) % ni); };
  return wrap(k1) * n_ + wrap(k2);
}

bool SpectralGrid::retained(std::size_t flat) const noexcept {
  const int c = dealias_cutoff();
  return std::abs(k1(flat)) <= c && std::abs(k2(flat)) <= c;
}

double SpectralGrid::cell_area() const noexcept {
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n_);
  return h * h;
}

double SpectralGrid::domain_area() const noexcept {
  return 4.0 * std::numbers::pi * std::numbers::pi;
}

Eigen::ArrayXcd SpectralGrid::forward(const Eigen::ArrayXd& physical) const {
  if (static_cast<std::size_t>(physical.size()) != size())
    throw ArgumentError("forward: field size does not match grid");
  Eigen::ArrayXcd in = physical.cast<Complex>();
  Eigen::ArrayXcd out(in.size());
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= static_cast<double>(size());
  return out;
}

Eigen::ArrayXcd SpectralGrid::inverse_complex(const Eigen::ArrayXcd& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != size())
    throw ArgumentError("inverse: coefficient size does not match grid");
  Eigen::ArrayXcd in = coeffs;
  Eigen::ArrayXcd out(in.size());
  fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::ArrayXd SpectralGrid::inverse(const Eigen::ArrayXcd& coeffs) const {
  return inverse_complex(coeffs).real();
}

double grid_lq_norm(const SpectralGrid& grid, const Eigen::ArrayXd& physical, double q) {
  if (q < 1.0) throw ArgumentError("grid_lq_norm: q must be >= 1");
  const double w = grid.cell_area();
  if (q == 2.0) return std::sqrt(w * physical.square().sum());
  return std::pow(w * physical.abs().pow(q).sum(), 1.0 / q);
}

Eigen::ArrayXcd bessel_multiplier(const SpectralGrid& grid, const Eigen::ArrayXcd& coeffs,
                                  double s) {
  Eigen::ArrayXcd out(coeffs.size());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    out[i] = coeffs[i] * std::pow(1.0 + grid.k_squared(static_cast<std::size_t>(i)), s / 2.0);
  return out;
}

}  // namespace levymax
