#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <memory>

namespace levymax {

using Complex = std::complex<double>;

/// Periodic n x n grid on the torus [0, 2*pi)^2 with FFT transforms.
///
/// Coefficients are stored row-major by wavevector index: entry i1*n + i2
/// holds the mode k = (wavenumber(i1), wavenumber(i2)) and physical samples
/// are stored the same way at x = (2*pi*i1/n, 2*pi*i2/n). The normalisation is
/// f(x) = sum_k c_k exp(i k.x), so c_0 is the spatial mean.
class SpectralGrid {
 public:
  explicit SpectralGrid(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ * n_; }

  /// Wavenumber for array index i: {0, 1, ..., n/2, -n/2+1, ..., -1}.
  int wavenumber(std::size_t i) const noexcept {
    return i <= n_ / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n_);
  }
  int k1(std::size_t flat) const noexcept { return wavenumber(flat / n_); }
  int k2(std::size_t flat) const noexcept { return wavenumber(flat % n_); }
  double k_squared(std::size_t flat) const noexcept {
    const double a = k1(flat), b = k2(flat);
    return a * a + b * b;
  }
  /// Flat index of the mode (k1, k2); wavenumbers are taken modulo n.
  std::size_t index_of(int k1, int k2) const noexcept;

  /// 2/3-rule cutoff: modes with max(|k1|,|k2|) <= (n-1)/3 survive, which
  /// keeps quadratic products of retained modes alias-free against them.
  int dealias_cutoff() const noexcept { return static_cast<int>((n_ - 1) / 3); }
  bool retained(std::size_t flat) const noexcept;

  double cell_area() const noexcept;
  double domain_area() const noexcept;

  Eigen::ArrayXcd forward(const Eigen::ArrayXd& physical) const;
  Eigen::ArrayXd inverse(const Eigen::ArrayXcd& coeffs) const;
  /// Inverse transform without discarding the imaginary part.
  Eigen::ArrayXcd inverse_complex(const Eigen::ArrayXcd& coeffs) const;

 private:
  struct Plans;
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

/// Grid L^q norm (q >= 1) of a physical field with uniform cell weights.
double grid_lq_norm(const SpectralGrid& grid, const Eigen::ArrayXd& physical, double q);

/// Applies the Bessel-potential multiplier (1+|k|^2)^{s/2} to coefficients.
Eigen::ArrayXcd bessel_multiplier(const SpectralGrid& grid, const Eigen::ArrayXcd& coeffs, double s);

}  // namespace levymax
