#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "levymax/point_process.hpp"
#include "levymax/spectral.hpp"

namespace levymax::qge {

/// Spectral coefficients of a real field on a SpectralGrid.
using Field = Eigen::ArrayXcd;

struct Velocity {
  Field v1;
  Field v2;
};

/// L^2 inner product on the torus.
double inner(const SpectralGrid& grid, const Field& f, const Field& g);
double l2_norm(const SpectralGrid& grid, const Field& f);
/// |grad f|_{L^2}.
double gradient_norm(const SpectralGrid& grid, const Field& f);
/// |(1+|k|^2)^{s/2} f|_{L^q} evaluated on the physical grid.
double sobolev_norm(const SpectralGrid& grid, const Field& f, double s, double q);
/// L^4 norm of the pointwise Euclidean length of a velocity field.
double velocity_l4(const SpectralGrid& grid, const Velocity& v);

/// Zeroes every mode outside the 2/3-rule band and the mean.
Field dealias(const SpectralGrid& grid, Field f);

/// e^{-t|k|^2} f.
Field heat(const SpectralGrid& grid, const Field& f, double t);

/// Mean-zero real field with independent Gaussian modes for max(|k1|,|k2|) <= max_mode
/// (capped at the dealiasing band), scaled to the given L^2 norm.
Field random_band_limited(const SpectralGrid& grid, int max_mode, double l2, std::uint64_t seed,
                          std::uint32_t replicate = 0);

/// v = (-R_2 theta, R_1 theta) with R_j = F^{-1}[(-i k_j/|k|) F], the real
/// Riesz transform (without the -i the velocity of a real field is imaginary).
/// Throws if theta has a non-zero mean.
Velocity riesz_velocity(const SpectralGrid& grid, const Field& theta);

/// max_k |k . v(k)| (zero for a divergence-free field).
double divergence_defect(const SpectralGrid& grid, const Velocity& v);

/// B(R psi, phi) = (R psi . grad) phi, product in physical space, dealiased.
Field transport(const SpectralGrid& grid, const Field& psi, const Field& phi);

/// B(R theta, theta).
inline Field nonlinear_term(const SpectralGrid& grid, const Field& theta) {
  return transport(grid, theta, theta);
}

/// A bundle of Fourier modes excited together: the amplitude field is
/// sum cos(k . x) over the modes, rescaled so that |xi|_{W^{-s,4}} = target_norm.
struct ModeBundle {
  std::vector<std::pair<int, int>> modes;
  double rate = 1.0;
  double target_norm = 1.0;
};

struct NoiseSpec {
  std::vector<ModeBundle> bundles;
  double s = 0.25;         // in (0, 1/2)
  bool symmetric = true;   // +/- amplitudes with equal weight
};

/// Jump noise for the Z-equation. Marks are (bundle index, sign).
class NoiseModel {
 public:
  NoiseModel(const SpectralGrid& grid, NoiseSpec spec);

  const NoiseSpec& spec() const noexcept { return spec_; }
  const MarkSpace& marks() const noexcept { return marks_; }
  const Field& amplitude(std::size_t bundle) const { return amplitudes_.at(bundle); }
  /// int_Z xi dnu: zero for symmetric laws.
  const Field& compensator_rate() const noexcept { return compensator_; }
  /// int_0^T int_Z |xi|^2_{W^{-s,4}} dnu ds = T sum rate_i target_i^2.
  double assumption_integral(double horizon) const;
  /// xi for one mark.
  Field jump(const Mark& mark) const;

 private:
  NoiseSpec spec_;
  MarkSpace marks_;
  std::vector<Field> amplitudes_;
  Field compensator_;
};

struct FieldPath {
  std::vector<double> times;
  std::vector<Field> values;
};

struct ZPath : FieldPath {
  JumpPath jumps;
};

/// Z(t) = int_0^t e^{-(t-s)A} xi dN~ stepped exactly per mode on a uniform grid.
ZPath ou_convolution_z(const SpectralGrid& grid, const NoiseModel& noise, double horizon,
                       std::size_t n_steps, std::uint64_t seed, std::uint32_t replicate = 0);

/// Exponential Euler for dY + AY dt + B(R(h+Y+Z), h+Y+Z) dt = 0 on the grid of z,
/// where h(t) = e^{-tA} background (zero when no background is given).
FieldPath solve_y(const SpectralGrid& grid, const ZPath& z, const Field& y0,
                  const std::optional<Field>& background = std::nullopt);

/// theta(t_j) = e^{-t_j A} theta0 + Y(t_j) + Z(t_j).
FieldPath assemble_theta(const SpectralGrid& grid, const Field& theta0, const FieldPath& y, const FieldPath& z);

/// Relative L^2 defect at the final time of the mild form
/// theta(T) = e^{-TA} theta0 - int_0^T e^{-(T-s)A} B(R theta, theta) ds + Z(T),
/// with the time integral computed exactly for B interpolated linearly between nodes.
double mild_residual(const SpectralGrid& grid, const Field& theta0, const FieldPath& theta, const FieldPath& z);

struct RunConfig {
  std::size_t n = 64;
  double horizon = 0.5;
  std::size_t n_steps = 250;
  NoiseSpec noise;
  int theta0_modes = 6;
  double theta0_l2 = 1.0;
  std::uint64_t seed = 1;
};

struct Run {
  SpectralGrid grid;
  Field theta0;
  ZPath z;
  FieldPath y;       // solution of the Y-equation with Y(0) = 0 and background e^{-tA} theta0
  FieldPath theta;
};

Run run(const RunConfig& config, std::uint32_t replicate = 0);

/// Empirical sup of |R theta|_{L^4} / |theta|_{L^4} over random band-limited
/// fields and the supplied extra fields.
double riesz_l4_constant(const SpectralGrid& grid, std::size_t n_fields, std::uint64_t seed,
                         const std::vector<Field>& extra = {});

/// |Y|_{L^4} / (|grad Y|^{1/2} |Y|^{1/2}); the classical bound is 2^{1/4}.
double ladyzhenskaya_ratio(const SpectralGrid& grid, const Field& y);

struct LedgerRow {
  double t = 0.0;
  double y_l2_sq = 0.0;       // |Y~|^2 with Y~ = theta - Z
  double grad_y_l2_sq = 0.0;
  double z_l4 = 0.0;
  double energy_lhs = 0.0;    // (|Y~_{j+1}|^2 - |Y~_j|^2)/(2 dt) + |grad Y~_{j+1}|^2 / 2
  double energy_rhs = 0.0;    // C1/2 |Y~_j|^2 |Z_j|^4 + C2/2 |Z_j|^4
  double ladyzhenskaya = 0.0;
};

struct Check {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
  double margin() const { return rhs - lhs; }
};

struct EnergyLedger {
  double riesz_constant = 0.0;  // empirical L^4 bound of the Riesz velocity
  double ladyzhenskaya_max = 0.0;
  double c = 0.0;               // Riesz constant inflated if Ladyzhenskaya exceeds 2^{1/4}
  double c1 = 0.0;              // 27 c^4 / 2
  double c2 = 0.0;              // 2 c^2
  std::vector<LedgerRow> rows;  // one per step (last row carries only state values)
  Check stepwise;               // worst stepwise energy inequality
  Check gronwall_sup;           // sup |Y~|^2 bound
  Check gronwall_gradient;      // int |grad Y~|^2 bound, |Z|^4 in the last term
  Check gronwall_gradient_z2;   // same with |Z|^2 in the last term
  Check ladyzhenskaya;          // worst ratio against 2^{1/4}
  bool ladyzhenskaya_flagged = false;

  bool holds() const { return stepwise.ok && gronwall_sup.ok && gronwall_gradient.ok && ladyzhenskaya.ok; }
};

/// Energy diagnostics for Y~ = theta - Z, which solves the Y-equation with Y~(0) = theta0.
EnergyLedger energy_diagnostics(const Run& run, double riesz_constant);

}  // namespace levymax::qge
