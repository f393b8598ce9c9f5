#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levymax/integrator.hpp"
#include "levymax/norms.hpp"
#include "levymax/point_process.hpp"
#include "levymax/semigroup.hpp"
#include "levymax/stats.hpp"

namespace levymax {

/// Deterministic jump integrands xi(t, z) = scale * profile(t) * z, where the
/// mark z is a vector of E. Profiles: "marks" (1), "time_ramp" (t),
/// "decaying" (exp(-t)).
struct IntegrandFamily {
  std::string name = "marks";
  double scale = 1.0;

  JumpField field(std::size_t dim) const;
  IntegrandFamily scaled(double c) const { return {name, scale * c}; }
};

/// Names accepted by IntegrandFamily.
const std::vector<std::string>& integrand_family_names();

struct ExperimentSpec {
  NormedSpace space;
  MarkSpace marks;
  IntegrandFamily family;
  std::optional<Semigroup> semigroup;
  /// Constant Wiener factor g (dim x k) for the Levy maximal inequality; it is
  /// multiplied by family.scale together with xi.
  std::optional<Matrix> wiener;
  double p = 2.0;
  double r = 2.0;
  double horizon = 1.0;
  std::size_t n_paths = 10000;
  std::size_t n_steps = 16;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  std::size_t n_folds = 10;
  std::size_t n_gaussians = 4096;
  bool homogeneity = true;
};

struct VariantResult {
  std::string label;
  Estimate rhs;
  Estimate ratio;              // lhs / rhs; NaN when both sides vanish
  double declared_constant;    // NaN when no classical constant is known
  bool violated = false;
  FoldSpread spread;
  double homogeneity_drift = 0.0;  // ratio(2 xi) - ratio(xi) on shared paths
  bool homogeneity_ok = true;
};

struct InequalityReport {
  std::string name;
  Estimate lhs;
  std::vector<VariantResult> variants;
  std::vector<std::string> warnings;
  double resolution = 0.0;  // relative sup-resolution diagnostic
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  bool holds() const;
};

/// E sup |u|^p against E(int int |xi|^r dN)^{p/r}.
InequalityReport bdg_report(const ExperimentSpec& spec);

/// For p <= r: one report per right-hand side E(int|xi|^r dnu)^{p/r},
/// E(int|xi|^r dN)^{p/r}, E int|xi|^p dnu, E int|xi|^p dN (the last three need p >= 1).
std::vector<InequalityReport> small_p_reports(const ExperimentSpec& spec);

/// For p >= r: E sup|u|^p against E int|xi|^p dnu + E(int|xi|^r dnu)^{p/r}, plus a
/// companion report with E(int|xi|^r dN)^{p/r} on the left.
std::vector<InequalityReport> lp_reports(const ExperimentSpec& spec);

/// (int int |f| dnu ds)^p against E(int int |f| dN)^p with the constant p^p.
InequalityReport kallenberg_report(const ExperimentSpec& spec);

/// Maximal inequality for the jump convolution with prefactor e^{alpha p T}.
InequalityReport convolution_maximal_report(const ExperimentSpec& spec);

/// Maximal inequality for Wiener plus jump convolutions (p >= 2, r = 2):
/// e^{alpha T} [(int |g|_gamma^2)^{p/2} + E int|xi|^p dnu + E(int|xi|^2 dnu)^{p/2}].
InequalityReport levy_maximal_report(const ExperimentSpec& spec);

struct TailRow {
  double radius = 0.0;
  std::size_t exceedances = 0;
  double probability = 0.0;
  Interval wilson;
  double bound = 0.0;
  bool ok = true;
};

struct TailReport {
  double lambda = 0.0;
  double m_lambda = 0.0;        // int int e^{sqrt(lambda)|xi|} lambda |xi|^2 dnu ds
  double smoothness_c = 0.0;    // calibrated Lipschitz constant of f_lambda' / lambda
  double c_lambda = 0.0;        // e^{1 + 3 C M_lambda}
  double confidence = 0.99;
  std::vector<TailRow> rows;
  bool monotone = true;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  bool holds() const;
};

/// P(sup |X| >= R) for the jump convolution against C_lambda e^{-(1 + lambda R^2)^{1/2}}.
TailReport tail_report(const ExperimentSpec& spec, double lambda, const std::vector<double>& radii,
                       double confidence = 0.99);

/// int_0^T int_Z e^{sqrt(lambda)|xi|} lambda |xi|^2 dnu ds.
double tail_hypothesis_integral(const JumpField& xi, const MarkSpace& marks, const NormedSpace& space,
                                double lambda, const std::vector<double>& grid);

}  // namespace levymax
