#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "levymax/inequalities.hpp"
#include "levymax/qge.hpp"

namespace levymax::cli {

/// Schema violation; the message carries "line L, column C" when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_kinds();

struct SpaceConfig {
  std::string kind = "lq";  // lq | spectral_sobolev
  std::size_t dim = 1;
  double q = 2.0;
  double s = 0.0;
  std::size_t n = 16;
  double r = 2.0;
};

struct LawConfig {
  std::string kind = "point";  // point | discrete | uniform
  std::vector<Eigen::VectorXd> values;
  std::vector<double> probabilities;
  Eigen::VectorXd lo, hi;
};

struct LayerConfig {
  std::string id;
  double mass = 0.0;
  LawConfig law;
};

struct MarksConfig {
  std::vector<Atom> atoms;
  std::vector<LayerConfig> layers;
  std::size_t n_max = 0;
  double beyond_mass = 0.0;
  bool layered() const { return !layers.empty(); }
};

struct SemigroupConfig {
  std::string kind = "identity";  // identity | diagonal | matrix
  Eigen::VectorXd eigs;
  Eigen::MatrixXd matrix;
  double alpha = 0.0;
};

struct McConfig {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 16;
  unsigned jobs = 0;
  std::size_t folds = 10;
  std::size_t n_gaussians = 4096;
  double confidence = 0.99;
  bool homogeneity = true;
};

struct TailConfig {
  double lambda = 0.1;
  std::vector<double> radii{1, 2, 4, 8};
};

struct ItoConfig {
  std::string function = "power_norm";  // power_norm | exponential_tail | linear
  double p = 2.0;
  double lambda = 1.0;
  Eigen::VectorXd v;                    // linear functional
  Eigen::VectorXd x0;
  Eigen::VectorXd drift;
  std::vector<std::string> eta_layers;  // layers assigned to eta (integrated against N)
  std::vector<std::size_t> levels{64, 128, 256, 512, 1024};
  double tolerance = 1e-10;
  double slope = 0.5;
  double slope_tolerance = 0.15;
};

struct QgeConfig {
  qge::RunConfig run;
  std::size_t runs = 1;
  std::size_t riesz_fields = 64;
  std::size_t snapshots = 5;
  std::vector<std::size_t> mild_levels{50, 100, 200, 400, 800};
};

struct OutputConfig {
  std::string directory;
  bool json = true;
  bool csv = true;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  double p = 2.0;
  double horizon = 1.0;
  SpaceConfig space;
  MarksConfig marks;
  IntegrandFamily integrand;
  std::optional<SemigroupConfig> semigroup;
  std::optional<Eigen::MatrixXd> wiener;
  McConfig mc;
  TailConfig tail;
  ItoConfig ito;
  QgeConfig qge;
  OutputConfig output;
};

/// Parses and validates a YAML config. Unknown keys, wrong types and violated
/// hypotheses raise ConfigError with the offending line.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Canonical form of everything that influences results (output location and
/// worker count excluded).
nlohmann::json resolved(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

NormedSpace build_space(const ExperimentConfig& config);
MarkSpace build_marks(const ExperimentConfig& config);
std::optional<Semigroup> build_semigroup(const ExperimentConfig& config);
ExperimentSpec build_spec(const ExperimentConfig& config);

}  // namespace levymax::cli
