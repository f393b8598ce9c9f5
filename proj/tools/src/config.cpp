#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "levymax/error.hpp"

namespace levymax::cli {

namespace {

std::string where(const YAML::Node& node) {
  if (!node.IsDefined()) return "";
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return "";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& what) {
  throw ConfigError(where(node) + (path.empty() ? "" : path + ": ") + what);
}

// A mapping node with its dotted path; remembers which keys were read so that
// leftovers can be rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, path_, "expected a mapping");
  }

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  Section section(const std::string& key) {
    YAML::Node n = raw(key);
    if (!n) fail(node_, path_, "missing section '" + key + "'");
    return Section(n, child_path(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    YAML::Node n = raw(key);
    if (!n) return fallback;
    return as<T>(n, child_path(key));
  }

  template <class T>
  T require(const std::string& key) {
    YAML::Node n = raw(key);
    if (!n) fail(node_, path_, "missing key '" + key + "'");
    return as<T>(n, child_path(key));
  }

  void reject_unknown() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, path_, "unknown key '" + key + "'");
    }
  }

  template <class T>
  static T as(const YAML::Node& n, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, unsigned> ||
                    std::is_same_v<T, std::uint64_t>) {
        const auto v = n.as<long long>();
        if (v < 0) fail(n, path, "must be non-negative");
        return static_cast<T>(v);
      } else {
        return n.as<T>();
      }
    } catch (const YAML::Exception&) {
      fail(n, path, "has the wrong type");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::VectorXd as_vector(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return Eigen::VectorXd::Constant(1, Section::as<double>(n, path));
  if (!n.IsSequence() || n.size() == 0) fail(n, path, "expected a number or a non-empty list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = Section::as<double>(n[i], path);
  return v;
}

Eigen::MatrixXd as_matrix(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return Eigen::MatrixXd::Constant(1, 1, Section::as<double>(n, path));
  if (!n.IsSequence() || n.size() == 0) fail(n, path, "expected a matrix as a list of rows");
  const std::size_t rows = n.size();
  const std::size_t cols = n[0].IsSequence() ? n[0].size() : 1;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Eigen::VectorXd row = as_vector(n[i], path);
    if (static_cast<std::size_t>(row.size()) != cols) fail(n[i], path, "rows have different lengths");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

template <class T>
std::vector<T> as_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() == 0) fail(n, path, "expected a non-empty list");
  std::vector<T> out;
  for (const auto& item : n) out.push_back(Section::as<T>(item, path));
  return out;
}

void parse_space(Section s, SpaceConfig& out) {
  out.kind = s.get<std::string>("kind", "lq");
  out.r = s.get<double>("r", 2.0);
  out.q = s.get<double>("q", 2.0);
  if (out.kind == "lq") {
    out.dim = s.require<std::size_t>("dim");
    if (out.dim == 0) fail(s.raw("dim"), s.child_path("dim"), "must be positive");
  } else if (out.kind == "spectral_sobolev") {
    out.n = s.require<std::size_t>("n");
    out.s = s.get<double>("s", 0.0);
    out.dim = out.n * out.n;
  } else {
    fail(s.raw("kind"), s.child_path("kind"), "must be 'lq' or 'spectral_sobolev'");
  }
  if (!(out.q >= 1.0)) fail(s.raw("q"), s.child_path("q"), "q must be >= 1");
  if (!(out.r > 1.0 && out.r <= 2.0)) fail(s.raw("r"), s.child_path("r"), "r must lie in (1,2]");
  if (out.q < 2.0 && out.r > out.q) fail(s.raw("r"), s.child_path("r"), "r must not exceed q when q < 2");
  s.reject_unknown();
}

void check_dim(const YAML::Node& n, const std::string& path, const Eigen::VectorXd& v, std::size_t dim) {
  if (static_cast<std::size_t>(v.size()) != dim)
    fail(n, path, "has " + std::to_string(v.size()) + " components, the space has dimension " + std::to_string(dim));
}

LawConfig parse_law(Section s, std::size_t dim) {
  LawConfig law;
  law.kind = s.require<std::string>("kind");
  for (const char* key : {"value", "values", "probabilities", "lo", "hi"})
    if (!s.has(key) && ((law.kind == "point" && std::string(key) == "value") ||
                        (law.kind == "uniform" && (std::string(key) == "lo" || std::string(key) == "hi"))))
      fail(s.node(), s.path(), std::string("missing key '") + key + "'");
  if (law.kind == "point") {
    law.values.push_back(as_vector(s.raw("value"), s.child_path("value")));
    check_dim(s.raw("value"), s.child_path("value"), law.values[0], dim);
  } else if (law.kind == "discrete") {
    YAML::Node values = s.raw("values");
    if (!values || !values.IsSequence() || values.size() == 0)
      fail(s.node(), s.path(), "discrete law needs a non-empty 'values' list");
    for (const auto& v : values) {
      law.values.push_back(as_vector(v, s.child_path("values")));
      check_dim(v, s.child_path("values"), law.values.back(), dim);
    }
    law.probabilities = as_list<double>(s.raw("probabilities"), s.child_path("probabilities"));
    if (law.probabilities.size() != law.values.size())
      fail(s.raw("probabilities"), s.child_path("probabilities"), "needs one probability per value");
    for (double p : law.probabilities)
      if (!(p >= 0.0)) fail(s.raw("probabilities"), s.child_path("probabilities"), "must be non-negative");
  } else if (law.kind == "uniform") {
    law.lo = as_vector(s.raw("lo"), s.child_path("lo"));
    law.hi = as_vector(s.raw("hi"), s.child_path("hi"));
    check_dim(s.raw("lo"), s.child_path("lo"), law.lo, dim);
    check_dim(s.raw("hi"), s.child_path("hi"), law.hi, dim);
    if ((law.hi.array() < law.lo.array()).any()) fail(s.raw("hi"), s.child_path("hi"), "must be >= lo");
  } else {
    fail(s.raw("kind"), s.child_path("kind"), "law kind must be point, discrete or uniform");
  }
  s.reject_unknown();
  return law;
}

void parse_marks(Section s, std::size_t dim, MarksConfig& out) {
  const bool atoms = s.has("atoms"), layers = s.has("layers");
  if (atoms == layers) fail(s.node(), s.path(), "give exactly one of 'atoms' or 'layers'");
  if (atoms) {
    YAML::Node list = s.raw("atoms");
    if (!list.IsSequence() || list.size() == 0) fail(list, s.child_path("atoms"), "expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section a(list[i], s.child_path("atoms[" + std::to_string(i) + "]"));
      Atom atom;
      atom.id = a.get<std::string>("id", "atom" + std::to_string(i));
      atom.weight = a.require<double>("weight");
      if (!(atom.weight > 0.0)) fail(a.raw("weight"), a.child_path("weight"), "atom weights must be positive");
      if (!a.has("value")) fail(a.node(), a.path(), "missing key 'value'");
      atom.value = as_vector(a.raw("value"), a.child_path("value"));
      check_dim(a.raw("value"), a.child_path("value"), atom.value, dim);
      a.reject_unknown();
      out.atoms.push_back(std::move(atom));
    }
  } else {
    YAML::Node list = s.raw("layers");
    if (!list.IsSequence() || list.size() == 0) fail(list, s.child_path("layers"), "expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section l(list[i], s.child_path("layers[" + std::to_string(i) + "]"));
      LayerConfig layer;
      layer.id = l.get<std::string>("id", "layer" + std::to_string(i));
      layer.mass = l.require<double>("mass");
      if (!(layer.mass >= 0.0) || !std::isfinite(layer.mass))
        fail(l.raw("mass"), l.child_path("mass"), "layer mass must be finite and non-negative");
      layer.law = parse_law(l.section("law"), dim);
      l.reject_unknown();
      out.layers.push_back(std::move(layer));
    }
    out.n_max = s.get<std::size_t>("n_max", out.layers.size());
    out.beyond_mass = s.get<double>("beyond_mass", 0.0);
    if (!(out.beyond_mass >= 0.0)) fail(s.raw("beyond_mass"), s.child_path("beyond_mass"), "must be >= 0");
  }
  s.reject_unknown();
}

void parse_semigroup(Section s, std::size_t dim, SemigroupConfig& out) {
  out.kind = s.require<std::string>("kind");
  out.alpha = s.get<double>("alpha", 0.0);
  if (!(out.alpha >= 0.0)) fail(s.raw("alpha"), s.child_path("alpha"), "growth bound alpha must be >= 0");
  if (out.kind == "diagonal") {
    if (!s.has("eigs")) fail(s.node(), s.path(), "missing key 'eigs'");
    out.eigs = as_vector(s.raw("eigs"), s.child_path("eigs"));
    check_dim(s.raw("eigs"), s.child_path("eigs"), out.eigs, dim);
    if (out.eigs.maxCoeff() > out.alpha) fail(s.raw("eigs"), s.child_path("eigs"), "eigenvalues must not exceed alpha");
  } else if (out.kind == "matrix") {
    if (!s.has("matrix")) fail(s.node(), s.path(), "missing key 'matrix'");
    out.matrix = as_matrix(s.raw("matrix"), s.child_path("matrix"));
    if (static_cast<std::size_t>(out.matrix.rows()) != dim || static_cast<std::size_t>(out.matrix.cols()) != dim)
      fail(s.raw("matrix"), s.child_path("matrix"), "generator must be dim x dim");
  } else if (out.kind != "identity") {
    fail(s.raw("kind"), s.child_path("kind"), "semigroup kind must be identity, diagonal or matrix");
  }
  s.reject_unknown();
}

void parse_mc(Section s, McConfig& out) {
  out.n_paths = s.get<std::size_t>("n_paths", out.n_paths);
  out.n_steps = s.get<std::size_t>("n_steps", out.n_steps);
  out.jobs = s.get<unsigned>("jobs", out.jobs);
  out.folds = s.get<std::size_t>("folds", out.folds);
  out.n_gaussians = s.get<std::size_t>("n_gaussians", out.n_gaussians);
  out.confidence = s.get<double>("confidence", out.confidence);
  out.homogeneity = s.get<bool>("homogeneity", out.homogeneity);
  if (out.n_paths < 2) fail(s.raw("n_paths"), s.child_path("n_paths"), "need at least 2 paths");
  if (out.n_steps < 1) fail(s.raw("n_steps"), s.child_path("n_steps"), "need at least 1 step");
  if (out.folds < 1) fail(s.raw("folds"), s.child_path("folds"), "need at least 1 fold");
  if (out.n_gaussians < 1) fail(s.raw("n_gaussians"), s.child_path("n_gaussians"), "need at least 1 Gaussian");
  if (!(out.confidence > 0.0 && out.confidence < 1.0))
    fail(s.raw("confidence"), s.child_path("confidence"), "must lie in (0,1)");
  s.reject_unknown();
}

void parse_tail(Section s, TailConfig& out) {
  out.lambda = s.get<double>("lambda", out.lambda);
  if (!(out.lambda > 0.0)) fail(s.raw("lambda"), s.child_path("lambda"), "lambda must be positive");
  if (s.has("radii")) out.radii = as_list<double>(s.raw("radii"), s.child_path("radii"));
  for (double r : out.radii)
    if (!(r > 0.0)) fail(s.raw("radii"), s.child_path("radii"), "radii must be positive");
  s.reject_unknown();
}

void parse_ito(Section s, std::size_t dim, const MarksConfig& marks, ItoConfig& out) {
  out.function = s.get<std::string>("function", out.function);
  out.p = s.get<double>("p", out.p);
  out.lambda = s.get<double>("lambda", out.lambda);
  if (out.function == "linear") {
    out.v = s.has("v") ? as_vector(s.raw("v"), s.child_path("v")) : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
    check_dim(s.raw("v"), s.child_path("v"), out.v, dim);
  } else if (out.function == "power_norm") {
    if (!(out.p > 1.0)) fail(s.raw("p"), s.child_path("p"), "power_norm needs p > 1");
  } else if (out.function == "exponential_tail") {
    if (!(out.lambda > 0.0)) fail(s.raw("lambda"), s.child_path("lambda"), "lambda must be positive");
  } else {
    fail(s.raw("function"), s.child_path("function"), "must be power_norm, exponential_tail or linear");
  }
  out.x0 = s.has("x0") ? as_vector(s.raw("x0"), s.child_path("x0")) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  check_dim(s.raw("x0"), s.child_path("x0"), out.x0, dim);
  if (s.has("drift")) {
    out.drift = as_vector(s.raw("drift"), s.child_path("drift"));
    check_dim(s.raw("drift"), s.child_path("drift"), out.drift, dim);
  }
  if (s.has("eta_layers")) {
    out.eta_layers = as_list<std::string>(s.raw("eta_layers"), s.child_path("eta_layers"));
    std::set<std::string> ids;
    for (const auto& a : marks.atoms) ids.insert(a.id);
    for (const auto& l : marks.layers) ids.insert(l.id);
    for (const auto& id : out.eta_layers)
      if (!ids.count(id)) fail(s.raw("eta_layers"), s.child_path("eta_layers"), "no mark layer named '" + id + "'");
  }
  if (s.has("levels")) out.levels = as_list<std::size_t>(s.raw("levels"), s.child_path("levels"));
  for (std::size_t l : out.levels)
    if (l == 0) fail(s.raw("levels"), s.child_path("levels"), "levels must be positive step counts");
  out.tolerance = s.get<double>("tolerance", out.tolerance);
  out.slope = s.get<double>("slope", out.slope);
  out.slope_tolerance = s.get<double>("slope_tolerance", out.slope_tolerance);
  s.reject_unknown();
}

void parse_qge(Section s, QgeConfig& out) {
  auto& rc = out.run;
  rc.n = s.get<std::size_t>("n", rc.n);
  if (rc.n < 8 || (rc.n & (rc.n - 1)) != 0) fail(s.raw("n"), s.child_path("n"), "grid size must be a power of two >= 8");
  rc.horizon = s.get<double>("horizon", rc.horizon);
  if (!(rc.horizon > 0.0)) fail(s.raw("horizon"), s.child_path("horizon"), "must be positive");
  rc.n_steps = s.get<std::size_t>("n_steps", rc.n_steps);
  if (rc.n_steps == 0) fail(s.raw("n_steps"), s.child_path("n_steps"), "must be positive");
  rc.noise.s = s.get<double>("s", rc.noise.s);
  if (!(rc.noise.s > 0.0 && rc.noise.s < 0.5)) fail(s.raw("s"), s.child_path("s"), "s must lie in (0,1/2)");
  rc.noise.symmetric = s.get<bool>("symmetric", rc.noise.symmetric);
  rc.theta0_modes = s.get<int>("theta0_modes", rc.theta0_modes);
  if (rc.theta0_modes < 1) fail(s.raw("theta0_modes"), s.child_path("theta0_modes"), "must be >= 1");
  rc.theta0_l2 = s.get<double>("theta0_l2", rc.theta0_l2);
  if (!(rc.theta0_l2 >= 0.0)) fail(s.raw("theta0_l2"), s.child_path("theta0_l2"), "must be >= 0");
  out.runs = s.get<std::size_t>("runs", out.runs);
  if (out.runs == 0) fail(s.raw("runs"), s.child_path("runs"), "must be positive");
  out.riesz_fields = s.get<std::size_t>("riesz_fields", out.riesz_fields);
  out.snapshots = s.get<std::size_t>("snapshots", out.snapshots);
  if (s.has("mild_levels")) out.mild_levels = as_list<std::size_t>(s.raw("mild_levels"), s.child_path("mild_levels"));
  for (std::size_t l : out.mild_levels)
    if (l == 0) fail(s.raw("mild_levels"), s.child_path("mild_levels"), "levels must be positive step counts");

  YAML::Node bundles = s.raw("bundles");
  if (!bundles || !bundles.IsSequence() || bundles.size() == 0)
    fail(bundles ? bundles : s.node(), s.child_path("bundles"), "needs a non-empty list of mode bundles");
  const int cutoff = static_cast<int>((rc.n - 1) / 3);
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    Section b(bundles[i], s.child_path("bundles[" + std::to_string(i) + "]"));
    qge::ModeBundle bundle;
    bundle.rate = b.require<double>("rate");
    if (!(bundle.rate > 0.0)) fail(b.raw("rate"), b.child_path("rate"), "must be positive");
    bundle.target_norm = b.get<double>("target_norm", 1.0);
    if (!(bundle.target_norm > 0.0)) fail(b.raw("target_norm"), b.child_path("target_norm"), "must be positive");
    YAML::Node modes = b.raw("modes");
    if (!modes || !modes.IsSequence() || modes.size() == 0)
      fail(modes ? modes : b.node(), b.child_path("modes"), "needs a non-empty list of [k1, k2] pairs");
    for (const auto& m : modes) {
      if (!m.IsSequence() || m.size() != 2) fail(m, b.child_path("modes"), "each mode is a [k1, k2] pair");
      const int k1 = Section::as<int>(m[0], b.child_path("modes")), k2 = Section::as<int>(m[1], b.child_path("modes"));
      if ((k1 == 0 && k2 == 0) || std::abs(k1) > cutoff || std::abs(k2) > cutoff)
        fail(m, b.child_path("modes"), "mode must be non-zero with |k1|,|k2| <= " + std::to_string(cutoff));
      bundle.modes.emplace_back(k1, k2);
    }
    b.reject_unknown();
    rc.noise.bundles.push_back(std::move(bundle));
  }
  s.reject_unknown();
}

void parse_output(Section s, OutputConfig& out) {
  out.directory = s.get<std::string>("directory", "");
  if (s.has("formats")) {
    const auto formats = as_list<std::string>(s.raw("formats"), s.child_path("formats"));
    out.json = out.csv = false;
    for (const auto& f : formats) {
      if (f == "json")
        out.json = true;
      else if (f == "csv")
        out.csv = true;
      else
        fail(s.raw("formats"), s.child_path("formats"), "formats are json and csv");
    }
  }
  s.reject_unknown();
}

bool uses(const std::string& kind, const std::string& block) {
  static const std::map<std::string, std::set<std::string>> table{
      {"integral", {"space", "marks", "integrand", "p", "horizon"}},
      {"bdg", {"space", "marks", "integrand", "p", "horizon"}},
      {"lp", {"space", "marks", "integrand", "p", "horizon"}},
      {"kallenberg", {"space", "marks", "integrand", "p", "horizon"}},
      {"conv-maximal", {"space", "marks", "integrand", "p", "horizon", "semigroup"}},
      {"levy-maximal", {"space", "marks", "integrand", "p", "horizon", "semigroup", "wiener"}},
      {"tail", {"space", "marks", "integrand", "horizon", "semigroup", "tail"}},
      {"ito-jump", {"space", "marks", "integrand", "horizon", "ito"}},
      {"ito-levy", {"space", "marks", "integrand", "horizon", "ito", "wiener"}},
      {"qge", {"qge"}},
  };
  return table.at(kind).count(block) > 0;
}

ExperimentConfig parse_root(const YAML::Node& root) {
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  Section s(root, "");
  ExperimentConfig c;
  c.kind = s.require<std::string>("kind");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    fail(s.raw("kind"), "kind", "unknown experiment kind '" + c.kind + "'");
  c.seed = s.get<std::uint64_t>("seed", 1);

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    static const std::set<std::string> blocks{"space", "marks", "integrand", "p", "horizon", "semigroup",
                                              "wiener", "tail", "ito", "qge"};
    if (blocks.count(key) && !uses(c.kind, key)) fail(kv.first, key, "is not used by kind '" + c.kind + "'");
  }

  if (c.kind != "qge") {
    parse_space(s.section("space"), c.space);
    parse_marks(s.section("marks"), c.space.dim, c.marks);
    if (s.has("integrand")) {
      Section in = s.section("integrand");
      c.integrand.name = in.get<std::string>("family", "marks");
      const auto& names = integrand_family_names();
      if (std::find(names.begin(), names.end(), c.integrand.name) == names.end())
        fail(in.raw("family"), in.child_path("family"), "family must be marks, time_ramp or decaying");
      c.integrand.scale = in.get<double>("scale", 1.0);
      if (!(c.integrand.scale >= 0.0)) fail(in.raw("scale"), in.child_path("scale"), "scale must be >= 0");
      in.reject_unknown();
    }
    c.horizon = s.get<double>("horizon", 1.0);
    if (!(c.horizon > 0.0)) fail(s.raw("horizon"), "horizon", "horizon must be positive");
    c.p = s.get<double>("p", 2.0);
    const YAML::Node pn = s.raw("p");
    if (!(c.p > 0.0)) fail(pn, "p", "p must be positive");
    if ((c.kind == "kallenberg" || c.kind == "integral") && c.p < 1.0) fail(pn, "p", "p must be >= 1");
    if (c.kind == "lp" && c.p < c.space.r) fail(pn, "p", "the two-term bound needs p >= r");
    if (c.kind == "levy-maximal") {
      if (c.p < 2.0) fail(pn, "p", "the Levy maximal inequality needs p >= 2");
      if (c.space.r != 2.0) fail(s.raw("space"), "space.r", "the Levy maximal inequality needs r = 2");
      if (c.space.kind != "lq" || c.space.q < 2.0)
        fail(s.raw("space"), "space", "the Levy maximal inequality needs an lq space with q >= 2");
    }
  }
  if (s.has("semigroup")) {
    c.semigroup.emplace();
    parse_semigroup(s.section("semigroup"), c.space.dim, *c.semigroup);
  }
  if (c.kind == "conv-maximal" && !c.semigroup) fail(root, "", "conv-maximal needs a 'semigroup' section");
  if (s.has("wiener")) {
    c.wiener = as_matrix(s.raw("wiener"), "wiener");
    if (static_cast<std::size_t>(c.wiener->rows()) != c.space.dim)
      fail(s.raw("wiener"), "wiener", "needs one row per space dimension");
  }
  if (c.kind == "ito-levy" && !c.wiener) fail(root, "", "ito-levy needs a 'wiener' factor");
  if (s.has("mc")) parse_mc(s.section("mc"), c.mc);
  if (s.has("tail")) parse_tail(s.section("tail"), c.tail);
  if (c.kind == "ito-jump" || c.kind == "ito-levy") {
    if (s.has("ito"))
      parse_ito(s.section("ito"), c.space.dim, c.marks, c.ito);
    else
      c.ito.x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.space.dim));
    if (c.kind == "ito-levy" && c.ito.function != "linear" && !(c.space.kind == "lq" && c.space.q == 2.0))
      fail(s.raw("space"), "space", "the trace term needs an lq space with q = 2");
    if (c.kind == "ito-levy" && c.ito.function == "power_norm" && c.ito.p < 2.0)
      fail(root, "ito.p", "the second-order formula needs p >= 2");
  }
  if (c.kind == "qge") parse_qge(s.section("qge"), c.qge);
  if (s.has("output")) parse_output(s.section("output"), c.output);
  c.qge.run.seed = c.seed;
  s.reject_unknown();
  return c;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"integral", "bdg",       "lp",       "kallenberg", "conv-maximal",
                                              "levy-maximal", "tail", "ito-jump", "ito-levy",   "qge"};
  return kinds;
}

ExperimentConfig parse_config(const std::string& text) {
  try {
    return parse_root(YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ", column " + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::json resolved(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["kind"] = c.kind;
  j["seed"] = c.seed;
  if (c.kind == "qge") {
    const auto& rc = c.qge.run;
    json bundles = json::array();
    for (const auto& b : rc.noise.bundles) {
      json modes = json::array();
      for (const auto& [k1, k2] : b.modes) modes.push_back({k1, k2});
      bundles.push_back({{"modes", modes}, {"rate", b.rate}, {"target_norm", b.target_norm}});
    }
    j["qge"] = {{"n", rc.n},
                {"horizon", rc.horizon},
                {"n_steps", rc.n_steps},
                {"s", rc.noise.s},
                {"symmetric", rc.noise.symmetric},
                {"theta0_modes", rc.theta0_modes},
                {"theta0_l2", rc.theta0_l2},
                {"runs", c.qge.runs},
                {"riesz_fields", c.qge.riesz_fields},
                {"snapshots", c.qge.snapshots},
                {"mild_levels", c.qge.mild_levels},
                {"bundles", bundles}};
    return j;
  }
  j["p"] = c.p;
  j["horizon"] = c.horizon;
  j["space"] = {{"kind", c.space.kind}, {"dim", c.space.dim}, {"q", c.space.q}, {"r", c.space.r}};
  if (c.space.kind == "spectral_sobolev") {
    j["space"]["n"] = c.space.n;
    j["space"]["s"] = c.space.s;
  }
  if (c.marks.layered()) {
    json layers = json::array();
    for (const auto& l : c.marks.layers) {
      json law = {{"kind", l.law.kind}};
      if (l.law.kind == "uniform") {
        law["lo"] = vec_json(l.law.lo);
        law["hi"] = vec_json(l.law.hi);
      } else {
        json values = json::array();
        for (const auto& v : l.law.values) values.push_back(vec_json(v));
        law["values"] = values;
        law["probabilities"] = l.law.probabilities;
      }
      layers.push_back({{"id", l.id}, {"mass", l.mass}, {"law", law}});
    }
    j["marks"] = {{"layers", layers}, {"n_max", c.marks.n_max}, {"beyond_mass", c.marks.beyond_mass}};
  } else {
    json atoms = json::array();
    for (const auto& a : c.marks.atoms) atoms.push_back({{"id", a.id}, {"weight", a.weight}, {"value", vec_json(a.value)}});
    j["marks"] = {{"atoms", atoms}};
  }
  j["integrand"] = {{"family", c.integrand.name}, {"scale", c.integrand.scale}};
  if (c.semigroup) {
    j["semigroup"] = {{"kind", c.semigroup->kind}, {"alpha", c.semigroup->alpha}};
    if (c.semigroup->kind == "diagonal") j["semigroup"]["eigs"] = vec_json(c.semigroup->eigs);
    if (c.semigroup->kind == "matrix") j["semigroup"]["matrix"] = mat_json(c.semigroup->matrix);
  }
  if (c.wiener) j["wiener"] = mat_json(*c.wiener);
  j["mc"] = {{"n_paths", c.mc.n_paths},       {"n_steps", c.mc.n_steps},       {"folds", c.mc.folds},
             {"n_gaussians", c.mc.n_gaussians}, {"confidence", c.mc.confidence}, {"homogeneity", c.mc.homogeneity}};
  if (c.kind == "tail") j["tail"] = {{"lambda", c.tail.lambda}, {"radii", c.tail.radii}};
  if (c.kind == "ito-jump" || c.kind == "ito-levy") {
    j["ito"] = {{"function", c.ito.function},   {"p", c.ito.p},
                {"lambda", c.ito.lambda},       {"x0", vec_json(c.ito.x0)},
                {"eta_layers", c.ito.eta_layers}, {"levels", c.ito.levels},
                {"tolerance", c.ito.tolerance}, {"slope", c.ito.slope},
                {"slope_tolerance", c.ito.slope_tolerance}};
    if (c.ito.v.size() > 0) j["ito"]["v"] = vec_json(c.ito.v);
    if (c.ito.drift.size() > 0) j["ito"]["drift"] = vec_json(c.ito.drift);
  }
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = resolved(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NormedSpace build_space(const ExperimentConfig& c) {
  if (c.space.kind == "spectral_sobolev") return NormedSpace::spectral_sobolev(c.space.n, c.space.s, c.space.q, c.space.r);
  return NormedSpace::lq(c.space.dim, c.space.q, c.space.r);
}

MarkSpace build_marks(const ExperimentConfig& c) {
  if (!c.marks.layered()) return MarkSpace::finite(c.marks.atoms);
  std::vector<Layer> layers;
  for (const auto& l : c.marks.layers) {
    MarkLaw law;
    if (l.law.kind == "point")
      law = PointMass{l.law.values[0]};
    else if (l.law.kind == "discrete")
      law = DiscreteLaw{l.law.values, l.law.probabilities};
    else
      law = UniformBox{l.law.lo, l.law.hi};
    layers.push_back({l.id, l.mass, std::move(law)});
  }
  return MarkSpace::layered(std::move(layers), c.marks.n_max, c.marks.beyond_mass);
}

std::optional<Semigroup> build_semigroup(const ExperimentConfig& c) {
  if (!c.semigroup) return std::nullopt;
  const auto& s = *c.semigroup;
  if (s.kind == "diagonal") return Semigroup::diagonal(s.eigs, s.alpha);
  if (s.kind == "matrix") return Semigroup::matrix(s.matrix, s.alpha);
  return Semigroup::identity(c.space.dim);
}

ExperimentSpec build_spec(const ExperimentConfig& c) {
  ExperimentSpec spec{build_space(c), build_marks(c), c.integrand, build_semigroup(c), c.wiener};
  spec.p = c.p;
  spec.r = c.space.r;
  spec.horizon = c.horizon;
  spec.n_paths = c.mc.n_paths;
  spec.n_steps = c.mc.n_steps;
  spec.seed = c.seed;
  spec.jobs = c.mc.jobs;
  spec.n_folds = c.mc.folds;
  spec.n_gaussians = c.mc.n_gaussians;
  spec.homogeneity = c.mc.homogeneity;
  return spec;
}

}  // namespace levymax::cli
