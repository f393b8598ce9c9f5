#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "config.hpp"
#include "experiments.hpp"
#include "levymax/error.hpp"
#include "levymax/stats.hpp"

namespace levymax::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << bytes;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

ExperimentConfig load_with_options(const std::string& path, const RunOptions& options) {
  ExperimentConfig c = load_config(path);
  if (options.seed) {
    c.seed = *options.seed;
    c.qge.run.seed = *options.seed;
  }
  if (options.jobs) c.mc.jobs = *options.jobs;
  return c;
}

fs::path output_dir(const ExperimentConfig& c, const RunOptions& options, const std::string& hash) {
  if (options.out_dir) return *options.out_dir;
  if (!c.output.directory.empty()) return c.output.directory;
  const char* root = std::getenv(kOutputRootEnv);
  const fs::path base = root && *root ? fs::path(root) : fs::path("levymax-runs");
  return base / (c.kind + "-" + hash);
}

json manifest(const ExperimentConfig& c, const std::string& config_path, const std::string& hash,
              const std::string& started, const std::vector<std::string>& outputs, const std::string& verdict) {
  return {{"tool", "levymax"},
          {"tool_version", LEVYMAX_VERSION},
          {"kind", c.kind},
          {"config_path", config_path},
          {"config_hash", hash},
          {"seed", c.seed},
          {"jobs", c.mc.jobs},
          {"started", started},
          {"finished", timestamp()},
          {"outputs", outputs},
          {"verdict", verdict}};
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const ArgumentError& e) {
    err << "invalid experiment: " << e.what() << '\n';
  } catch (const HypothesisError& e) {
    err << "hypothesis violated: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

struct GridAxis {
  std::string key;
  std::vector<double> values;
};

GridAxis parse_grid(const std::string& spec) {
  static const std::vector<std::string> keys{"p", "scale", "lambda", "radius", "n_steps", "dt"};
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("grid '" + spec + "' must look like key=v1,v2,...");
  GridAxis axis{spec.substr(0, eq), {}};
  if (std::find(keys.begin(), keys.end(), axis.key) == keys.end())
    throw ConfigError("'" + axis.key + "' is not sweepable (use p, scale, lambda, radius, n_steps or dt)");
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      axis.values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("grid value '" + item + "' for " + axis.key + " is not a number");
    }
  }
  if (axis.values.empty()) throw ConfigError("grid for " + axis.key + " has no values");
  return axis;
}

void apply(ExperimentConfig& c, const std::string& key, double v) {
  auto steps_from = [](double x) {
    if (!(x >= 1.0)) throw ConfigError("step counts must be >= 1");
    return static_cast<std::size_t>(std::llround(x));
  };
  const double horizon = c.kind == "qge" ? c.qge.run.horizon : c.horizon;
  if (key == "p") {
    c.p = v;
  } else if (key == "scale") {
    c.integrand.scale = v;
  } else if (key == "lambda") {
    if (!(v > 0.0)) throw ConfigError("lambda must be positive");
    c.tail.lambda = v;
  } else if (key == "radius") {
    if (!(v > 0.0)) throw ConfigError("radius must be positive");
    c.tail.radii = {v};
  } else {
    const std::size_t n = key == "dt" ? steps_from(horizon / v) : steps_from(v);
    if (c.kind == "qge")
      c.qge.run.n_steps = n;
    else if (c.kind == "ito-levy")
      c.ito.levels = {n};
    else
      c.mc.n_steps = n;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Cross-point checks that only make sense over a sweep.
std::vector<Row> sweep_aggregates(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                                  const std::vector<std::vector<double>>& points,
                                  const std::vector<std::vector<Row>>& rows) {
  std::vector<Row> out;
  if (axes.size() != 1) return out;
  const std::string& key = axes[0].key;
  if (key == "scale") {
    // Ratios of matching (name, variant) rows must agree within 3 combined SEs.
    std::map<std::pair<std::string, std::string>, std::vector<const Row*>> groups;
    for (const auto& pr : rows)
      for (const auto& r : pr)
        if (r.verdict != "info" && std::isfinite(r.ratio)) groups[{r.name, r.variant}].push_back(&r);
    for (const auto& [id, rs] : groups) {
      double worst = 0.0, worst_se = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
          const double d = std::abs(rs[i]->ratio - rs[j]->ratio);
          const double se = std::hypot(rs[i]->ratio_se, rs[j]->ratio_se);
          if (d > worst) worst = d, worst_se = se;
          if (d > 3.0 * se + 1e-12 * std::abs(rs[i]->ratio)) ok = false;
        }
      out.push_back({"sweep.homogeneity", id.first + ":" + id.second, worst, 0.0, 3.0 * worst_se, 0.0,
                     worst_se > 0.0 ? worst / worst_se : 0.0, 0.0, 3.0, ok ? "holds" : "violated", 0.0});
    }
  } else if (key == "radius" && base.kind == "tail") {
    std::vector<std::pair<double, double>> tail;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (const auto& r : rows[i])
        if (r.name == "tail") tail.emplace_back(points[i][0], r.lhs);
    std::sort(tail.begin(), tail.end());
    bool ok = true;
    for (std::size_t i = 0; i + 1 < tail.size(); ++i) ok = ok && tail[i + 1].second <= tail[i].second;
    out.push_back({"sweep.monotone", "tail", 0.0, 0.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                   ok ? "holds" : "violated", 0.0});
  } else if ((key == "dt" || key == "n_steps") && base.kind == "ito-levy") {
    std::vector<double> x, y;
    for (const auto& pr : rows)
      for (const auto& r : pr)
        if (r.name == "ito-levy" && r.variant.rfind("dt=", 0) == 0 && r.lhs > 0.0) {
          x.push_back(std::log(std::stod(r.variant.substr(3))));
          y.push_back(std::log(r.lhs));
        }
    if (x.size() >= 2) {
      const LinearFit fit = least_squares(x, y);
      const bool ok = std::abs(fit.slope - base.ito.slope) <= base.ito.slope_tolerance;
      out.push_back({"sweep.slope", "ito-levy", fit.slope, fit.slope_se, base.ito.slope, 0.0,
                     fit.slope / base.ito.slope, std::numeric_limits<double>::quiet_NaN(), base.ito.slope_tolerance,
                     ok ? "holds" : "violated", 0.0});
    }
  }
  return out;
}

}  // namespace

int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = timestamp();
    const ExperimentConfig c = load_with_options(config_path, options);
    const std::string hash = config_hash(c);
    const Outcome outcome = execute(c);
    const fs::path dir = output_dir(c, options, hash);
    std::vector<std::string> outputs;
    if (c.output.json) {
      write_file(dir / "report.json", outcome.report.dump(2) + "\n");
      outputs.push_back("report.json");
    }
    if (c.output.csv) {
      write_file(dir / "report.csv", render_csv(outcome.rows, hash, c.seed));
      outputs.push_back("report.csv");
    }
    for (const auto& a : outcome.artifacts) {
      write_file(dir / a.path, a.bytes);
      outputs.push_back(a.path);
    }
    const std::string verdict = outcome.violated() ? "violated" : "holds";
    write_file(dir / "manifest.json", manifest(c, config_path, hash, started, outputs, verdict).dump(2) + "\n");
    out << render_summary(outcome.rows);
    for (const auto& w : outcome.warnings) out << "warning: " << w << '\n';
    out << "verdict: " << verdict << "  (config " << hash << ", seed " << c.seed << ")\n";
    out << "output: " << dir.string() << '\n';
    return outcome.violated() ? kExitViolated : kExitHolds;
  });
}

int sweep_command(const std::string& config_path, const std::vector<std::string>& grids, const RunOptions& options,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = timestamp();
    if (grids.empty()) throw ConfigError("sweep needs at least one --grid key=v1,v2,...");
    const ExperimentConfig base = load_with_options(config_path, options);
    std::vector<GridAxis> axes;
    for (const auto& g : grids) axes.push_back(parse_grid(g));

    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : axes) {
      std::vector<std::vector<double>> next;
      for (const auto& p : points)
        for (double v : axis.values) {
          next.push_back(p);
          next.back().push_back(v);
        }
      points = std::move(next);
    }

    const std::string base_hash = config_hash(base);
    std::string header;
    for (const auto& a : axes) header += a.key + ",";
    std::string csv = header + kCsvHeader + "\n";
    std::vector<std::vector<Row>> all_rows;
    json results = json::array();
    bool violated = false;
    for (const auto& point : points) {
      ExperimentConfig c = base;
      for (std::size_t i = 0; i < axes.size(); ++i) apply(c, axes[i].key, point[i]);
      const std::string hash = config_hash(c);
      const Outcome o = execute(c);
      violated = violated || o.violated();
      std::string prefix;
      json coords;
      for (std::size_t i = 0; i < axes.size(); ++i) {
        prefix += fmt(point[i]) + ",";
        coords[axes[i].key] = point[i];
      }
      for (const auto& r : o.rows) csv += prefix + csv_line(r, hash, c.seed) + "\n";
      results.push_back({{"point", coords}, {"report", o.report}});
      all_rows.push_back(o.rows);
    }
    const std::vector<Row> aggregates = sweep_aggregates(base, axes, points, all_rows);
    std::string blank;
    for (std::size_t i = 0; i < axes.size(); ++i) blank += ",";
    for (const auto& r : aggregates) {
      csv += blank + csv_line(r, base_hash, base.seed) + "\n";
      violated = violated || r.verdict == "violated";
    }
    json aggregate_json = json::array();
    for (const auto& r : aggregates)
      aggregate_json.push_back({{"name", r.name}, {"variant", r.variant}, {"lhs", r.lhs}, {"rhs", r.rhs},
                                {"ratio", r.ratio}, {"verdict", r.verdict}});

    const fs::path dir = output_dir(base, options, base_hash + "-sweep");
    write_file(dir / "sweep.csv", csv);
    write_file(dir / "sweep.json", json({{"kind", base.kind},
                                         {"config_hash", base_hash},
                                         {"seed", base.seed},
                                         {"grid", grids},
                                         {"points", results},
                                         {"aggregates", aggregate_json}})
                                       .dump(2) +
                                       "\n");
    const std::string verdict = violated ? "violated" : "holds";
    write_file(dir / "manifest.json",
               manifest(base, config_path, base_hash, started, {"sweep.csv", "sweep.json"}, verdict).dump(2) + "\n");
    std::vector<Row> shown;
    for (const auto& pr : all_rows) shown.insert(shown.end(), pr.begin(), pr.end());
    shown.insert(shown.end(), aggregates.begin(), aggregates.end());
    out << render_summary(shown);
    out << "verdict: " << verdict << "  (" << points.size() << " grid points)\n";
    out << "output: " << dir.string() << '\n';
    return violated ? kExitViolated : kExitHolds;
  });
}

int describe_command(const std::string& kind, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << describe(kind);
    return kExitHolds;
  });
}

}  // namespace levymax::cli
