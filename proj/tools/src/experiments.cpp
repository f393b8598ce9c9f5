#include "experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>

#include "levymax/error.hpp"
#include "levymax/ito.hpp"
#include "levymax/qge.hpp"
#include "levymax/stats.hpp"

namespace levymax::cli {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json est(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

std::string fmt(double v, const char* spec = "%.6g") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string verdict_of(const VariantResult& v) {
  if (v.violated) return "violated";
  if (std::isfinite(v.declared_constant) || std::isnan(v.ratio.value)) return "holds";
  return "holds_with_constant";
}

void add_report(Outcome& out, const InequalityReport& r) {
  json variants = json::array();
  for (const auto& v : r.variants) {
    variants.push_back({{"label", v.label},
                        {"rhs", est(v.rhs)},
                        {"ratio", est(v.ratio)},
                        {"declared_constant", v.declared_constant},
                        {"verdict", verdict_of(v)},
                        {"fold_spread", {{"min", v.spread.min}, {"max", v.spread.max}, {"stddev", v.spread.stddev}}},
                        {"homogeneity_drift", v.homogeneity_drift},
                        {"homogeneity_ok", v.homogeneity_ok}});
    out.rows.push_back({r.name, v.label, r.lhs.value, r.lhs.se, v.rhs.value, v.rhs.se, v.ratio.value, v.ratio.se,
                        v.declared_constant, verdict_of(v), v.homogeneity_drift});
  }
  out.report["reports"].push_back({{"name", r.name},
                                   {"lhs", est(r.lhs)},
                                   {"variants", variants},
                                   {"warnings", r.warnings},
                                   {"resolution", r.resolution},
                                   {"n_paths", r.n_paths},
                                   {"seed", r.seed}});
  for (const auto& w : r.warnings) out.warnings.push_back(r.name + ": " + w);
}

Row equality_row(const std::string& name, const std::string& variant, const Estimate& lhs, double exact) {
  Row row{name, variant, lhs.value, lhs.se, exact, 0.0, kNaN, kNaN, 1.0, "", 0.0};
  if (exact != 0.0) {
    row.ratio = lhs.value / exact;
    row.ratio_se = lhs.se / std::abs(exact);
  }
  row.verdict = std::abs(lhs.value - exact) <= 3.0 * lhs.se + 1e-12 * std::abs(exact) ? "holds" : "violated";
  return row;
}

// ---------------------------------------------------------------- integral

Outcome run_integral(const ExperimentConfig& c) {
  const ExperimentSpec spec = build_spec(c);
  const std::size_t dim = spec.space.dim();
  const JumpField xi = spec.family.field(dim);
  const auto grid = uniform_grid(spec.horizon, spec.n_steps);
  const auto fine = uniform_grid(spec.horizon, 1024);

  Vector exact = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i + 1 < fine.size(); ++i)
    exact += (fine[i + 1] - fine[i]) * compensator(xi, spec.marks, 0.5 * (fine[i] + fine[i + 1]));
  const double nu_r = nu_moment(xi, spec.marks, spec.r, spec.space, fine);
  const double nu_p = nu_moment(xi, spec.marks, spec.p, spec.space, fine);

  struct Sample {
    Vector counting;
    double terminal_p = 0.0;
    double counting_r = 0.0;
  };
  const auto samples = parallel_map<Sample>(spec.n_paths, spec.jobs, [&](std::size_t i) {
    const JumpPath path = sample_jump_path(spec.marks, spec.horizon, spec.seed, static_cast<std::uint32_t>(i));
    Sample s;
    s.counting = integrate_counting(xi, path, grid).terminal();
    s.terminal_p = spec.space.psi(integrate_compensated(xi, path, spec.marks, grid).terminal(), spec.p);
    for (const auto& e : path.events) s.counting_r += std::pow(spec.space.norm(xi(e.time, e.mark)), spec.r);
    return s;
  });

  Outcome out;
  std::vector<double> col(samples.size());
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < samples.size(); ++i) col[i] = samples[i].counting[static_cast<Eigen::Index>(d)];
    out.rows.push_back(equality_row("integral", "compensation[" + std::to_string(d) + "]", mean_estimate(col),
                                    exact[static_cast<Eigen::Index>(d)]));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) col[i] = samples[i].counting_r;
  out.rows.push_back(equality_row("integral", "meyer_r", mean_estimate(col), nu_r));

  for (std::size_t i = 0; i < samples.size(); ++i) col[i] = samples[i].terminal_p;
  const Estimate moment = mean_estimate(col);
  if (spec.space.is_hilbert() && spec.p == 2.0) {
    out.rows.push_back(equality_row("integral", "isometry", moment, nu_p));
  } else {
    Row row{"integral", "isometry", moment.value, moment.se, nu_p, 0.0, moment.value / nu_p, moment.se / nu_p,
            kNaN, "holds_with_constant", 0.0};
    if (!std::isfinite(row.ratio)) row.verdict = nu_p == 0.0 && moment.value == 0.0 ? "holds" : "violated";
    out.rows.push_back(row);
  }
  out.report["compensator"] = std::vector<double>(exact.data(), exact.data() + exact.size());
  out.report["nu_moment_r"] = nu_r;
  out.report["nu_moment_p"] = nu_p;
  out.report["truncation_tail_mass"] = spec.marks.truncation_tail_mass();
  return out;
}

// ------------------------------------------------------------- inequalities

void add_min_bound(Outcome& out, const std::vector<InequalityReport>& small) {
  const VariantResult* comp_r = nullptr;
  const VariantResult* comp_p = nullptr;
  Estimate lhs;
  for (const auto& r : small)
    for (const auto& v : r.variants) {
      if (v.label == "compensator_r") comp_r = &v, lhs = r.lhs;
      if (v.label == "compensator_p") comp_p = &v;
    }
  if (!comp_r || !comp_p) return;
  const VariantResult& best = comp_r->rhs.value <= comp_p->rhs.value ? *comp_r : *comp_p;
  out.rows.push_back({"small_p.min", best.label, lhs.value, lhs.se, best.rhs.value, best.rhs.se, best.ratio.value,
                      best.ratio.se, kNaN, "info", 0.0});
  out.report["min_bound"] = {{"variant", best.label}, {"rhs", est(best.rhs)}, {"ratio", est(best.ratio)}};
}

Outcome run_inequality(const ExperimentConfig& c) {
  const ExperimentSpec spec = build_spec(c);
  Outcome out;
  out.report["reports"] = json::array();
  if (c.kind == "bdg") {
    if (spec.p >= 1.0) add_report(out, bdg_report(spec));
    if (spec.p <= spec.r) {
      const auto small = small_p_reports(spec);
      for (const auto& r : small) add_report(out, r);
      add_min_bound(out, small);
    }
  } else if (c.kind == "lp") {
    for (const auto& r : lp_reports(spec)) add_report(out, r);
  } else if (c.kind == "kallenberg") {
    add_report(out, kallenberg_report(spec));
  } else if (c.kind == "conv-maximal") {
    add_report(out, convolution_maximal_report(spec));
  } else {
    add_report(out, levy_maximal_report(spec));
  }
  out.report["truncation_tail_mass"] = spec.marks.truncation_tail_mass();
  return out;
}

// --------------------------------------------------------------------- tail

Outcome run_tail(const ExperimentConfig& c) {
  const ExperimentSpec spec = build_spec(c);
  const TailReport t = tail_report(spec, c.tail.lambda, c.tail.radii, c.mc.confidence);
  Outcome out;
  json rows = json::array();
  std::ostringstream csv;
  csv << "radius,exceedances,probability,wilson_lo,wilson_hi,bound,ok\n";
  const double n = static_cast<double>(t.n_paths);
  for (const auto& r : t.rows) {
    rows.push_back({{"radius", r.radius},
                    {"exceedances", r.exceedances},
                    {"probability", r.probability},
                    {"wilson", {r.wilson.lo, r.wilson.hi}},
                    {"bound", r.bound},
                    {"ok", r.ok}});
    csv << fmt(r.radius, "%.17g") << ',' << r.exceedances << ',' << fmt(r.probability, "%.17g") << ','
        << fmt(r.wilson.lo, "%.17g") << ',' << fmt(r.wilson.hi, "%.17g") << ',' << fmt(r.bound, "%.17g") << ','
        << (r.ok ? "true" : "false") << '\n';
    out.rows.push_back({"tail", "R=" + fmt(r.radius), r.probability, std::sqrt(r.probability * (1 - r.probability) / n),
                        r.bound, 0.0, r.wilson.hi / r.bound, kNaN, 1.0, r.ok ? "holds" : "violated", 0.0});
  }
  out.report["tail"] = {{"lambda", t.lambda},
                        {"m_lambda", t.m_lambda},
                        {"smoothness_c", t.smoothness_c},
                        {"c_lambda", t.c_lambda},
                        {"confidence", t.confidence},
                        {"monotone", t.monotone},
                        {"n_paths", t.n_paths},
                        {"seed", t.seed},
                        {"rows", rows}};
  if (!t.monotone) out.warnings.push_back("tail: empirical tail is not monotone in R");
  out.artifacts.push_back({"tail.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------------- ito

TestFunction build_function(const ExperimentConfig& c, const NormedSpace& space) {
  if (c.ito.function == "linear") return TestFunction::linear(c.ito.v);
  if (c.ito.function == "exponential_tail") return TestFunction::exponential_tail(space, c.ito.lambda);
  return TestFunction::power_norm(space, c.ito.p);
}

Integrand build_integrand(const ExperimentConfig& c, const MarkSpace& marks) {
  const std::size_t dim = c.space.dim;
  std::vector<char> is_eta(marks.size(), 0);
  for (std::size_t l = 0; l < marks.size(); ++l)
    is_eta[l] = std::find(c.ito.eta_layers.begin(), c.ito.eta_layers.end(), marks.layers()[l].id) != c.ito.eta_layers.end();
  const JumpField base = c.integrand.field(dim);
  auto restricted = [&](bool eta) -> JumpField {
    return {dim, [base, is_eta, eta, dim](double t, const Mark& z) -> Vector {
              if (static_cast<bool>(is_eta.at(z.layer)) != eta) return Vector::Zero(static_cast<Eigen::Index>(dim));
              return base(t, z);
            }};
  };
  Integrand x;
  x.dim = dim;
  const bool any_eta = std::any_of(is_eta.begin(), is_eta.end(), [](char e) { return e != 0; });
  const bool any_xi = std::any_of(is_eta.begin(), is_eta.end(), [](char e) { return e == 0; });
  if (any_xi) x.xi = restricted(false);
  if (any_eta) x.eta = restricted(true);
  if (c.ito.drift.size() > 0) {
    const Vector a = c.ito.drift;
    x.a = {dim, [a](double) { return a; }};
  }
  if (c.wiener) {
    const Matrix g = *c.wiener;
    x.g = {dim, static_cast<std::size_t>(g.cols()), [g](double) { return g; }};
  }
  return x;
}

std::string ito_csv_header(const ItoReport& r) {
  std::string h = "replicate,dt,n_jumps,lhs";
  for (const auto& [name, v] : r.terms) h += "," + name;
  return h + ",residual\n";
}

std::string ito_csv_line(std::size_t rep, const ItoReport& r) {
  std::string line = std::to_string(rep) + "," + fmt(r.dt, "%.17g") + "," + std::to_string(r.n_jumps) + "," +
                     fmt(r.lhs, "%.17g");
  for (const auto& [name, v] : r.terms) line += "," + fmt(v, "%.17g");
  return line + "," + fmt(r.residual, "%.17g") + "\n";
}

void add_derivative_row(Outcome& out, const std::string& name, const TestFunction& phi, std::size_t dim,
                        std::uint64_t seed) {
  const DerivativeCheck d = validate_derivatives(phi, dim, 100, seed);
  out.rows.push_back({name, "derivatives", d.gradient_error, 0.0, 1e-6, 0.0, d.gradient_error / 1e-6, kNaN, 1.0,
                      d.ok ? "holds" : "violated", 0.0});
  out.report["derivative_check"] = {{"gradient_error", d.gradient_error}, {"hessian_error", d.hessian_error}, {"ok", d.ok}};
}

Outcome run_ito_jump(const ExperimentConfig& c) {
  const NormedSpace space = build_space(c);
  const MarkSpace marks = build_marks(c);
  const TestFunction phi = build_function(c, space);
  const Integrand x = build_integrand(c, marks);
  const auto grid = uniform_grid(c.horizon, c.mc.n_steps);
  const auto reports = parallel_map<ItoReport>(c.mc.n_paths, c.mc.jobs, [&](std::size_t i) {
    const JumpPath path = sample_jump_path(marks, c.horizon, c.seed, static_cast<std::uint32_t>(i));
    return ito_residual_jump(phi, c.ito.x0, x, path, marks, grid);
  });
  Outcome out;
  add_derivative_row(out, "ito-jump", phi, c.space.dim, c.seed);
  double worst = 0.0;
  std::vector<double> lhs, rhs;
  std::string csv = ito_csv_header(reports.front());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    worst = std::max(worst, std::abs(r.residual) / (1.0 + std::abs(r.lhs)));
    lhs.push_back(r.lhs);
    rhs.push_back(r.rhs());
    csv += ito_csv_line(i, r);
  }
  const Estimate l = mean_estimate(lhs), rr = mean_estimate(rhs);
  out.rows.push_back({"ito-jump", phi.name(), l.value, l.se, rr.value, rr.se, worst, kNaN, c.ito.tolerance,
                      worst <= c.ito.tolerance ? "holds" : "violated", 0.0});
  out.report["ito"] = {{"function", phi.name()},
                       {"n_paths", reports.size()},
                       {"max_scaled_residual", worst},
                       {"tolerance", c.ito.tolerance},
                       {"lhs", est(l)},
                       {"rhs", est(rr)}};
  out.artifacts.push_back({"ito.csv", csv});
  return out;
}

Outcome run_ito_levy(const ExperimentConfig& c) {
  const NormedSpace space = build_space(c);
  const MarkSpace marks = build_marks(c);
  const TestFunction phi = build_function(c, space);
  const Integrand x = build_integrand(c, marks);
  std::vector<std::size_t> levels = c.ito.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const std::size_t finest = levels.back();
  for (std::size_t l : levels)
    if (finest % l != 0) throw ConfigError("ito.levels: every level must divide the finest level " + std::to_string(finest));
  const std::size_t k = static_cast<std::size_t>(c.wiener->cols());

  // residual^2 per (path, level)
  const auto squares = parallel_map<std::vector<double>>(c.mc.n_paths, c.mc.jobs, [&](std::size_t i) {
    const auto rep = static_cast<std::uint32_t>(i);
    const JumpPath path = sample_jump_path(marks, c.horizon, c.seed, rep);
    const WienerPath fine = sample_wiener(c.horizon, finest, k, c.seed, rep);
    std::vector<double> sq;
    for (std::size_t l : levels) {
      const WienerPath w = fine.coarsen(finest / l);
      const ItoReport r = ito_residual_levy(phi, c.ito.x0, x, path, marks, w, w.times);
      sq.push_back(r.residual * r.residual);
    }
    return sq;
  });

  Outcome out;
  add_derivative_row(out, "ito-levy", phi, c.space.dim, c.seed);
  std::vector<double> log_dt, log_rms;
  json level_json = json::array();
  double max_rms = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    std::vector<double> col(squares.size());
    for (std::size_t i = 0; i < squares.size(); ++i) col[i] = squares[i][j];
    const Estimate ms = mean_estimate(col);
    const Estimate rms = power_estimate(ms, 0.5);
    const double dt = c.horizon / static_cast<double>(levels[j]);
    max_rms = std::max(max_rms, rms.value);
    out.rows.push_back({"ito-levy", "dt=" + fmt(dt), rms.value, rms.se, kNaN, kNaN, kNaN, kNaN, kNaN, "info", 0.0});
    level_json.push_back({{"dt", dt}, {"n_steps", levels[j]}, {"rms_residual", est(rms)}});
    if (rms.value > 0.0) {
      log_dt.push_back(std::log(dt));
      log_rms.push_back(std::log(rms.value));
    }
  }
  out.report["ito"] = {{"function", phi.name()}, {"n_paths", c.mc.n_paths}, {"levels", level_json}};
  if (max_rms <= c.ito.tolerance) {
    // The formula is exact for this integrand (e.g. linear phi): nothing to regress.
    out.rows.push_back({"ito-levy", "exact", max_rms, 0.0, c.ito.tolerance, 0.0, kNaN, kNaN, c.ito.tolerance, "holds", 0.0});
    out.report["ito"]["exact"] = true;
  } else if (log_dt.size() >= 2) {
    const LinearFit fit = least_squares(log_dt, log_rms);
    const bool ok = std::abs(fit.slope - c.ito.slope) <= c.ito.slope_tolerance;
    out.rows.push_back({"ito-levy", "slope", fit.slope, fit.slope_se, c.ito.slope, 0.0, fit.slope / c.ito.slope, kNaN,
                        c.ito.slope_tolerance, ok ? "holds" : "violated", 0.0});
    out.report["ito"]["slope"] = {{"value", fit.slope}, {"se", fit.slope_se}, {"expected", c.ito.slope},
                                  {"tolerance", c.ito.slope_tolerance}};
  }
  return out;
}

// ---------------------------------------------------------------------- qge

std::string snapshot_bytes(const SpectralGrid& grid, const qge::Field& f, double t, const std::string& field) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
  const json header = {{"format", "levymax-field"},
                       {"version", 1},
                       {"field", field},
                       {"time", t},
                       {"n", grid.n()},
                       {"dtype", "complex128"},
                       {"endianness", "little"},
                       {"layout", "row-major"},
                       {"order", "entry i1*n+i2 holds mode (k1,k2)=(w(i1),w(i2)), w(i)=i for i<=n/2 else i-n"},
                       {"normalisation", "f(x)=sum_k c_k exp(i k.x) on [0,2pi)^2"}};
  const std::string h = header.dump();
  std::string out = "LVMXFLD1";
  const std::uint64_t len = h.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof len);
  out += h;
  const std::size_t bytes = static_cast<std::size_t>(f.size()) * sizeof(std::complex<double>);
  const std::size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, f.data(), bytes);
  return out;
}

struct QgeRunSummary {
  qge::EnergyLedger ledger;
  double z_sup_sq = 0.0;  // sup_t |Z|^2_{W^{-s,4}}
  double divergence = 0.0;
  std::size_t n_jumps = 0;
  std::vector<Artifact> artifacts;
};

Row check_row(const std::string& variant, const std::vector<QgeRunSummary>& runs,
              qge::Check qge::EnergyLedger::*member, bool informational = false) {
  // Report the run closest to violation (largest lhs/rhs).
  const qge::Check* worst = nullptr;
  bool ok = true;
  for (const auto& r : runs) {
    const qge::Check& ch = r.ledger.*member;
    ok = ok && ch.ok;
    const double ratio = ch.rhs > 0.0 ? ch.lhs / ch.rhs : (ch.lhs > 0.0 ? kNaN : 0.0);
    const double best = worst ? (worst->rhs > 0.0 ? worst->lhs / worst->rhs : 0.0) : -1.0;
    if (!worst || std::isnan(ratio) || ratio > best) worst = &ch;
  }
  Row row{"qge", variant, worst->lhs, 0.0, worst->rhs, 0.0, worst->rhs > 0.0 ? worst->lhs / worst->rhs : kNaN, kNaN,
          1.0, ok ? "holds" : "violated", 0.0};
  if (informational) row.verdict = "info";
  return row;
}

Outcome run_qge(const ExperimentConfig& c) {
  const qge::RunConfig& rc = c.qge.run;
  const SpectralGrid grid(rc.n);
  const qge::NoiseModel noise(grid, rc.noise);
  const double base_c = qge::riesz_l4_constant(grid, c.qge.riesz_fields, c.seed);
  const double s = rc.noise.s;

  const auto runs = parallel_map<QgeRunSummary>(c.qge.runs, c.mc.jobs, [&](std::size_t i) {
    const auto rep = static_cast<std::uint32_t>(i);
    const qge::Run run = qge::run(rc, rep);
    QgeRunSummary out;
    std::vector<qge::Field> probes{run.theta.values.back(), run.theta.values[run.theta.values.size() / 2]};
    const double riesz = std::max(base_c, qge::riesz_l4_constant(grid, 0, c.seed, probes));
    out.ledger = qge::energy_diagnostics(run, riesz);
    for (const auto& z : run.z.values) out.z_sup_sq = std::max(out.z_sup_sq, std::pow(qge::sobolev_norm(grid, z, -s, 4.0), 2));
    out.n_jumps = run.z.jumps.events.size();
    for (const auto& th : run.theta.values)
      out.divergence = std::max(out.divergence, qge::divergence_defect(grid, qge::riesz_velocity(grid, th)) /
                                                    std::max(th.abs().maxCoeff(), 1e-300));
    if (i == 0) {
      std::ostringstream ledger;
      ledger << "t,y_l2_sq,grad_y_l2_sq,z_l4,energy_lhs,energy_rhs,ladyzhenskaya\n";
      for (const auto& row : out.ledger.rows)
        ledger << fmt(row.t, "%.17g") << ',' << fmt(row.y_l2_sq, "%.17g") << ',' << fmt(row.grad_y_l2_sq, "%.17g")
               << ',' << fmt(row.z_l4, "%.17g") << ',' << fmt(row.energy_lhs, "%.17g") << ','
               << fmt(row.energy_rhs, "%.17g") << ',' << fmt(row.ladyzhenskaya, "%.17g") << '\n';
      out.artifacts.push_back({"qge/ledger.csv", ledger.str()});
      const std::size_t nodes = run.theta.times.size();
      const std::size_t shots = std::min(c.qge.snapshots, nodes);
      for (std::size_t k = 0; k < shots; ++k) {
        const std::size_t j = shots == 1 ? nodes - 1 : k * (nodes - 1) / (shots - 1);
        char name[64];
        std::snprintf(name, sizeof name, "qge/theta_%05zu.bin", j);
        out.artifacts.push_back({name, snapshot_bytes(grid, run.theta.values[j], run.theta.times[j], "theta")});
      }
    }
    return out;
  });

  Outcome out;
  out.rows.push_back(check_row("stepwise_energy", runs, &qge::EnergyLedger::stepwise));
  out.rows.push_back(check_row("gronwall_sup", runs, &qge::EnergyLedger::gronwall_sup));
  out.rows.push_back(check_row("gronwall_gradient", runs, &qge::EnergyLedger::gronwall_gradient));
  out.rows.push_back(check_row("gronwall_gradient_z2", runs, &qge::EnergyLedger::gronwall_gradient_z2, true));
  out.rows.push_back(check_row("ladyzhenskaya", runs, &qge::EnergyLedger::ladyzhenskaya));

  double divergence = 0.0;
  std::vector<double> z_sup;
  std::ostringstream runs_csv;
  runs_csv << "replicate,n_jumps,riesz_constant,c1,c2,stepwise_lhs,stepwise_rhs,gronwall_sup_lhs,gronwall_sup_rhs,"
              "gronwall_gradient_lhs,gronwall_gradient_rhs,gronwall_gradient_z2_rhs,ladyzhenskaya_max,z_sup_sq\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto& l = r.ledger;
    divergence = std::max(divergence, r.divergence);
    z_sup.push_back(r.z_sup_sq);
    runs_csv << i << ',' << r.n_jumps << ',' << fmt(l.riesz_constant, "%.17g") << ',' << fmt(l.c1, "%.17g") << ','
             << fmt(l.c2, "%.17g") << ',' << fmt(l.stepwise.lhs, "%.17g") << ',' << fmt(l.stepwise.rhs, "%.17g") << ','
             << fmt(l.gronwall_sup.lhs, "%.17g") << ',' << fmt(l.gronwall_sup.rhs, "%.17g") << ','
             << fmt(l.gronwall_gradient.lhs, "%.17g") << ',' << fmt(l.gronwall_gradient.rhs, "%.17g") << ','
             << fmt(l.gronwall_gradient_z2.rhs, "%.17g") << ',' << fmt(l.ladyzhenskaya_max, "%.17g") << ','
             << fmt(r.z_sup_sq, "%.17g") << '\n';
    if (l.ladyzhenskaya_flagged)
      out.warnings.push_back("qge run " + std::to_string(i) + ": Ladyzhenskaya ratio " + fmt(l.ladyzhenskaya_max) +
                             " exceeds 2^{1/4}");
  }
  const double assumption = noise.assumption_integral(rc.horizon);
  const Estimate zs = mean_estimate(z_sup);
  out.rows.push_back({"qge", "z_moment", zs.value, zs.se, assumption, 0.0, zs.value / assumption,
                      zs.se / assumption, kNaN, std::isfinite(zs.value) ? "holds_with_constant" : "violated", 0.0});
  out.rows.push_back({"qge", "divergence", divergence, 0.0, 1e-13, 0.0, divergence / 1e-13, kNaN, 1.0,
                      divergence <= 1e-13 ? "holds" : "violated", 0.0});

  // Consistency order of the mild form on replicate 0.
  std::vector<std::size_t> levels = c.qge.mild_levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const auto residuals = parallel_map<double>(levels.size(), c.mc.jobs, [&](std::size_t j) {
    qge::RunConfig level = rc;
    level.n_steps = levels[j];
    const qge::Run run = qge::run(level, 0);
    return qge::mild_residual(run.grid, run.theta0, run.theta, run.z);
  });
  json mild = json::array();
  std::ostringstream mild_csv;
  mild_csv << "n_steps,dt,mild_residual\n";
  std::vector<double> log_dt, log_res;
  bool monotone = true;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double dt = rc.horizon / static_cast<double>(levels[j]);
    mild.push_back({{"n_steps", levels[j]}, {"dt", dt}, {"residual", residuals[j]}});
    mild_csv << levels[j] << ',' << fmt(dt, "%.17g") << ',' << fmt(residuals[j], "%.17g") << '\n';
    if (j > 0 && residuals[j] >= residuals[j - 1]) monotone = false;
    if (residuals[j] > 0.0) {
      log_dt.push_back(std::log(dt));
      log_res.push_back(std::log(residuals[j]));
    }
  }
  if (log_dt.size() >= 2) {
    const LinearFit fit = least_squares(log_dt, log_res);
    const bool ok = monotone && std::abs(fit.slope - 1.0) <= 0.25;
    out.rows.push_back({"qge", "mild_order", fit.slope, fit.slope_se, 1.0, 0.0, fit.slope, kNaN, 0.25,
                        ok ? "holds" : "violated", 0.0});
    out.report["mild_order"] = {{"slope", fit.slope}, {"se", fit.slope_se}, {"monotone", monotone}, {"levels", mild}};
  }

  const auto& l0 = runs.front().ledger;
  out.report["qge"] = {{"n", rc.n},
                       {"horizon", rc.horizon},
                       {"n_steps", rc.n_steps},
                       {"runs", runs.size()},
                       {"riesz_constant_probe", base_c},
                       {"c", l0.c},
                       {"c1", l0.c1},
                       {"c2", l0.c2},
                       {"assumption_integral", assumption},
                       {"z_sup_sq", est(zs)},
                       {"divergence_defect", divergence}};
  for (auto& a : runs.front().artifacts) out.artifacts.push_back(a);
  out.artifacts.push_back({"qge/runs.csv", runs_csv.str()});
  out.artifacts.push_back({"qge/mild.csv", mild_csv.str()});
  return out;
}

}  // namespace

bool Outcome::violated() const {
  return std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.verdict == "violated"; });
}

Outcome execute(const ExperimentConfig& config) {
  Outcome out;
  if (config.kind == "integral")
    out = run_integral(config);
  else if (config.kind == "tail")
    out = run_tail(config);
  else if (config.kind == "ito-jump")
    out = run_ito_jump(config);
  else if (config.kind == "ito-levy")
    out = run_ito_levy(config);
  else if (config.kind == "qge")
    out = run_qge(config);
  else
    out = run_inequality(config);
  json rows = json::array();
  for (const auto& r : out.rows)
    rows.push_back({{"name", r.name},
                    {"variant", r.variant},
                    {"lhs", r.lhs},
                    {"lhs_se", r.lhs_se},
                    {"rhs", r.rhs},
                    {"rhs_se", r.rhs_se},
                    {"ratio", r.ratio},
                    {"ratio_se", r.ratio_se},
                    {"declared_constant", r.declared_constant},
                    {"verdict", r.verdict},
                    {"homogeneity_drift", r.homogeneity_drift}});
  out.report["kind"] = config.kind;
  out.report["seed"] = config.seed;
  out.report["config_hash"] = config_hash(config);
  out.report["config"] = resolved(config);
  out.report["rows"] = rows;
  out.report["warnings"] = out.warnings;
  out.report["verdict"] = out.violated() ? "violated" : "holds";
  return out;
}

const char* const kCsvHeader =
    "name,variant,lhs,lhs_se,rhs,rhs_se,ratio,ratio_se,declared_constant,verdict,homogeneity_drift,config_hash,seed";

std::string csv_line(const Row& r, const std::string& hash, std::uint64_t seed) {
  const char* g = "%.17g";
  return r.name + "," + r.variant + "," + fmt(r.lhs, g) + "," + fmt(r.lhs_se, g) + "," + fmt(r.rhs, g) + "," +
         fmt(r.rhs_se, g) + "," + fmt(r.ratio, g) + "," + fmt(r.ratio_se, g) + "," + fmt(r.declared_constant, g) +
         "," + r.verdict + "," + fmt(r.homogeneity_drift, g) + "," + hash + "," + std::to_string(seed);
}

std::string render_csv(const std::vector<Row>& rows, const std::string& hash, std::uint64_t seed) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += csv_line(r, hash, seed) + "\n";
  return out;
}

std::string render_summary(const std::vector<Row>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-26s %12s %12s %22s %9s  %s\n", "name", "variant", "lhs", "rhs",
                "ratio +/- se", "constant", "verdict");
  out += line;
  for (const auto& r : rows) {
    const std::string ratio = std::isnan(r.ratio) ? "-" : fmt(r.ratio) + (std::isnan(r.ratio_se) ? "" : " +/- " + fmt(r.ratio_se, "%.2g"));
    std::snprintf(line, sizeof line, "%-22s %-26s %12s %12s %22s %9s  %s\n", r.name.c_str(), r.variant.c_str(),
                  fmt(r.lhs).c_str(), std::isnan(r.rhs) ? "-" : fmt(r.rhs).c_str(), ratio.c_str(),
                  std::isnan(r.declared_constant) ? "-" : fmt(r.declared_constant).c_str(), r.verdict.c_str());
    out += line;
  }
  return out;
}

}  // namespace levymax::cli
