#include "levymax/qge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "levymax/error.hpp"
#include "levymax/rng.hpp"

namespace levymax::qge {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void check_size(const SpectralGrid& grid, const Field& f, const char* what) {
  if (static_cast<std::size_t>(f.size()) != grid.size())
    throw ArgumentError(std::string(what) + ": field size does not match the grid");
}

Field derivative(const SpectralGrid& grid, const Field& f, int axis) {
  Field out(f.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = axis == 1 ? grid.k1(i) : grid.k2(i);
    out[static_cast<Eigen::Index>(i)] = kI * k * f[static_cast<Eigen::Index>(i)];
  }
  return out;
}

// int_0^dt e^{-kappa(dt-u)} du and int_0^dt (u/dt) e^{-kappa(dt-u)} du.
std::pair<double, double> exp_weights(double kappa, double dt) {
  const double x = kappa * dt;
  if (x < 1e-6) return {dt * (1.0 - x / 2.0), dt * (0.5 - x / 3.0)};
  const double w0 = -std::expm1(-x) / kappa;
  return {w0, (dt - w0) / x};
}

}  // namespace

double inner(const SpectralGrid& grid, const Field& f, const Field& g) {
  check_size(grid, f, "inner");
  check_size(grid, g, "inner");
  return grid.domain_area() * (f * g.conjugate()).real().sum();
}

double l2_norm(const SpectralGrid& grid, const Field& f) { return std::sqrt(std::max(inner(grid, f, f), 0.0)); }

double gradient_norm(const SpectralGrid& grid, const Field& f) {
  check_size(grid, f, "gradient_norm");
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.k_squared(i) * std::norm(f[static_cast<Eigen::Index>(i)]);
  return std::sqrt(grid.domain_area() * s);
}

double sobolev_norm(const SpectralGrid& grid, const Field& f, double s, double q) {
  check_size(grid, f, "sobolev_norm");
  return grid_lq_norm(grid, grid.inverse(bessel_multiplier(grid, f, s)), q);
}

double velocity_l4(const SpectralGrid& grid, const Velocity& v) {
  const Eigen::ArrayXd a = grid.inverse(v.v1), b = grid.inverse(v.v2);
  const Eigen::ArrayXd sq = a.square() + b.square();
  return std::pow(grid.cell_area() * sq.square().sum(), 0.25);
}

Field dealias(const SpectralGrid& grid, Field f) {
  check_size(grid, f, "dealias");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!grid.retained(i)) f[static_cast<Eigen::Index>(i)] = 0.0;
  f[0] = 0.0;
  return f;
}

Field heat(const SpectralGrid& grid, const Field& f, double t) {
  check_size(grid, f, "heat");
  Field out(f.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = std::exp(-grid.k_squared(i) * t) * f[static_cast<Eigen::Index>(i)];
  return out;
}

Field random_band_limited(const SpectralGrid& grid, int max_mode, double l2, std::uint64_t seed,
                          std::uint32_t replicate) {
  if (max_mode < 1) throw ArgumentError("random_band_limited: max_mode must be >= 1");
  Philox4x32 rng({seed, streams::kInitialField, replicate});
  std::normal_distribution<double> normal;
  Eigen::ArrayXd phys(static_cast<Eigen::Index>(grid.size()));
  for (auto& v : phys) v = normal(rng);
  Field f = dealias(grid, grid.forward(phys));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid.k1(i)) > max_mode || std::abs(grid.k2(i)) > max_mode) f[static_cast<Eigen::Index>(i)] = 0.0;
  const double norm = l2_norm(grid, f);
  if (norm > 0.0) f *= l2 / norm;
  return f;
}

Velocity riesz_velocity(const SpectralGrid& grid, const Field& theta) {
  check_size(grid, theta, "riesz_velocity");
  const double scale = theta.abs().maxCoeff();
  if (std::abs(theta[0]) > 1e-12 * scale)
    throw ArgumentError("riesz_velocity: theta must have zero mean");
  Velocity v{Field::Zero(theta.size()), Field::Zero(theta.size())};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const double k1 = grid.k1(i), k2 = grid.k2(i);
    const double k = std::sqrt(k1 * k1 + k2 * k2);
    v.v1[idx] = kI * (k2 / k) * theta[idx];
    v.v2[idx] = -kI * (k1 / k) * theta[idx];
  }
  return v;
}

double divergence_defect(const SpectralGrid& grid, const Velocity& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    worst = std::max(worst, std::abs(static_cast<double>(grid.k1(i)) * v.v1[idx] +
                                     static_cast<double>(grid.k2(i)) * v.v2[idx]));
  }
  return worst;
}

Field transport(const SpectralGrid& grid, const Field& psi, const Field& phi) {
  check_size(grid, phi, "transport");
  const Velocity v = riesz_velocity(grid, psi);
  const Eigen::ArrayXd v1 = grid.inverse(v.v1), v2 = grid.inverse(v.v2);
  const Eigen::ArrayXd d1 = grid.inverse(derivative(grid, phi, 1));
  const Eigen::ArrayXd d2 = grid.inverse(derivative(grid, phi, 2));
  return dealias(grid, grid.forward(v1 * d1 + v2 * d2));
}

NoiseModel::NoiseModel(const SpectralGrid& grid, NoiseSpec spec)
    : spec_(std::move(spec)), marks_(MarkSpace::finite({{"none", 1.0, Eigen::Vector2d(0, 0)}})) {
  if (!(spec_.s > 0.0 && spec_.s < 0.5)) throw ArgumentError("noise regularity s must lie in (0, 1/2)");
  if (spec_.bundles.empty()) throw ArgumentError("noise needs at least one mode bundle");
  std::vector<Atom> atoms;
  compensator_ = Field::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t b = 0; b < spec_.bundles.size(); ++b) {
    const ModeBundle& bundle = spec_.bundles[b];
    if (!(bundle.rate > 0.0)) throw ArgumentError("mode bundle rates must be positive");
    if (!(bundle.target_norm > 0.0)) throw ArgumentError("mode bundle target norms must be positive");
    if (bundle.modes.empty()) throw ArgumentError("mode bundle needs at least one mode");
    Field amp = Field::Zero(static_cast<Eigen::Index>(grid.size()));
    for (const auto& [k1, k2] : bundle.modes) {
      const int c = grid.dealias_cutoff();
      if ((k1 == 0 && k2 == 0) || std::abs(k1) > c || std::abs(k2) > c)
        throw ArgumentError("noise mode (" + std::to_string(k1) + "," + std::to_string(k2) +
                            ") is the mean or lies outside the dealiasing band");
      amp[static_cast<Eigen::Index>(grid.index_of(k1, k2))] += 0.5;
      amp[static_cast<Eigen::Index>(grid.index_of(-k1, -k2))] += 0.5;
    }
    amp *= bundle.target_norm / sobolev_norm(grid, amp, -spec_.s, 4.0);
    const auto bi = static_cast<double>(b);
    if (spec_.symmetric) {
      atoms.push_back({"bundle" + std::to_string(b) + "+", bundle.rate / 2.0, Eigen::Vector2d(bi, 1.0)});
      atoms.push_back({"bundle" + std::to_string(b) + "-", bundle.rate / 2.0, Eigen::Vector2d(bi, -1.0)});
    } else {
      atoms.push_back({"bundle" + std::to_string(b), bundle.rate, Eigen::Vector2d(bi, 1.0)});
      compensator_ += bundle.rate * amp;
    }
    amplitudes_.push_back(std::move(amp));
  }
  marks_ = MarkSpace::finite(std::move(atoms));
}

double NoiseModel::assumption_integral(double horizon) const {
  double s = 0.0;
  for (const auto& b : spec_.bundles) s += b.rate * b.target_norm * b.target_norm;
  return horizon * s;
}

Field NoiseModel::jump(const Mark& mark) const {
  const auto b = static_cast<std::size_t>(mark.value[0]);
  return mark.value[1] * amplitudes_.at(b);
}

ZPath ou_convolution_z(const SpectralGrid& grid, const NoiseModel& noise, double horizon,
                       std::size_t n_steps, std::uint64_t seed, std::uint32_t replicate) {
  if (!(horizon > 0.0) || n_steps == 0) throw ArgumentError("ou_convolution_z: need T > 0 and n_steps >= 1");
  ZPath z;
  z.jumps = sample_jump_path(noise.marks(), horizon, seed, replicate);
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double dt = horizon / static_cast<double>(n_steps);
  Eigen::ArrayXd kappa(m), decay(m), comp_weight(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    kappa[i] = grid.k_squared(static_cast<std::size_t>(i));
    decay[i] = std::exp(-kappa[i] * dt);
    comp_weight[i] = exp_weights(kappa[i], dt).first;
  }
  const bool compensate = noise.compensator_rate().abs().maxCoeff() > 0.0;
  Field state = Field::Zero(m);
  z.times.push_back(0.0);
  z.values.push_back(state);
  std::size_t e = 0;
  for (std::size_t j = 0; j < n_steps; ++j) {
    const double t1 = horizon * static_cast<double>(j + 1) / static_cast<double>(n_steps);
    state *= decay;
    if (compensate) state -= comp_weight * noise.compensator_rate();
    while (e < z.jumps.events.size() && z.jumps.events[e].time <= t1) {
      const JumpEvent& ev = z.jumps.events[e++];
      state += (-kappa * (t1 - ev.time)).exp() * noise.jump(ev.mark);
    }
    z.times.push_back(t1);
    z.values.push_back(state);
  }
  return z;
}

FieldPath solve_y(const SpectralGrid& grid, const ZPath& z, const Field& y0, const std::optional<Field>& background) {
  check_size(grid, y0, "solve_y");
  if (z.times.size() < 2) throw ArgumentError("solve_y: Z path needs at least one step");
  if (background) check_size(grid, *background, "solve_y background");
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::ArrayXd kappa(m);
  for (Eigen::Index i = 0; i < m; ++i) kappa[i] = grid.k_squared(static_cast<std::size_t>(i));
  FieldPath y;
  y.times = z.times;
  y.values.reserve(z.times.size());
  Field state = y0;
  y.values.push_back(state);
  for (std::size_t j = 0; j + 1 < z.times.size(); ++j) {
    const double t0 = z.times[j], dt = z.times[j + 1] - t0;
    Field total = state + z.values[j];
    if (background) total += heat(grid, *background, t0);
    const Field b = nonlinear_term(grid, total);
    state = (-kappa * dt).exp() * (state - dt * b);
    if (!state.allFinite()) throw BlowUpError("Y-equation produced a non-finite state", z.times[j + 1]);
    y.values.push_back(state);
  }
  return y;
}

FieldPath assemble_theta(const SpectralGrid& grid, const Field& theta0, const FieldPath& y, const FieldPath& z) {
  check_size(grid, theta0, "assemble_theta");
  if (y.times != z.times) throw ArgumentError("assemble_theta: Y and Z live on different grids");
  FieldPath theta;
  theta.times = y.times;
  for (std::size_t j = 0; j < y.times.size(); ++j)
    theta.values.push_back(heat(grid, theta0, y.times[j]) + y.values[j] + z.values[j]);
  return theta;
}

double mild_residual(const SpectralGrid& grid, const Field& theta0, const FieldPath& theta, const FieldPath& z) {
  if (theta.times != z.times || theta.times.size() < 2)
    throw ArgumentError("mild_residual: theta and Z must share a grid with at least one step");
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double horizon = theta.times.back();
  Field integral = Field::Zero(m);
  Field b_prev = nonlinear_term(grid, theta.values.front());
  for (std::size_t j = 0; j + 1 < theta.times.size(); ++j) {
    const double a = theta.times[j], b = theta.times[j + 1], dt = b - a;
    const Field b_next = nonlinear_term(grid, theta.values[j + 1]);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double kappa = grid.k_squared(static_cast<std::size_t>(i));
      const auto [w0, w1] = exp_weights(kappa, dt);
      integral[i] += std::exp(-kappa * (horizon - b)) * (w0 * b_prev[i] + w1 * (b_next[i] - b_prev[i]));
    }
    b_prev = b_next;
  }
  const Field defect = theta.values.back() - (heat(grid, theta0, horizon) - integral + z.values.back());
  const double scale = l2_norm(grid, theta.values.back());
  return scale > 0.0 ? l2_norm(grid, defect) / scale : l2_norm(grid, defect);
}

Run run(const RunConfig& config, std::uint32_t replicate) {
  if (!(config.horizon > 0.0) || config.n_steps == 0) throw ArgumentError("qge run needs T > 0 and n_steps >= 1");
  SpectralGrid grid(config.n);
  const NoiseModel noise(grid, config.noise);
  Field theta0 = random_band_limited(grid, config.theta0_modes, config.theta0_l2, config.seed, replicate);
  ZPath z = ou_convolution_z(grid, noise, config.horizon, config.n_steps, config.seed, replicate);
  FieldPath y = solve_y(grid, z, Field::Zero(static_cast<Eigen::Index>(grid.size())), theta0);
  FieldPath theta = assemble_theta(grid, theta0, y, z);
  return Run{std::move(grid), std::move(theta0), std::move(z), std::move(y), std::move(theta)};
}

double riesz_l4_constant(const SpectralGrid& grid, std::size_t n_fields, std::uint64_t seed,
                         const std::vector<Field>& extra) {
  double best = 0.0;
  auto probe = [&](const Field& f) {
    const double den = sobolev_norm(grid, f, 0.0, 4.0);
    if (den > 0.0) best = std::max(best, velocity_l4(grid, riesz_velocity(grid, f)) / den);
  };
  const int cutoff = grid.dealias_cutoff();
  for (std::size_t i = 0; i < n_fields; ++i) {
    const int modes = 1 + static_cast<int>(i % static_cast<std::size_t>(cutoff));
    probe(random_band_limited(grid, modes, 1.0, seed, static_cast<std::uint32_t>(i)));
  }
  for (const auto& f : extra) probe(f);
  return best;
}

double ladyzhenskaya_ratio(const SpectralGrid& grid, const Field& y) {
  const double l4 = sobolev_norm(grid, y, 0.0, 4.0);
  const double den = std::sqrt(gradient_norm(grid, y) * l2_norm(grid, y));
  return den > 0.0 ? l4 / den : 0.0;
}

EnergyLedger energy_diagnostics(const Run& run, double riesz_constant) {
  const SpectralGrid& grid = run.grid;
  const auto& times = run.theta.times;
  const std::size_t nodes = times.size();
  EnergyLedger ledger;
  ledger.riesz_constant = riesz_constant;

  std::vector<Field> ytilde(nodes);
  for (std::size_t j = 0; j < nodes; ++j) ytilde[j] = run.theta.values[j] - run.z.values[j];

  ledger.rows.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    LedgerRow& row = ledger.rows[j];
    row.t = times[j];
    const double l2 = l2_norm(grid, ytilde[j]);
    const double g = gradient_norm(grid, ytilde[j]);
    row.y_l2_sq = l2 * l2;
    row.grad_y_l2_sq = g * g;
    row.z_l4 = sobolev_norm(grid, run.z.values[j], 0.0, 4.0);
    row.ladyzhenskaya = ladyzhenskaya_ratio(grid, ytilde[j]);
    ledger.ladyzhenskaya_max = std::max(ledger.ladyzhenskaya_max, row.ladyzhenskaya);
  }
  const double lady_bound = std::pow(2.0, 0.25);
  ledger.ladyzhenskaya = {ledger.ladyzhenskaya_max, lady_bound, ledger.ladyzhenskaya_max <= lady_bound + 1e-6};
  ledger.ladyzhenskaya_flagged = !ledger.ladyzhenskaya.ok;
  ledger.c = riesz_constant * std::max(1.0, ledger.ladyzhenskaya_max / lady_bound);
  ledger.c1 = 13.5 * std::pow(ledger.c, 4);
  ledger.c2 = 2.0 * ledger.c * ledger.c;

  // Stepwise energy inequality and left-point accumulations of |Z|^4 dt.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> z4dt(nodes - 1);
  double z2_int = 0.0, z4_int = 0.0, grad_int = 0.0, sup_y = 0.0;
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    LedgerRow& row = ledger.rows[j];
    const double dt = times[j + 1] - times[j];
    const double z4 = std::pow(row.z_l4, 4);
    row.energy_lhs = (ledger.rows[j + 1].y_l2_sq - row.y_l2_sq) / (2.0 * dt) + 0.5 * ledger.rows[j + 1].grad_y_l2_sq;
    row.energy_rhs = 0.5 * ledger.c1 * row.y_l2_sq * z4 + 0.5 * ledger.c2 * z4;
    if (row.energy_rhs - row.energy_lhs < worst_margin) {
      worst_margin = row.energy_rhs - row.energy_lhs;
      ledger.stepwise = {row.energy_lhs, row.energy_rhs, row.energy_lhs <= row.energy_rhs};
    }
    z4dt[j] = z4 * dt;
    z4_int += z4dt[j];
    z2_int += row.z_l4 * row.z_l4 * dt;
    grad_int += ledger.rows[j + 1].grad_y_l2_sq * dt;
  }
  for (const auto& row : ledger.rows) sup_y = std::max(sup_y, row.y_l2_sq);
  if (nodes < 2) ledger.stepwise = {0.0, 0.0, true};

  const double y0 = ledger.rows.front().y_l2_sq;
  double tail = 0.0, forcing = 0.0;
  for (std::size_t j = nodes - 1; j-- > 0;) {
    tail += z4dt[j];  // int_{t_j}^T |Z|^4
    forcing += std::exp(ledger.c1 * tail) * z4dt[j];
  }
  ledger.gronwall_sup = {sup_y, std::exp(ledger.c1 * z4_int) * y0 + ledger.c2 * forcing, false};
  ledger.gronwall_sup.ok = ledger.gronwall_sup.lhs <= ledger.gronwall_sup.rhs;
  ledger.gronwall_gradient = {grad_int, y0 + ledger.c1 * sup_y * z4_int + ledger.c2 * z4_int, false};
  ledger.gronwall_gradient.ok = ledger.gronwall_gradient.lhs <= ledger.gronwall_gradient.rhs;
  ledger.gronwall_gradient_z2 = {grad_int, y0 + ledger.c1 * sup_y * z4_int + ledger.c2 * z2_int, false};
  ledger.gronwall_gradient_z2.ok = ledger.gronwall_gradient_z2.lhs <= ledger.gronwall_gradient_z2.rhs;
  return ledger;
}

}  // namespace levymax::qge
