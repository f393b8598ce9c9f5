#include "levymax/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "levymax/error.hpp"

namespace levymax {

namespace {

struct Evolution {
  std::size_t dim = 1;
  const JumpField* jumps = nullptr;
  const MarkSpace* compensate = nullptr;  // subtract int xi dnu when set
  const Semigroup* semigroup = nullptr;
  const WienerField* g = nullptr;
  const WienerPath* w = nullptr;          // on exactly the evolution grid
};

void check_finite(const Vector& v, const char* what, double t) {
  if (!v.allFinite())
    throw NumericError(std::string(what) + " is not finite at t = " + std::to_string(t));
}

SamplePath evolve(const Evolution& ev, const JumpPath& path, const std::vector<double>& grid) {
  const auto dim = static_cast<Eigen::Index>(ev.dim);
  const std::size_t m = grid.size();
  SamplePath out;
  out.times = grid;
  out.values = Matrix::Zero(dim, static_cast<Eigen::Index>(m));
  out.left_limits = Matrix::Zero(dim, static_cast<Eigen::Index>(m));
  out.is_jump.assign(m, 0);
  if (ev.w && ev.w->times.size() != m) throw ArgumentError("Wiener path grid does not match the integration grid");

  Vector x = Vector::Zero(dim);
  std::size_t e = 0;
  while (e < path.events.size() && path.events[e].time <= grid.front()) ++e;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double t0 = grid[i], t1 = grid[i + 1];
    const double dt = t1 - t0;
    const double mid = 0.5 * (t0 + t1);
    Vector next = ev.semigroup ? ev.semigroup->apply(dt, x) : x;
    if (ev.compensate) {
      const Vector c = compensator(*ev.jumps, *ev.compensate, mid);
      check_finite(c, "compensator", mid);
      if (ev.semigroup)
        next -= ev.semigroup->integrated_apply(dt, c);
      else
        next -= c * dt;
    }
    if (ev.g && ev.w) {
      const Vector gw = (*ev.g)(t0) * ev.w->increments.row(static_cast<Eigen::Index>(i)).transpose();
      next += ev.semigroup ? ev.semigroup->apply(dt, gw) : gw;
    }
    out.left_limits.col(static_cast<Eigen::Index>(i + 1)) = next;
    bool jumped = false;
    while (e < path.events.size() && path.events[e].time <= t1) {
      const JumpEvent& ev_jump = path.events[e++];
      const Vector dx = (*ev.jumps)(ev_jump.time, ev_jump.mark);
      check_finite(dx, "jump integrand", ev_jump.time);
      if (ev.semigroup && ev_jump.time < t1)
        next += ev.semigroup->apply(t1 - ev_jump.time, dx);
      else
        next += dx;
      jumped = true;
    }
    out.values.col(static_cast<Eigen::Index>(i + 1)) = next;
    out.is_jump[i + 1] = jumped;
    x = std::move(next);
  }
  return out;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw ArgumentError("integration grid needs at least two nodes");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw ArgumentError("integration grid must be strictly increasing");
}

void check_dim(const JumpField& f, const char* what) {
  if (!f) throw ArgumentError(std::string(what) + ": empty jump integrand");
  if (f.dim == 0) throw ArgumentError(std::string(what) + ": integrand dimension must be positive");
}

}  // namespace

JumpField mark_proportional(std::size_t dim, double scale) {
  return {dim, [dim, scale](double, const Mark& z) -> Vector {
            if (static_cast<std::size_t>(z.value.size()) != dim)
              throw ArgumentError("mark dimension differs from the space dimension");
            return scale * z.value;
          }};
}

double SamplePath::sup_norm(const NormedSpace& space) const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < values.cols(); ++i) {
    best = std::max(best, space.norm(values.col(i)));
    if (is_jump[static_cast<std::size_t>(i)]) best = std::max(best, space.norm(left_limits.col(i)));
  }
  return best;
}

void SamplePath::write_csv(std::ostream& out) const {
  out << 't';
  for (std::size_t j = 0; j < dim(); ++j) out << ",x_" << j;
  for (std::size_t j = 0; j < dim(); ++j) out << ",left_" << j;
  out << ",is_jump\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    out << times[i];
    const auto c = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < values.rows(); ++j) out << ',' << values(j, c);
    for (Eigen::Index j = 0; j < values.rows(); ++j) out << ',' << left_limits(j, c);
    out << ',' << static_cast<int>(is_jump[i]) << '\n';
  }
  out.precision(old);
}

std::vector<double> uniform_grid(double horizon, std::size_t n_steps) {
  if (!(horizon > 0.0)) throw ArgumentError("horizon T must be positive");
  if (n_steps == 0) throw ArgumentError("grid needs at least one step");
  std::vector<double> g(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i)
    g[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
  g.back() = horizon;
  return g;
}

std::vector<double> augmented_grid(const std::vector<double>& grid, const JumpPath& path) {
  check_grid(grid);
  std::vector<double> out;
  out.reserve(grid.size() + path.events.size());
  std::size_t e = 0;
  for (double t : grid) {
    while (e < path.events.size() && path.events[e].time < t) {
      const double tau = path.events[e++].time;
      if (tau > grid.front() && (out.empty() || tau > out.back())) out.push_back(tau);
    }
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

Vector compensator(const JumpField& xi, const MarkSpace& marks, double t) {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(xi.dim));
  Mark z;
  for (const auto& node : marks.nodes()) {
    z.layer = node.layer;
    z.value = node.value;
    c += node.weight * xi(t, z);
  }
  return c;
}

SamplePath integrate_compensated(const JumpField& xi, const JumpPath& path, const MarkSpace& marks,
                                 const std::vector<double>& grid) {
  check_dim(xi, "integrate_compensated");
  Evolution ev;
  ev.dim = xi.dim;
  ev.jumps = &xi;
  ev.compensate = &marks;
  return evolve(ev, path, augmented_grid(grid, path));
}

SamplePath integrate_counting(const JumpField& f, const JumpPath& path, const std::vector<double>& grid) {
  check_dim(f, "integrate_counting");
  Evolution ev;
  ev.dim = f.dim;
  ev.jumps = &f;
  return evolve(ev, path, augmented_grid(grid, path));
}

SamplePath integrate_wiener(const WienerField& g, const WienerPath& w) {
  if (!g) throw ArgumentError("integrate_wiener: empty integrand");
  check_grid(w.times);
  if (g.k != w.k()) throw ArgumentError("integrate_wiener: integrand has k = " + std::to_string(g.k) +
                                        " columns but the Wiener path has " + std::to_string(w.k()));
  JumpField none{g.dim, [](double, const Mark&) -> Vector { return {}; }};
  Evolution ev;
  ev.dim = g.dim;
  ev.jumps = &none;
  ev.g = &g;
  ev.w = &w;
  return evolve(ev, JumpPath{w.horizon(), {}, w.seed, w.replicate}, w.times);
}

SamplePath convolve(const JumpField& xi, const JumpPath& path, const MarkSpace& marks,
                    const Semigroup& semigroup, const std::vector<double>& grid) {
  check_dim(xi, "convolve");
  if (semigroup.dim() != xi.dim) throw ArgumentError("convolve: semigroup and integrand dimensions differ");
  Evolution ev;
  ev.dim = xi.dim;
  ev.jumps = &xi;
  ev.compensate = &marks;
  ev.semigroup = &semigroup;
  return evolve(ev, path, augmented_grid(grid, path));
}

SamplePath convolve_levy(const WienerField& g, const JumpField& xi, const WienerPath& w,
                         const JumpPath& path, const MarkSpace& marks, const Semigroup& semigroup,
                         const std::vector<double>& grid) {
  check_dim(xi, "convolve_levy");
  if (semigroup.dim() != xi.dim || (g && g.dim != xi.dim))
    throw ArgumentError("convolve_levy: dimensions of g, xi and the semigroup differ");
  if (w.times != grid) throw ArgumentError("convolve_levy: Wiener path must live on the integration grid");
  if (g && g.k != w.k()) throw ArgumentError("convolve_levy: g and the Wiener path differ in k");
  const auto aug = augmented_grid(grid, path);
  std::vector<double> taus;
  for (const auto& e : path.events) taus.push_back(e.time);
  const WienerPath fine = w.refine(taus);
  if (fine.times != aug) throw NumericError("convolve_levy: refined Wiener grid does not match the jump grid");
  Evolution ev;
  ev.dim = xi.dim;
  ev.jumps = &xi;
  ev.compensate = &marks;
  ev.semigroup = semigroup.is_trivial() ? nullptr : &semigroup;
  if (g) {
    ev.g = &g;
    ev.w = &fine;
  }
  return evolve(ev, path, aug);
}

QuadraticFunctionals quadratic_functionals(const JumpField& xi, const JumpPath& path,
                                           const MarkSpace& marks, double r, const NormedSpace& space,
                                           const std::vector<double>& grid) {
  check_dim(xi, "quadratic_functionals");
  JumpField power{1, [&](double t, const Mark& z) -> Vector {
                    return Vector::Constant(1, std::pow(space.norm(xi(t, z)), r));
                  }};
  QuadraticFunctionals q{integrate_counting(power, path, grid), {}};
  const auto& times = q.counting.times;
  q.meyer.times = times;
  q.meyer.values = Matrix::Zero(1, static_cast<Eigen::Index>(times.size()));
  q.meyer.is_jump.assign(times.size(), 0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    const double rate = compensator(power, marks, 0.5 * (times[i] + times[i + 1]))[0];
    q.meyer.values(0, static_cast<Eigen::Index>(i + 1)) = q.meyer.values(0, static_cast<Eigen::Index>(i)) + rate * dt;
  }
  q.meyer.left_limits = q.meyer.values;
  return q;
}

double nu_moment(const JumpField& xi, const MarkSpace& marks, double power, const NormedSpace& space,
                 const std::vector<double>& grid) {
  check_grid(grid);
  double total = 0.0;
  Mark z;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    double rate = 0.0;
    for (const auto& node : marks.nodes()) {
      z.layer = node.layer;
      z.value = node.value;
      rate += node.weight * std::pow(space.norm(xi(mid, z)), power);
    }
    total += rate * (grid[i + 1] - grid[i]);
  }
  return total;
}

}  // namespace levymax
