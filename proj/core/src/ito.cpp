#include "levymax/ito.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "levymax/error.hpp"
#include "levymax/rng.hpp"

namespace levymax {

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 6;
constexpr double kQuadTol = 1e-14;

// Parameters in (0, 1) where s -> |p + s d| may lose smoothness: the closest
// approach to the origin and the coordinate zero crossings.
void add_kinks(const Vector& p, const Vector& d, std::vector<double>& out) {
  const double dd = d.squaredNorm();
  if (dd == 0.0) return;
  const double s = -p.dot(d) / dd;
  if (s > 0.0 && s < 1.0) out.push_back(s);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (d[i] != 0.0) {
      const double c = -p[i] / d[i];
      if (c > 0.0 && c < 1.0) out.push_back(c);
    }
}

template <class F>
double integrate_pieces(F&& f, std::vector<double> breaks, double length) {
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] - breaks[i] < 1e-15) continue;
    total += GK::integrate(f, breaks[i], breaks[i + 1], kMaxDepth, kQuadTol);
  }
  return total * length;
}

void require_finite(double v, const char* term, double t) {
  if (!std::isfinite(v))
    throw NumericError(std::string("Ito term '") + term + "' is not finite near t = " + std::to_string(t));
}

Vector gaussian(Philox4x32& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& c : v) c = normal(rng);
  return v;
}

ItoReport ito_impl(const TestFunction& phi, const Vector& x0, const Integrand& x, const JumpPath& path,
                   const MarkSpace& marks, const WienerPath* w, const std::vector<double>& grid,
                   bool levy) {
  using namespace ito_terms;
  if (static_cast<std::size_t>(x0.size()) != x.dim) throw ArgumentError("X_0 has the wrong dimension");
  if ((x.xi && x.xi.dim != x.dim) || (x.eta && x.eta.dim != x.dim) || (x.a && x.a.dim != x.dim) ||
      (x.g && x.g.dim != x.dim))
    throw ArgumentError("integrand parts must share the dimension of X");
  const bool gaussian_part = levy && x.g;
  if (!levy && x.g) throw ArgumentError("the jump formula takes no Wiener part; use ito_residual_levy");
  if (gaussian_part) {
    if (!w) throw ArgumentError("a Wiener path is required when g is set");
    if (w->times != grid) throw ArgumentError("Wiener path must live on the base grid");
    if (x.g.k != w->k()) throw ArgumentError("g and the Wiener path differ in k");
  }

  // Disjoint supports of xi and eta on the quadrature nodes.
  if (x.xi && x.eta) {
    Mark z;
    for (const auto& node : marks.nodes()) {
      z.layer = node.layer;
      z.value = node.value;
      if (x.xi(0.0, z).norm() * x.eta(0.0, z).norm() != 0.0)
        throw ArgumentError("xi and eta must have disjoint supports (layer " + std::to_string(node.layer) + ")");
    }
  }

  const auto aug = augmented_grid(grid, path);
  std::optional<WienerPath> fine;
  if (gaussian_part) {
    std::vector<double> taus;
    for (const auto& e : path.events) taus.push_back(e.time);
    fine = w->refine(taus);
    if (fine->times != aug) throw NumericError("bridged Wiener grid does not match the jump grid");
  }

  double drift = 0.0, wiener = 0.0, trace = 0.0, eta_sum = 0.0, xi_sum = 0.0, correction = 0.0;
  std::size_t n_jumps = 0;
  Vector state = x0;
  std::size_t e = 0;
  Mark z;
  for (std::size_t i = 0; i + 1 < aug.size(); ++i) {
    const double t0 = aug[i], t1 = aug[i + 1], dt = t1 - t0, mid = 0.5 * (t0 + t1);
    Vector slope = Vector::Zero(state.size());
    Vector a_mid;
    if (x.a) {
      a_mid = x.a(mid);
      slope += a_mid;
    }
    std::vector<std::pair<double, Vector>> xi_nodes;
    if (x.xi) {
      for (const auto& node : marks.nodes()) {
        z.layer = node.layer;
        z.value = node.value;
        Vector v = x.xi(mid, z);
        if (v.squaredNorm() == 0.0) continue;
        slope -= node.weight * v;
        xi_nodes.emplace_back(node.weight, std::move(v));
      }
    }
    Vector end = state + slope * dt;
    if (gaussian_part) {
      const Matrix g = x.g(t0);
      const Vector gw = g * fine->increments.row(static_cast<Eigen::Index>(i)).transpose();
      end += gw;
      wiener += phi.gradient(state).dot(gw);
      trace += 0.5 * (g.transpose() * phi.hessian(state) * g).trace() * dt;
    }
    const Vector dir = end - state;
    auto along = [&](double s) -> Vector { return state + s * dir; };

    if (x.a) {
      std::vector<double> kinks;
      add_kinks(state, dir, kinks);
      drift += integrate_pieces([&](double s) { return phi.gradient(along(s)).dot(a_mid); }, kinks, dt);
    }
    if (!xi_nodes.empty()) {
      std::vector<double> kinks;
      add_kinks(state, dir, kinks);
      // Per-node kinks pay off only for a handful of atoms; dense quadrature
      // laws are left to the adaptive rule.
      if (xi_nodes.size() <= 32)
        for (const auto& [wt, v] : xi_nodes) add_kinks(state + v, dir, kinks);
      xi_sum -= integrate_pieces(
          [&](double s) {
            const Vector p = along(s);
            const double base = phi.value(p);
            double acc = 0.0;
            for (const auto& [wt, v] : xi_nodes) acc += wt * (phi.value(p + v) - base);
            return acc;
          },
          kinks, dt);
      correction += integrate_pieces(
          [&](double s) {
            const Vector p = along(s);
            const double base = phi.value(p);
            const Vector grad = phi.gradient(p);
            double acc = 0.0;
            for (const auto& [wt, v] : xi_nodes) acc += wt * (phi.value(p + v) - base - grad.dot(v));
            return acc;
          },
          kinks, dt);
    }

    state = end;
    while (e < path.events.size() && path.events[e].time <= t1) {
      const JumpEvent& ev = path.events[e++];
      const Vector jx = x.xi ? x.xi(ev.time, ev.mark) : Vector::Zero(state.size());
      const Vector je = x.eta ? x.eta(ev.time, ev.mark) : Vector::Zero(state.size());
      const bool has_xi = jx.squaredNorm() > 0.0, has_eta = je.squaredNorm() > 0.0;
      if (has_xi && has_eta)
        throw ArgumentError("xi and eta are both non-zero at the jump at t = " + std::to_string(ev.time));
      if (has_eta) {
        eta_sum += phi.value(state + je) - phi.value(state);
        state += je;
      } else if (has_xi) {
        xi_sum += phi.value(state + jx) - phi.value(state);
        state += jx;
      }
      ++n_jumps;
    }
    require_finite(drift + wiener + trace, "drift/wiener/trace", t1);
    require_finite(xi_sum + eta_sum + correction, "jump", t1);
  }

  ItoReport report;
  report.lhs = phi.value(state) - phi.value(x0);
  report.terms.emplace_back(kDrift, drift);
  if (levy) {
    report.terms.emplace_back(kWiener, wiener);
    report.terms.emplace_back(kTrace, trace);
  }
  report.terms.emplace_back(kEta, eta_sum);
  report.terms.emplace_back(kXi, xi_sum);
  report.terms.emplace_back(kCorrection, correction);
  report.residual = report.lhs - report.rhs();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) report.dt = std::max(report.dt, grid[i + 1] - grid[i]);
  report.n_jumps = n_jumps;
  require_finite(report.residual, "residual", grid.back());
  return report;
}

}  // namespace

TestFunction::TestFunction(std::string name, ValueFn v, GradientFn g, HessianFn h)
    : name_(std::move(name)), value_(std::move(v)), gradient_(std::move(g)), hessian_(std::move(h)) {}

TestFunction TestFunction::power_norm(const NormedSpace& space, double p) {
  if (!(p > 1.0)) throw UnsupportedExponentError("power_norm test function needs p > 1");
  HessianFn hess;
  if (space.is_hilbert() && p >= 2.0)
    hess = [space, p](const Vector& x) { return psi_p_hessian(space, x, p); };
  return TestFunction(
      "power_norm(p=" + short_number(p) + ")", [space, p](const Vector& x) { return space.psi(x, p); },
      [space, p](const Vector& x) { return psi_p_gradient(space, x, p).gradient; }, std::move(hess));
}

TestFunction TestFunction::exponential_tail(const NormedSpace& space, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("exponential_tail needs lambda > 0");
  HessianFn hess;
  if (space.is_hilbert())
    hess = [lambda](const Vector& x) {
      const double f = std::sqrt(1.0 + lambda * x.squaredNorm());
      const auto n = x.size();
      return Matrix((lambda / f) * Matrix::Identity(n, n) -
                    (lambda * lambda / (f * f * f)) * (x * x.transpose()));
    };
  return TestFunction(
      "exponential_tail(lambda=" + short_number(lambda) + ")",
      [space, lambda](const Vector& x) {
        const double n = space.norm(x);
        return std::sqrt(1.0 + lambda * n * n);
      },
      [space, lambda](const Vector& x) -> Vector {
        const double n = space.norm(x);
        if (n == 0.0) return Vector::Zero(x.size());
        const double f = std::sqrt(1.0 + lambda * n * n);
        return (lambda * n / f) * norm_gradient(space, x);
      },
      std::move(hess));
}

TestFunction TestFunction::linear(Vector v) {
  const auto n = v.size();
  return TestFunction(
      "linear", [v](const Vector& x) { return v.dot(x); }, [v](const Vector&) { return v; },
      [n](const Vector&) { return Matrix(Matrix::Zero(n, n)); });
}

TestFunction TestFunction::smooth_user(std::string name, ValueFn value, GradientFn gradient,
                                       HessianFn hessian) {
  if (!value || !gradient) throw ArgumentError("smooth_user needs a value and a gradient");
  return TestFunction(std::move(name), std::move(value), std::move(gradient), std::move(hessian));
}

Matrix TestFunction::hessian(const Vector& x) const {
  if (!hessian_) throw CapabilityError("test function '" + name_ + "' has no second derivative");
  return hessian_(x);
}

DerivativeCheck validate_derivatives(const TestFunction& phi, std::size_t dim, std::size_t n_points,
                                     std::uint64_t seed, double tolerance) {
  if (dim == 0 || n_points == 0) throw ArgumentError("validate_derivatives needs dim and n_points > 0");
  Philox4x32 rng({seed, streams::kProbe + 32, 0});
  DerivativeCheck out;
  const auto n = static_cast<Eigen::Index>(dim);
  for (std::size_t k = 0; k < n_points; ++k) {
    const Vector x = gaussian(rng, dim);
    const double h = 1e-5 * (1.0 + x.norm());
    const Vector grad = phi.gradient(x);
    Vector fd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (phi.value(xp) - phi.value(xm)) / (2.0 * h);
    }
    const double scale = std::max(grad.lpNorm<Eigen::Infinity>(), 1e-300);
    out.gradient_error = std::max(out.gradient_error, (fd - grad).lpNorm<Eigen::Infinity>() / scale);
    if (phi.has_hessian()) {
      const Matrix hess = phi.hessian(x);
      Matrix fdh(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fdh.col(i) = (phi.gradient(xp) - phi.gradient(xm)) / (2.0 * h);
      }
      const double hs = std::max(hess.lpNorm<Eigen::Infinity>(), 1e-300);
      out.hessian_error = std::max(out.hessian_error, (fdh - hess).lpNorm<Eigen::Infinity>() / hs);
    }
  }
  out.ok = out.gradient_error < tolerance && out.hessian_error < tolerance;
  return out;
}

double derivative_holder_probe(const TestFunction& phi, const NormedSpace& space, double alpha,
                               double radius, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ArgumentError("derivative_holder_probe: n_samples must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("Hoelder exponent must lie in (0, 1]");
  if (!(radius > 0.0)) throw ArgumentError("radius must be positive");
  Philox4x32 rng({seed, streams::kProbe + 40, 0});
  auto in_ball = [&](double r) {
    Vector v = gaussian(rng, space.dim());
    const double n = space.norm(v);
    return Vector(v * (r * rng.uniform01() / std::max(n, 1e-300)));
  };
  double best = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = in_ball(radius);
    Vector y = (i % 2 == 0) ? in_ball(radius) : Vector(x + in_ball(1e-3 * radius));
    if (space.norm(y) > radius) y *= radius / space.norm(y);
    const double d = space.norm(x - y);
    if (d == 0.0) continue;
    const double op = functional_norm(space, phi.gradient(x) - phi.gradient(y), seed + i);
    best = std::max(best, op / std::pow(d, alpha));
  }
  return best;
}

double taylor_remainder(const TestFunction& phi, const Vector& x, const Vector& y) {
  using Rule = boost::math::quadrature::gauss<double, 32>;
  const Vector h = y - x;
  if (h.squaredNorm() == 0.0) return 0.0;
  const double base = phi.gradient(x).dot(h);
  return Rule::integrate([&](double s) { return phi.gradient(x + s * h).dot(h) - base; }, 0.0, 1.0);
}

std::vector<double> interlace(const JumpPath& path, const MarkSpace& marks, std::size_t n) {
  if (n == 0) throw ArgumentError("interlace: layer index starts at 1");
  if (n > marks.size()) {
    if (!marks.total_mass_finite())
      throw ArgumentError("interlace: D_" + std::to_string(n) + " has infinite mass");
    throw ArgumentError("interlace: D_" + std::to_string(n) + " lies beyond the simulated layers");
  }
  std::vector<double> out;
  for (const auto& e : path.events)
    if (e.mark.layer < n) out.push_back(e.time);
  return out;
}

double ItoReport::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  throw ArgumentError("ItoReport has no term '" + name + "'");
}

double ItoReport::rhs() const {
  double s = 0.0;
  for (const auto& [k, v] : terms) s += v;
  return s;
}

ItoReport ito_residual_jump(const TestFunction& phi, const Vector& x0, const Integrand& x,
                            const JumpPath& path, const MarkSpace& marks, const std::vector<double>& grid) {
  return ito_impl(phi, x0, x, path, marks, nullptr, grid, false);
}

ItoReport ito_residual_levy(const TestFunction& phi, const Vector& x0, const Integrand& x,
                            const JumpPath& path, const MarkSpace& marks, const WienerPath& w,
                            const std::vector<double>& grid) {
  if (!phi.has_hessian())
    throw CapabilityError("the Ito formula with a Wiener part needs the second derivative of '" +
                          phi.name() + "'");
  return ito_impl(phi, x0, x, path, marks, &w, grid, true);
}

}  // namespace levymax
