#include "levymax/semigroup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "levymax/error.hpp"

namespace levymax {

namespace {

// (e^{lambda t} - 1) / lambda, equal to t when lambda = 0.
double phi1(double lambda, double t) {
  if (lambda == 0.0) return t;
  const double x = lambda * t;
  if (std::abs(x) < 1e-5) return t * (1.0 + x / 2.0 + x * x / 6.0);
  return std::expm1(x) / lambda;
}

}  // namespace

Semigroup::Semigroup(Eigen::MatrixXd a, Eigen::VectorXd eigs, bool diagonal, double alpha)
    : generator_(std::move(a)), eigs_(std::move(eigs)), diagonal_(diagonal), alpha_(alpha) {}

Semigroup Semigroup::matrix(Eigen::MatrixXd a, double growth_alpha) {
  if (a.rows() == 0 || a.rows() != a.cols()) throw ArgumentError("generator must be a non-empty square matrix");
  if (!(growth_alpha >= 0.0)) throw ArgumentError("growth bound alpha must be >= 0");
  if (!a.allFinite()) throw ArgumentError("generator has non-finite entries");
  return Semigroup(std::move(a), Eigen::VectorXd(), false, growth_alpha);
}

Semigroup Semigroup::diagonal(Eigen::VectorXd eigs, double growth_alpha) {
  if (eigs.size() == 0) throw ArgumentError("diagonal generator needs at least one eigenvalue");
  if (!(growth_alpha >= 0.0)) throw ArgumentError("growth bound alpha must be >= 0");
  if (!eigs.allFinite()) throw ArgumentError("generator has non-finite eigenvalues");
  if (eigs.maxCoeff() > growth_alpha)
    throw ArgumentError("diagonal generator has an eigenvalue above the growth bound alpha");
  Eigen::MatrixXd a = eigs.asDiagonal();
  return Semigroup(std::move(a), std::move(eigs), true, growth_alpha);
}

Semigroup Semigroup::identity(std::size_t dim) {
  return diagonal(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), 0.0);
}

bool Semigroup::is_trivial() const noexcept { return generator_.isZero(0.0); }

Eigen::MatrixXd Semigroup::action(double t) const {
  if (diagonal_) return (eigs_ * t).array().exp().matrix().asDiagonal();
  return (generator_ * t).exp();
}

Eigen::VectorXd Semigroup::apply(double t, const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw ArgumentError("semigroup: dimension mismatch");
  if (diagonal_) return ((eigs_ * t).array().exp() * x.array()).matrix();
  return action(t) * x;
}

Eigen::VectorXd Semigroup::integrated_apply(double t, const Eigen::VectorXd& c) const {
  if (static_cast<std::size_t>(c.size()) != dim()) throw ArgumentError("semigroup: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(dim());
  if (diagonal_) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = phi1(eigs_[i], t) * c[i];
    return out;
  }
  // exp(t [[A, c], [0, 0]]) carries int_0^t e^{sA} c ds in its last column.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = generator_;
  aug.topRightCorner(n, 1) = c;
  const Eigen::MatrixXd e = (aug * t).exp();
  return e.topRightCorner(n, 1);
}

}  // namespace levymax
