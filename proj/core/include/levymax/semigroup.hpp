#pragma once

#include <Eigen/Core>

namespace levymax {

/// The semigroup e^{tA} with declared growth bound |e^{tA}| <= e^{alpha t}.
class Semigroup {
 public:
  /// Dense generator; the action uses the matrix exponential.
  static Semigroup matrix(Eigen::MatrixXd a, double growth_alpha);
  /// Diagonal generator diag(eigs); every eigenvalue must be <= growth_alpha.
  static Semigroup diagonal(Eigen::VectorXd eigs, double growth_alpha);
  /// A = 0.
  static Semigroup identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(generator_.rows()); }
  bool is_diagonal() const noexcept { return diagonal_; }
  bool is_trivial() const noexcept;
  double growth_alpha() const noexcept { return alpha_; }
  const Eigen::MatrixXd& generator() const noexcept { return generator_; }
  /// Eigenvalues of a diagonal generator.
  const Eigen::VectorXd& eigs() const noexcept { return eigs_; }

  /// e^{tA} as a dense matrix.
  Eigen::MatrixXd action(double t) const;
  /// e^{tA} x.
  Eigen::VectorXd apply(double t, const Eigen::VectorXd& x) const;
  /// int_0^t e^{sA} c ds. Exact for both forms (augmented exponential for
  /// dense generators, (e^{lambda t} - 1)/lambda per mode for diagonal ones).
  Eigen::VectorXd integrated_apply(double t, const Eigen::VectorXd& c) const;

 private:
  Semigroup(Eigen::MatrixXd a, Eigen::VectorXd eigs, bool diagonal, double alpha);

  Eigen::MatrixXd generator_;
  Eigen::VectorXd eigs_;
  bool diagonal_;
  double alpha_;
};

}  // namespace levymax
