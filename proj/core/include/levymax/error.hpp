#pragma once

#include <stdexcept>
#include <string>

namespace levymax {

/// Bad arguments or violated preconditions (dimension mismatch, empty probe, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent outside the supported range of the norm calculus.
class UnsupportedExponentError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A NaN or infinity appeared during evaluation; the message names where.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested operation needs something the inputs do not provide
/// (e.g. a second derivative).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hypothesis integral required by an inequality is not finite.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time stepping produced a non-finite state.
class BlowUpError : public NumericError {
 public:
  BlowUpError(const std::string& what, double time)
      : NumericError(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace levymax
