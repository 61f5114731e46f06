#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hamgeo {

/// Malformed expression text. `position()` is the byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Mismatched or out-of-range dimensions and variable indices.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of an operation (division by zero, ln of a
/// non-positive number, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A derivative was requested beyond the order carried by a jet.
class OrderError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Momentum Hessian (or a J-regularity matrix) is numerically singular.
class RegularityError : public std::runtime_error {
 public:
  RegularityError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}

  /// Reciprocal condition estimate that triggered the failure.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// A theorem's hypothesis does not hold at the requested point.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hamgeo
