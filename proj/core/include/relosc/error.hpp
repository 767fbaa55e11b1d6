#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relosc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed field expression. `position` is the 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A field produced a non-finite value or hit a domain error (sqrt of a
/// negative, division by zero). Carries the offending grid node when known.
class EvaluationFault : public Error {
 public:
  static constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

  explicit EvaluationFault(const std::string& message, std::size_t node = kNoNode)
      : Error(node == kNoNode ? message : message + " (node " + std::to_string(node) + ")"),
        node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Dykstra iteration hit its sweep cap.
class ProjectionError : public Error {
 public:
  ProjectionError(const std::string& message, double gap) : Error(message), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

/// A value type invariant does not hold.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Slope at or beyond the speed bound, where the kernel gradient is undefined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis on the instance (growth, witnesses, ...) failed.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Kink search found no supergradient jump in the requested box.
class NoJumpFound : public Error {
 public:
  using Error::Error;
};

}  // namespace relosc
