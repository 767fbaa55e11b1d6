#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace relosc {

/// Largest spatial dimension a field may reference.
inline constexpr int kMaxDimension = 16;

struct Tape;

/// A scalar field f(t, x1..xn) parsed from the expression DSL:
///
///     expr   := term (('+'|'-') term)*
///     term   := factor (('*'|'/') factor)*
///     factor := '-' factor | atom ('^' number)?
///     atom   := number | 't' | 'x'digit+ | func '(' expr ')' | '(' expr ')'
///     func   := sin | cos | exp | sqrt | abs
///
/// The expression is compiled to a postfix tape. Evaluation is reentrant;
/// derivatives with respect to x are computed in forward mode. Domain errors
/// (division by zero, sqrt of a negative, non-finite results) raise
/// EvaluationFault instead of producing NaN.
class ScalarField {
 public:
  /// Throws ParseError on syntax errors and on x_k with k outside 1..n.
  static ScalarField parse(std::string_view source, int n);
  static ScalarField constant(double value, int n);

  int arity() const noexcept { return arity_; }
  const std::string& source() const noexcept { return source_; }
  bool uses_t() const noexcept;
  bool uses_x() const noexcept;

  double value(double t, std::span<const double> x) const;

  /// Writes d/dx_k into `grad` (size >= arity) and returns the value.
  double value_and_gradient(double t, std::span<const double> x, std::span<double> grad) const;

 private:
  ScalarField(std::string source, int arity, std::shared_ptr<const Tape> tape);

  std::string source_;
  int arity_ = 0;
  std::shared_ptr<const Tape> tape_;
};

}  // namespace relosc
