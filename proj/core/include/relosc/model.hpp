#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relosc/expression.hpp"

namespace relosc {

/// Convex kinetic kernel Phi on the closed ball of radius L, with its
/// gradient phi (a homeomorphism of the open ball onto R^n) and phi^-1.
///
/// The relativistic kernel Phi(x) = -sqrt(L^2 - |x|^2) is built in and
/// evaluated in closed form. Other kernels are supplied as eval/grad/inverse
/// callables and property-checked when registered.
class PhiModel {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using MapFn = std::function<void(std::span<const double>, std::span<double>)>;

  /// Throws std::invalid_argument unless L > 0.
  static PhiModel relativistic(double L);

  /// Registers a user kernel after checking, on random points in dimensions
  /// 1..3: Phi <= 0, 0 is the strict minimum, phi(0) = 0, midpoint strict
  /// convexity, and inverse(grad(x)) = x on |x| <= 0.99 L. Throws
  /// InvariantViolation naming the first failed property.
  static PhiModel custom(std::string name, double L, EvalFn eval, MapFn grad, MapFn inverse);

  const std::string& name() const noexcept { return name_; }
  double speed_bound() const noexcept { return L_; }

  /// Throws DomainError for |x| > L.
  double eval(std::span<const double> x) const;
  /// Throws DomainError for |x| >= L.
  void grad(std::span<const double> x, std::span<double> out) const;
  void inverse(std::span<const double> y, std::span<double> out) const;
  /// Phi(b) - Phi(a) without cancellation when b is close to a: closed form
  /// for the relativistic kernel, trapezoid rule on phi for short steps of
  /// a custom kernel.
  double difference(std::span<const double> a, std::span<const double> b) const;

  /// Second derivative of Phi at 0 along any axis (1/L for the relativistic kernel).
  double curvature_at_zero() const noexcept { return curvature0_; }

 private:
  PhiModel() = default;

  std::string name_;
  double L_ = 1.0;
  double curvature0_ = 1.0;
  bool relativistic_ = true;
  EvalFn eval_;
  MapFn grad_;
  MapFn inverse_;
};

/// Canonical kernel: Phi(x) = -sqrt(L^2-|x|^2), phi(x) = x/sqrt(L^2-|x|^2),
/// phi^-1(y) = L y / sqrt(1+|y|^2).
PhiModel make_relativistic_phi(double L);

ScalarField parse_field(std::string_view source, int n);

enum class GammaSide { Inf, Sup };

std::string_view to_string(GammaSide side);
std::optional<GammaSide> gamma_side_from_string(std::string_view s);

/// Closed-form growth data for instances where it is known analytically:
/// |G| + |H| <= c1 |x|^q outside B_delta, and F >= c3 |x|^q once
/// |x| >= f_radius(c3).
struct GrowthClosedForm {
  double c1 = 0.0;
  double delta = 0.0;
  std::function<double(double)> f_radius;
};

/// A perturbed relativistic-oscillator problem on [0,T] in R^n.
struct ProblemInstance {
  std::string name;
  int n = 1;
  double T = 1.0;
  PhiModel phi = PhiModel::relativistic(1.0);
  ScalarField F = ScalarField::constant(0.0, 1);
  ScalarField G = ScalarField::constant(0.0, 1);
  ScalarField H = ScalarField::constant(0.0, 1);
  ScalarField alpha = ScalarField::constant(1.0, 1);
  double q = 1.0;
  std::optional<GammaSide> gamma_side;
  std::optional<std::vector<double>> v;
  std::optional<std::vector<double>> w;
  std::optional<GrowthClosedForm> growth;

  double L() const noexcept { return phi.speed_bound(); }
  bool autonomous() const noexcept { return !F.uses_t() && !G.uses_t() && !alpha.uses_x(); }
  bool has_witnesses() const noexcept { return gamma_side && v && w; }
  /// H(v); requires witnesses.
  double gamma() const;
};

/// One named static check on an instance.
struct Diagnostic {
  std::string check;
  bool ok = true;
  std::string message;
};

/// Static checks: field arities, H independent of t, alpha independent of x,
/// alpha of constant sign on 10^4 samples, and, when witnesses are present,
/// |H(v)-gamma|, |H(w)-gamma| <= 1e-12 and |int G(.,v) - int G(.,w)| > 1e-9.
std::vector<Diagnostic> check_instance(const ProblemInstance& instance);

/// Throws InvariantViolation carrying the first failed diagnostic.
void require_valid(const ProblemInstance& instance);

/// Integral over [0,T] of a continuous function of t (composite Simpson, 2048 panels).
double integrate_time(const std::function<double(double)>& f, double T);

double integral_G(const ProblemInstance& instance, std::span<const double> x);
double integral_alpha(const ProblemInstance& instance);
/// Sup of |alpha| on a 10^4-point grid.
double alpha_sup(const ProblemInstance& instance);

/// Registry: remark1-convex, cosine-desk, conjecture-doublewell.
std::vector<std::string> builtin_names();
/// Throws std::invalid_argument for unknown names.
ProblemInstance builtin_instance(std::string_view name);

}  // namespace relosc
