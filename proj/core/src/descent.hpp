#pragma once

// Internal projected-descent engine shared by the action minimizer and the
// penalized attainment search.

#include <functional>
#include <span>
#include <vector>

namespace relosc::detail {

/// Applies M = a Delta + b I (Delta: periodic second difference on N nodes)
/// or its inverse, component-wise on row-major N x n arrays.
class CyclicPreconditioner {
 public:
  CyclicPreconditioner(int N, int n, double a, double b);

  void solve(std::span<const double> rhs, std::span<double> out) const;
  void multiply(std::span<const double> x, std::span<double> out) const;

 private:
  void thomas(const std::vector<double>& r, std::vector<double>& x) const;

  int N_;
  int n_;
  double a_;
  double b_;
  double gamma_;
  std::vector<double> cprime_;  // forward-sweep coefficients of the modified tridiagonal
  std::vector<double> denom_;
  std::vector<double> z_;       // Sherman-Morrison correction vector
  double z_factor_ = 0.0;
};

struct DescentProblem {
  int n = 1;
  int N = 4;
  double T = 1.0;
  double L = 1.0;
  double margin = 1e-3;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  /// Optional value(v) - value(u) free of cancellation; the line search
  /// falls back to subtracting values when unset.
  std::function<double(std::span<const double>, std::span<const double>)> difference;
  double curvature = 0.0;  ///< kinetic weight: M = (curvature/h) Delta + h shift I
  double shift = 1.0;
};

struct DescentSettings {
  double step0 = 1.0;
  double armijo = 1e-4;
  double tol = 1e-9;
  int max_iters = 20000;
  bool record_trace = false;
};

struct DescentResult {
  std::vector<double> nodes;
  double value = 0.0;
  bool stationary = false;
  int iterations = 0;
  double stationarity = 0.0;
  std::vector<double> trace;
};

/// `start` must already be feasible.
DescentResult projected_descent(const DescentProblem& problem, std::vector<double> start,
                                const DescentSettings& settings);

}  // namespace relosc::detail
