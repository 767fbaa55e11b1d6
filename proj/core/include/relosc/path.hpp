#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relosc {

struct ProblemInstance;

inline constexpr double kDefaultMargin = 1e-3;

/// A discretized T-periodic Lipschitz path: N nodes u_0..u_{N-1} in R^n on
/// the uniform grid t_i = i h, h = T/N, closed by u_N = u_0. Slopes are
/// derived, d_i = (u_{i+1 mod N} - u_i)/h, so closure holds structurally.
///
/// Construction validates |d_i| <= L(1-margin), sum_i d_i = 0 and
/// max|u_i| <= L T + min|u_i|, throwing InvariantViolation otherwise.
class PeriodicPath {
 public:
  /// `nodes` is row-major, N rows of n coordinates.
  PeriodicPath(int n, double T, std::vector<double> nodes, double L, double margin = kDefaultMargin);

  int dim() const noexcept { return n_; }
  int intervals() const noexcept { return N_; }
  double horizon() const noexcept { return T_; }
  double step() const noexcept { return T_ / N_; }
  double speed_bound() const noexcept { return L_; }
  double margin() const noexcept { return margin_; }
  double time(int i) const noexcept { return step() * i; }

  std::span<const double> node(int i) const {
    return {nodes_.data() + static_cast<std::ptrdiff_t>(i) * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const double> data() const noexcept { return nodes_; }

  /// Writes d_i into `out`.
  void slope(int i, std::span<double> out) const;
  double max_slope() const;
  double sup_norm() const;
  double inf_norm() const;
  /// Mean node (component-wise).
  std::vector<double> mean() const;

  bool operator==(const PeriodicPath& other) const = default;

 private:
  int n_;
  int N_;
  double T_;
  double L_;
  double margin_;
  std::vector<double> nodes_;
};

/// max_i |a_i - b_i| over nodes (Euclidean in R^n). Paths must share grid and dimension.
double sup_distance(const PeriodicPath& a, const PeriodicPath& b);

/// Process-wide tally of path constructions and invariant failures.
struct PathAudit {
  std::uint64_t constructed = 0;
  std::uint64_t violations = 0;
};
PathAudit path_audit();

struct ProjectionStats {
  int sweeps = 0;
  double gap = 0.0;
};

/// Euclidean projection of N slope vectors (row-major, n each) onto
/// {d : |d_i| <= radius, sum_i d_i = 0}. Solves for the multiplier nu of the
/// zero-sum constraint, d_i = P_ball(s_i - nu): exactly on breakpoints for
/// n = 1, by semismooth Newton for n >= 2 (falling back to Dykstra if Newton
/// stalls).
std::vector<double> project_slopes(std::span<const double> slopes, int n, double radius, ProjectionStats* stats = nullptr,
                                   double tol = 1e-12, int max_sweeps = 10000);

/// The same projection by Dykstra's alternating projection between the
/// product of balls and the zero-sum hyperplane. Stops once the two iterates
/// agree and stop moving to within `tol` (sup norm), or throws
/// ProjectionError after `max_sweeps`.
std::vector<double> project_slopes_dykstra(std::span<const double> slopes, int n, double radius,
                                           ProjectionStats* stats = nullptr, double tol = 1e-12,
                                           int max_sweeps = 10000);

/// Projects raw nodes onto the feasible path set: slopes are projected with
/// radius L(1-margin) and the mean of the raw nodes is kept.
PeriodicPath project_feasible(int n, double T, std::span<const double> raw_nodes, double L,
                              double margin = kDefaultMargin, ProjectionStats* stats = nullptr);

/// Random multi-start seed: a constant at a uniform point of [-box, box]^n plus
/// 1-3 Fourier modes of amplitude <= L T / 8, projected feasible. Deterministic
/// in `seed`. `mode_scale` multiplies the mode amplitudes (0 gives a constant).
PeriodicPath sample_path(const ProblemInstance& instance, int N, std::uint64_t seed, double box_radius,
                         double margin = kDefaultMargin, double mode_scale = 1.0);

/// CSV dump `i,t,x1..xn`, one row per node plus the closure row i = N.
std::string path_to_csv(const PeriodicPath& path);
/// Parses a dump and re-validates every invariant. Throws InvariantViolation
/// on malformed input, inconsistent closure row or invariant failure.
PeriodicPath path_from_csv(std::string_view csv, double L, double margin = kDefaultMargin);

}  // namespace relosc
