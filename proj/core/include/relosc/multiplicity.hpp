#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relosc/model.hpp"
#include "relosc/optimize.hpp"
#include "relosc/path.hpp"

namespace relosc {

/// beta(lambda, mu) = inf_K I + lambda psi1 + mu psi2, sampled by multistart,
/// with one Danskin supergradient (psi at the minimizer) per global cluster.
struct ValueSample {
  double lambda = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  std::vector<std::array<double, 2>> supergradients;
  int n_global = 0;
  std::vector<PeriodicPath> minimizers;  ///< global cluster representatives
  std::vector<double> values;            ///< their objective values
  std::vector<double> residuals;
  double gap = 0.0;      ///< spread of values over the global set
  bool flag = false;     ///< set by scan_plane
  std::string fault;     ///< non-empty when the evaluation failed (scan cells only)
};

ValueSample value_function(const ProblemInstance& instance, double lambda, double mu, const MinimizeOptions& opts);

/// Smallest sup-norm distance between a supergradient of `a` and one of `b`.
double supergradient_jump(const ValueSample& a, const ValueSample& b);
/// Largest sup-norm distance among the supergradients of one sample.
double supergradient_spread(const ValueSample& s);

struct ParamBox {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double mu_lo = 0.0;
  double mu_hi = 0.0;
};

/// A jump between neighbors at parameter distance dp (sup norm) counts when
/// it exceeds max(abs, slope * dp): psi moves continuously with the
/// parameters away from kinks, at a rate set by the curvature of the wells.
struct JumpRule {
  double abs = 0.25;
  double slope = 1.5;
  double threshold(double dp) const { return std::max(abs, slope * dp); }
};

struct ScanResult {
  ParamBox box;
  int lambda_steps = 1;
  int mu_steps = 1;
  std::vector<ValueSample> samples;  ///< row-major: index = i_mu * lambda_steps + i_lambda
  const ValueSample& at(int i_lambda, int i_mu) const {
    return samples[static_cast<std::size_t>(i_mu * lambda_steps + i_lambda)];
  }
  int flagged() const;
  int faults() const;
};

/// Grid evaluation of value_function, cells in parallel (each cell's
/// multistart runs single-threaded). A cell is flagged when its own
/// supergradients spread beyond the rule's absolute threshold or when a
/// jump to a grid neighbor exceeds the rule. Per-cell faults are recorded
/// and the scan continues. Steps below 2 on an axis are allowed only when
/// that axis range is degenerate.
ScanResult scan_plane(const ProblemInstance& instance, const ParamBox& box, int lambda_steps, int mu_steps,
                      const MinimizeOptions& opts, const JumpRule& rule = {});

/// `lambda,mu,beta,n_global,psi1_min,psi1_max,psi2_min,psi2_max,flag`, one
/// row per cell in grid order. Faulted cells carry nan and n_global 0.
std::string scan_to_csv(const ScanResult& scan);

struct ScanRow {
  double lambda = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  int n_global = 0;
  std::array<double, 2> psi1{};  ///< min, max
  std::array<double, 2> psi2{};
  bool flag = false;
};
/// Throws InvariantViolation on malformed input or rows with psi min > max.
std::vector<ScanRow> scan_from_csv(std::string_view csv);

struct MultiplicityCertificate {
  double lambda_t = 0.0;
  double mu_t = 0.0;
  PeriodicPath path_a;
  PeriodicPath path_b;
  double value_a = 0.0;
  double value_b = 0.0;
  double value_gap = 0.0;  ///< |J(a) - J(b)| at (lambda_t, mu_t)
  double separation = 0.0; ///< sup distance between the paths
  double residual_a = 0.0;
  double residual_b = 0.0;
  std::array<double, 2> psi_a{};
  std::array<double, 2> psi_b{};
  double beta = 0.0;
  /// false for a near-certificate: the bracket collapsed without a sample
  /// holding two global clusters; the paths are the flanking minimizers.
  bool exact = false;
  int evaluations = 0;  ///< value_function calls spent
};

struct SearchOptions {
  int lambda_steps = 6;
  int mu_steps = 4;
  JumpRule rule;
  double bracket_tol = 1e-10;
  int max_bisections = 80;
};

/// Coarse scan of the box, then bisection on the neighbor pair with the
/// largest supergradient jump, moving along the single coordinate in which
/// the pair differs. Throws NoJumpFound if no neighbor pair jumps and no
/// coarse sample already has two global clusters; HypothesisError if the
/// instance fails its static or growth checks.
MultiplicityCertificate find_two_minima(const ProblemInstance& instance, const ParamBox& box,
                                        const MinimizeOptions& opts, const SearchOptions& search = {});

struct NonconvexityOptions {
  int runs = 10000;
  int N = 32;
  int max_iters = 400;
  std::uint64_t seed = 11;
  int threads = 0;
};

struct NonconvexityReport {
  std::array<double, 2> point_v{};  ///< psi of the constant path v
  std::array<double, 2> point_w{};
  double gamma = 0.0;
  double lambda_star = 0.5;
  std::array<double, 2> target{};
  /// Points of H^-1(gamma) found on a 1-D scan (n = 1 only) and the smallest
  /// gap between them.
  std::vector<double> level_points;
  double min_gap = 0.0;
  double variation_budget = 0.0;  ///< L T
  bool discrete_argument = false;
  std::string discrete_note;
  double empirical_floor = 0.0;   ///< smallest |psi(u) - target| reached
  std::optional<PeriodicPath> closest;
  int runs = 0;
};

/// Throws HypothesisError when the witness data is missing or int G(.,v) = int G(.,w).
NonconvexityReport nonconvexity_check(const ProblemInstance& instance, const NonconvexityOptions& opts = {});

}  // namespace relosc
