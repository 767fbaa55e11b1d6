#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "relosc/functional.hpp"
#include "relosc/model.hpp"
#include "relosc/path.hpp"

namespace relosc {

struct MinimizeOptions {
  int N = 64;             ///< grid intervals
  int starts = 0;         ///< 0: 32 for n = 1, doubled per added dimension
  double step0 = 1.0;     ///< first trial step (preconditioned units)
  double armijo = 1e-4;   ///< sufficient-decrease constant in (0, 1)
  double tol_grad = 1e-9; ///< stationarity tolerance on the residual scale
  int max_iters = 20000;
  double delta_cluster = 0.0;  ///< sup-distance for merging minimizers; 0: 0.1 L T
  double tol_global = 1e-6;    ///< relative value tolerance for "global"
  std::uint64_t seed = 1;
  double margin = kDefaultMargin;
  double precond_shift = 1.0;  ///< zeroth-order weight of the preconditioner
  double box_radius = 0.0;     ///< 0: derived from the coercivity bound
  int threads = 0;             ///< 0: hardware concurrency
  bool record_trace = false;

  int resolved_starts(int n) const { return starts > 0 ? starts : 32 << (n - 1); }
  double resolved_delta(const ProblemInstance& inst) const {
    return delta_cluster > 0.0 ? delta_cluster : 0.1 * inst.L() * inst.T;
  }
  /// Throws std::invalid_argument on non-positive tolerances or out-of-range constants.
  void validate() const;
};

struct LocalResult {
  PeriodicPath path;
  double value = 0.0;
  bool stationary = false;
  int iterations = 0;
  double stationarity = 0.0;
  std::vector<double> trace;  ///< objective per accepted iterate, if requested
};

/// Projected-gradient descent with Armijo backtracking (halving, floor 1e-14).
/// The search direction is the node gradient preconditioned by the kinetic
/// term's curvature at rest, (Phi''(0)/h) Delta + h c I with Delta the periodic
/// second-difference operator; every trial point is mapped through
/// project_feasible. Stationarity is the sup norm of the projected gradient
/// mapped back to the residual scale (the Euler-Lagrange residual at interior
/// points); the run stops when it drops below tol_grad or the iteration cap
/// is hit (stationary = false). The accepted values never increase.
LocalResult minimize_local(const ProblemInstance& instance, double lambda, double mu, const PeriodicPath& start,
                           const MinimizeOptions& opts);

struct Cluster {
  PeriodicPath representative;
  double value = 0.0;
  std::array<double, 2> psi{};
  double residual = 0.0;
  int basin_hits = 0;
  bool stationary = false;
};

struct MinimaReport {
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<Cluster> clusters;        ///< ascending by value
  std::vector<std::size_t> global_set;  ///< value <= best + tol_global (1 + |best|)
  MinimizeOptions options;
  double box_radius = 0.0;
  int starts = 0;
  std::vector<std::string> faults;  ///< one entry per failed start

  double best_value() const { return clusters.front().value; }
  /// Gap between the best cluster and the runner-up (NaN with one cluster).
  double second_gap() const;
};

/// Runs minimize_local from sample_path seeds, clusters the results by sup
/// distance, and computes psi and the Euler-Lagrange residual of each
/// representative. Starts run in parallel and are merged in seed order, so
/// the report is a function of the options alone. Throws Error listing the
/// faults when every start fails.
MinimaReport multistart(const ProblemInstance& instance, double lambda, double mu, const MinimizeOptions& opts);

/// Clusters finished local runs: each result joins the first cluster (in
/// ascending value order) whose representative lies within delta.
std::vector<Cluster> cluster_minimizers(const ProblemInstance& instance, double lambda, double mu,
                                        std::vector<LocalResult> results, double delta);

/// Box radius used to seed multistart: the coercivity bound for the
/// sublevel set at J(0) + 1.
double default_box_radius(const ProblemInstance& instance, double lambda, double mu, int N, double margin);

}  // namespace relosc
