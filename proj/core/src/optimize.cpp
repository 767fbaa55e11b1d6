#include "relosc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "descent.hpp"
#include "relosc/error.hpp"
#include "relosc/parallel.hpp"
#include "relosc/rng.hpp"
#include "relosc/verify.hpp"

namespace relosc {

void MinimizeOptions::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("MinimizeOptions: ") + what);
  };
  require(N >= 4, "N must be at least 4");
  require(starts >= 0, "starts must be non-negative");
  require(step0 > 0.0, "step0 must be positive");
  require(armijo > 0.0 && armijo < 1.0, "armijo must lie in (0, 1)");
  require(tol_grad > 0.0, "tol_grad must be positive");
  require(max_iters >= 0, "max_iters must be non-negative");
  require(delta_cluster >= 0.0, "delta_cluster must be non-negative");
  require(tol_global > 0.0, "tol_global must be positive");
  require(margin >= 0.0 && margin < 0.5, "margin must lie in [0, 0.5)");
  require(precond_shift > 0.0, "precond_shift must be positive");
  require(box_radius >= 0.0, "box_radius must be non-negative");
}

double MinimaReport::second_gap() const {
  if (clusters.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return clusters[1].value - clusters[0].value;
}

LocalResult minimize_local(const ProblemInstance& inst, double lambda, double mu, const PeriodicPath& start,
                           const MinimizeOptions& opts) {
  if (start.dim() != inst.n || start.horizon() != inst.T) throw std::invalid_argument("start path does not match instance");
  detail::DescentProblem pb;
  pb.n = inst.n;
  pb.N = start.intervals();
  pb.T = inst.T;
  pb.L = inst.L();
  pb.margin = opts.margin;
  pb.value = [&](std::span<const double> u) { return objective_nodes(inst, lambda, mu, u).total; };
  pb.gradient = [&](std::span<const double> u, std::span<double> out) { gradient_nodes(inst, lambda, mu, u, out); };
  pb.difference = [&](std::span<const double> u, std::span<const double> v) {
    return objective_difference(inst, lambda, mu, u, v);
  };
  pb.curvature = inst.phi.curvature_at_zero();
  pb.shift = opts.precond_shift;

  detail::DescentSettings st;
  st.step0 = opts.step0;
  st.armijo = opts.armijo;
  st.tol = opts.tol_grad;
  st.max_iters = opts.max_iters;
  st.record_trace = opts.record_trace;

  std::vector<double> u0(start.data().begin(), start.data().end());
  detail::DescentResult r = detail::projected_descent(pb, std::move(u0), st);
  return LocalResult{PeriodicPath(inst.n, inst.T, std::move(r.nodes), inst.L(), opts.margin),
                     r.value,
                     r.stationary,
                     r.iterations,
                     r.stationarity,
                     std::move(r.trace)};
}

std::vector<Cluster> cluster_minimizers(const ProblemInstance& inst, double lambda, double mu,
                                        std::vector<LocalResult> results, double delta) {
  std::stable_sort(results.begin(), results.end(),
                   [](const LocalResult& a, const LocalResult& b) { return a.value < b.value; });
  std::vector<Cluster> clusters;
  for (LocalResult& r : results) {
    bool merged = false;
    for (Cluster& c : clusters) {
      if (sup_distance(c.representative, r.path) <= delta) {
        ++c.basin_hits;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    const ObjectiveValue ov = objective(inst, lambda, mu, r.path);
    Cluster c{r.path, r.value, ov.psi(), el_residual(inst, lambda, mu, r.path), 1, r.stationary};
    clusters.push_back(std::move(c));
  }
  return clusters;
}

double default_box_radius(const ProblemInstance& inst, double lambda, double mu, int N, double margin) {
  const std::vector<double> zero(static_cast<std::size_t>(N) * inst.n, 0.0);
  const PeriodicPath rest(inst.n, inst.T, zero, inst.L(), margin);
  const double rho_ref = objective(inst, lambda, mu, rest).total + 1.0;
  return growth_constants(inst, lambda, mu, rho_ref).box_radius;
}

MinimaReport multistart(const ProblemInstance& inst, double lambda, double mu, const MinimizeOptions& opts) {
  opts.validate();
  const int starts = opts.resolved_starts(inst.n);
  MinimaReport report;
  report.lambda = lambda;
  report.mu = mu;
  report.options = opts;
  report.starts = starts;
  report.box_radius = opts.box_radius > 0.0 ? opts.box_radius : default_box_radius(inst, lambda, mu, opts.N, opts.margin);

  std::vector<std::optional<LocalResult>> runs(static_cast<std::size_t>(starts));
  std::vector<std::string> faults(static_cast<std::size_t>(starts));
  parallel_for(static_cast<std::size_t>(starts), opts.threads, [&](std::size_t k) {
    try {
      const PeriodicPath start =
          sample_path(inst, opts.N, derive_seed(opts.seed, k), report.box_radius, opts.margin);
      runs[k] = minimize_local(inst, lambda, mu, start, opts);
    } catch (const Error& e) {
      faults[k] = "start " + std::to_string(k) + ": " + e.what();
    }
  });

  std::vector<LocalResult> done;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k]) {
      done.push_back(std::move(*runs[k]));
    } else {
      report.faults.push_back(faults[k]);
    }
  }
  if (done.empty()) {
    std::string msg = "multistart: all " + std::to_string(starts) + " starts failed";
    for (const auto& f : report.faults) msg += "\n  " + f;
    throw Error(msg);
  }

  report.clusters = cluster_minimizers(inst, lambda, mu, std::move(done), opts.resolved_delta(inst));
  const double best = report.clusters.front().value;
  for (std::size_t i = 0; i < report.clusters.size(); ++i) {
    if (report.clusters[i].value <= best + opts.tol_global * (1.0 + std::abs(best))) report.global_set.push_back(i);
  }
  return report;
}

}  // namespace relosc
