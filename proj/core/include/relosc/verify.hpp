#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relosc/model.hpp"
#include "relosc/optimize.hpp"
#include "relosc/path.hpp"

namespace relosc {

/// max_i |(phi(d_i) - phi(d_{i-1}))/h - grad_x W(t_i,u_i)|, W = F + lambda G + mu alpha H,
/// indices periodic. Throws DomainError for slopes outside the open ball.
double el_residual(const ProblemInstance& instance, double lambda, double mu, const PeriodicPath& path);

/// Outcome of the growth ratio test on spheres of radius 2^k, k = 0..20.
struct GrowthCheck {
  bool ok = false;
  std::string message;
  std::vector<double> f_ratios;   ///< inf_{t,|x|=2^k} F / |x|^q
  std::vector<double> gh_ratios;  ///< sup_{t,|x|=2^k} (|G| + |H|) / |x|^q
};
GrowthCheck check_growth(const ProblemInstance& instance);

/// Constants of the coercivity estimate for fixed (lambda, mu):
///   |G| + |H| <= c1 |x|^q outside B_delta,
///   c2 = c1 max(|lambda|, |mu| sup|alpha|),
///   F >= c3 |x|^q outside B_delta1, c3 > c2, delta1 > delta,
///   M(t) bounds |F| + |lambda G| + |mu alpha H| on B_delta1, M_int = int M,
///   b = T Phi(0) - 2 M_int,
///   box_radius = ((rho_ref - b)/((c3 - c2) T))^(1/q) + L T.
struct GrowthConstants {
  double q = 0.0;
  double c1 = 0.0;
  double delta = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double delta1 = 0.0;
  double M_int = 0.0;
  double b = 0.0;
  double rho_ref = 0.0;
  double box_radius = 0.0;
  bool closed_form = false;

  /// c3 > c2 >= 0, delta1 > delta > 0, b <= T Phi(0).
  bool valid(double T_phi0) const;
  /// Right-hand side of the sup-norm estimate for a path of objective `value`.
  double sup_bound(double value, double T, double L) const;
};

/// Uses the instance's closed form when present, otherwise sphere sampling
/// with a 2x safety factor. Throws HypothesisError when the ratio test fails.
GrowthConstants growth_constants(const ProblemInstance& instance, double lambda, double mu, double rho_ref);

struct CoercivityViolation {
  std::string kind;  ///< "estimate" or "sublevel"
  double value = 0.0;
  double sup_norm = 0.0;
  double bound = 0.0;
  PeriodicPath path;
};

struct CoercivityReport {
  int samples = 0;    ///< paths checked against the estimate (sup >= L T)
  int excluded = 0;   ///< drawn paths with sup < L T
  int sublevel = 0;   ///< paths with objective <= rho_ref
  int violations = 0;
  double worst_ratio = 0.0;  ///< max sup|u| / bound
  std::vector<CoercivityViolation> examples;  ///< first few violations
};

/// Draws random feasible paths until `n_samples` have sup-norm >= L T and
/// asserts the sup-norm estimate for each, plus boundedness of the sublevel
/// set at constants.rho_ref by constants.box_radius.
CoercivityReport coercivity_check(const ProblemInstance& instance, double lambda, double mu,
                                  const GrowthConstants& constants, int n_samples, int N = 64,
                                  std::uint64_t seed = 7);

/// Whether the sup-norm estimate covers one specific path.
bool coercivity_holds(const ProblemInstance& instance, double lambda, double mu, const GrowthConstants& constants,
                      const PeriodicPath& path);

struct UniquenessRow {
  double lambda = 0.0;
  int count = 0;
  bool flagged = false;
  double best_value = 0.0;
  std::vector<double> representative_mean;
};

/// Number of global clusters at (lambda, mu = 0) for each lambda.
std::vector<UniquenessRow> uniqueness_probe(const ProblemInstance& instance, const std::vector<double>& lambdas,
                                            const MinimizeOptions& opts, double mu = 0.0);

struct ConjectureRow {
  double mu = 0.0;
  int n_global = 0;
  double value_gap = 0.0;  ///< best to runner-up cluster; NaN if only one
};

struct ConjectureReport {
  std::vector<ConjectureRow> rows;
  int h_minima = 0;
  /// "rejected" when some mu gives two global minima (instance is not a
  /// witness), "candidate" when every sampled mu gives one.
  std::string instance_verdict;
  std::string conjecture_status = "unresolved";
};

/// Counts distinct global minimizers of H on a grid over [-radius, radius]^n (n <= 2).
int count_global_minima_of_H(const ProblemInstance& instance, double radius = 4.0);

/// Requires H to have exactly two global minima and G to vanish; throws
/// HypothesisError otherwise.
ConjectureReport conjecture_probe(const ProblemInstance& instance, const std::vector<double>& mus,
                                  const MinimizeOptions& opts);

}  // namespace relosc
