#pragma once

#include <array>
#include <span>
#include <vector>

#include "relosc/model.hpp"
#include "relosc/path.hpp"

namespace relosc {

/// Decomposition of the discrete perturbed action
///   total = kinetic + potential + lambda psi1 + mu psi2
/// with kinetic = sum_i h Phi(d_i) (exact for piecewise-linear paths) and the
/// remaining terms by the periodic trapezoid rule on nodes.
struct ObjectiveValue {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;  ///< quadrature of F(t,u)
  double psi1 = 0.0;       ///< quadrature of G(t,u)
  double psi2 = 0.0;       ///< quadrature of alpha(t) H(u)

  std::array<double, 2> psi() const { return {psi1, psi2}; }
};

/// Field faults are rethrown with the offending node index.
ObjectiveValue objective(const ProblemInstance& instance, double lambda, double mu, const PeriodicPath& path);

/// Same as objective() but on a raw node array (row-major, N x n); no
/// feasibility validation beyond the kernel's own domain check.
ObjectiveValue objective_nodes(const ProblemInstance& instance, double lambda, double mu, std::span<const double> nodes);

/// total(v) - total(u) for node arrays on the same grid, accurate to
/// relative precision when v is close to u. Kinetic terms use
/// PhiModel::difference; potential terms at nodes that moved by less than
/// 1e-6 (1 + |u_i|) use the trapezoid rule on grad W, the rest plain
/// differences.
double objective_difference(const ProblemInstance& instance, double lambda, double mu, std::span<const double> u,
                            std::span<const double> v);

/// Node gradient of the total:
///   dJ/du_j = h grad_x W(t_j,u_j) + phi(d_{j-1}) - phi(d_j),  W = F + lambda G + mu alpha H,
/// indices periodic. Throws DomainError if a slope reaches the speed bound.
std::vector<double> gradient(const ProblemInstance& instance, double lambda, double mu, const PeriodicPath& path);

/// Raw-array variant writing into `out` (same size as `nodes`).
void gradient_nodes(const ProblemInstance& instance, double lambda, double mu, std::span<const double> nodes,
                    std::span<double> out);

/// Gradient of W = F + lambda G + mu alpha H with respect to x at (t, x);
/// returns W(t, x).
double potential_gradient(const ProblemInstance& instance, double lambda, double mu, double t,
                          std::span<const double> x, std::span<double> grad);

/// Node gradients of psi1 = h sum G(t_i,u_i) and psi2 = h sum alpha(t_i) H(u_i).
void psi_gradients(const ProblemInstance& instance, std::span<const double> nodes, std::span<double> dpsi1,
                   std::span<double> dpsi2);

}  // namespace relosc
