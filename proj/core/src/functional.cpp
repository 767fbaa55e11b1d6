#include "relosc/functional.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "relosc/error.hpp"

namespace relosc {
namespace {

int grid_size(const ProblemInstance& inst, std::span<const double> nodes) {
  const auto n = static_cast<std::size_t>(inst.n);
  if (nodes.size() % n != 0 || nodes.size() / n < 4) throw std::invalid_argument("node array does not match instance");
  return static_cast<int>(nodes.size() / n);
}

void check_path(const ProblemInstance& inst, const PeriodicPath& path) {
  if (path.dim() != inst.n || path.horizon() != inst.T) throw std::invalid_argument("path does not match instance");
}

}  // namespace

ObjectiveValue objective_nodes(const ProblemInstance& inst, double lambda, double mu, std::span<const double> nodes) {
  const int N = grid_size(inst, nodes);
  const int n = inst.n;
  const double h = inst.T / N;
  std::array<double, kMaxDimension> d{};
  ObjectiveValue out;
  for (int i = 0; i < N; ++i) {
    const int j = (i + 1) % N;
    for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = (nodes[j * n + k] - nodes[i * n + k]) / h;
    out.kinetic += inst.phi.eval(std::span<const double>(d.data(), static_cast<std::size_t>(n)));
    const double t = i * h;
    const auto x = nodes.subspan(static_cast<std::size_t>(i * n), static_cast<std::size_t>(n));
    try {
      out.potential += inst.F.value(t, x);
      out.psi1 += inst.G.value(t, x);
      out.psi2 += inst.alpha.value(t, x) * inst.H.value(t, x);
    } catch (const EvaluationFault& e) {
      throw EvaluationFault(e.what(), static_cast<std::size_t>(i));
    }
  }
  out.kinetic *= h;
  out.potential *= h;
  out.psi1 *= h;
  out.psi2 *= h;
  out.total = out.kinetic + out.potential + lambda * out.psi1 + mu * out.psi2;
  return out;
}

ObjectiveValue objective(const ProblemInstance& inst, double lambda, double mu, const PeriodicPath& path) {
  check_path(inst, path);
  return objective_nodes(inst, lambda, mu, path.data());
}

double objective_difference(const ProblemInstance& inst, double lambda, double mu, std::span<const double> u,
                            std::span<const double> v) {
  const int N = grid_size(inst, u);
  if (v.size() != u.size()) throw std::invalid_argument("objective_difference: node arrays differ in size");
  const int n = inst.n;
  const auto un = static_cast<std::size_t>(n);
  const double h = inst.T / N;
  std::array<double, kMaxDimension> du{}, dv{}, gu{}, gv{};
  double kinetic = 0.0, potential = 0.0;
  for (int i = 0; i < N; ++i) {
    const int j = (i + 1) % N;
    double moved = 0.0, size = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      du[kk] = (u[j * n + k] - u[i * n + k]) / h;
      // Slope change from node increments, so that d(v) - d(u) carries no cancellation.
      dv[kk] = du[kk] + ((v[j * n + k] - u[j * n + k]) - (v[i * n + k] - u[i * n + k])) / h;
      moved = std::max(moved, std::abs(v[i * n + k] - u[i * n + k]));
      size = std::max(size, std::abs(u[i * n + k]));
    }
    kinetic += inst.phi.difference(std::span<const double>(du.data(), un), std::span<const double>(dv.data(), un));
    const double t = i * h;
    const auto xu = u.subspan(static_cast<std::size_t>(i * n), un);
    const auto xv = v.subspan(static_cast<std::size_t>(i * n), un);
    try {
      if (moved <= 1e-6 * (1.0 + size)) {
        potential_gradient(inst, lambda, mu, t, xu, std::span<double>(gu.data(), un));
        potential_gradient(inst, lambda, mu, t, xv, std::span<double>(gv.data(), un));
        for (std::size_t k = 0; k < un; ++k) potential += 0.5 * (gu[k] + gv[k]) * (xv[k] - xu[k]);
      } else {
        potential += potential_gradient(inst, lambda, mu, t, xv, std::span<double>(gv.data(), un)) -
                     potential_gradient(inst, lambda, mu, t, xu, std::span<double>(gu.data(), un));
      }
    } catch (const EvaluationFault& e) {
      throw EvaluationFault(e.what(), static_cast<std::size_t>(i));
    }
  }
  return h * (kinetic + potential);
}

double potential_gradient(const ProblemInstance& inst, double lambda, double mu, double t, std::span<const double> x,
                          std::span<double> grad) {
  const auto n = static_cast<std::size_t>(inst.n);
  std::array<double, kMaxDimension> gG{}, gH{};
  double w = inst.F.value_and_gradient(t, x, grad);
  if (lambda != 0.0) {
    w += lambda * inst.G.value_and_gradient(t, x, gG);
    for (std::size_t k = 0; k < n; ++k) grad[k] += lambda * gG[k];
  }
  if (mu != 0.0) {
    const double a = mu * inst.alpha.value(t, x);
    w += a * inst.H.value_and_gradient(t, x, gH);
    for (std::size_t k = 0; k < n; ++k) grad[k] += a * gH[k];
  }
  return w;
}

void gradient_nodes(const ProblemInstance& inst, double lambda, double mu, std::span<const double> nodes,
                    std::span<double> out) {
  const int N = grid_size(inst, nodes);
  const int n = inst.n;
  const double h = inst.T / N;
  std::array<double, kMaxDimension> d{}, phi_d{}, phi_prev{}, gw{};
  const auto un = static_cast<std::size_t>(n);

  auto slope_phi = [&](int i, std::array<double, kMaxDimension>& dst) {
    const int j = (i + 1) % N;
    for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = (nodes[j * n + k] - nodes[i * n + k]) / h;
    inst.phi.grad(std::span<const double>(d.data(), un), std::span<double>(dst.data(), un));
  };

  slope_phi(N - 1, phi_prev);
  for (int j = 0; j < N; ++j) {
    slope_phi(j, phi_d);
    const auto x = nodes.subspan(static_cast<std::size_t>(j * n), un);
    try {
      potential_gradient(inst, lambda, mu, j * h, x, std::span<double>(gw.data(), un));
    } catch (const EvaluationFault& e) {
      throw EvaluationFault(e.what(), static_cast<std::size_t>(j));
    }
    for (int k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      out[static_cast<std::size_t>(j * n + k)] = h * gw[kk] + phi_prev[kk] - phi_d[kk];
    }
    phi_prev = phi_d;
  }
}

std::vector<double> gradient(const ProblemInstance& inst, double lambda, double mu, const PeriodicPath& path) {
  check_path(inst, path);
  std::vector<double> out(path.data().size());
  gradient_nodes(inst, lambda, mu, path.data(), out);
  return out;
}

void psi_gradients(const ProblemInstance& inst, std::span<const double> nodes, std::span<double> dpsi1,
                   std::span<double> dpsi2) {
  const int N = grid_size(inst, nodes);
  const int n = inst.n;
  const double h = inst.T / N;
  const auto un = static_cast<std::size_t>(n);
  for (int j = 0; j < N; ++j) {
    const double t = j * h;
    const auto x = nodes.subspan(static_cast<std::size_t>(j * n), un);
    const auto g1 = dpsi1.subspan(static_cast<std::size_t>(j * n), un);
    const auto g2 = dpsi2.subspan(static_cast<std::size_t>(j * n), un);
    try {
      inst.G.value_and_gradient(t, x, g1);
      inst.H.value_and_gradient(t, x, g2);
      const double a = inst.alpha.value(t, x);
      for (std::size_t k = 0; k < un; ++k) {
        g1[k] *= h;
        g2[k] *= h * a;
      }
    } catch (const EvaluationFault& e) {
      throw EvaluationFault(e.what(), static_cast<std::size_t>(j));
    }
  }
}

}  // namespace relosc
