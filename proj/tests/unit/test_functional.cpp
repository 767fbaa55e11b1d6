#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "relosc/error.hpp"
#include "relosc/functional.hpp"
#include "relosc/model.hpp"
#include "relosc/rng.hpp"

using namespace relosc;

namespace {

ProblemInstance planar() {
  ProblemInstance p;
  p.name = "planar";
  p.n = 2;
  p.T = 2.0;
  p.phi = PhiModel::relativistic(1.5);
  p.F = parse_field("x1^4 + x2^4 + sin(t)*x1", 2);
  p.G = parse_field("x1*x2", 2);
  p.H = parse_field("cos(x1) + x2^2", 2);
  p.alpha = parse_field("1 + t/4", 2);
  p.q = 2.0;
  return p;
}

double rel_error(const std::vector<double>& g, const std::vector<double>& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num = std::max(num, std::abs(g[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  return num / std::max(den, 1e-12);
}

}  // namespace

TEST_CASE("objective of a constant path is T Phi(0) + quadrature of W") {
  const auto inst = builtin_instance("cosine-desk");
  const int N = 32;
  const PeriodicPath c(1, 1.0, std::vector<double>(N, 0.7), 1.0);
  const auto ov = objective(inst, 0.3, 1.2, c);
  CHECK(ov.kinetic == doctest::Approx(-1.0));
  CHECK(ov.potential == doctest::Approx(std::pow(0.7, 4)));
  CHECK(ov.psi1 == doctest::Approx(0.7));
  CHECK(ov.psi2 == doctest::Approx(std::cos(0.7)));
  CHECK(ov.total == doctest::Approx(-1.0 + std::pow(0.7, 4) + 0.3 * 0.7 + 1.2 * std::cos(0.7)));
  CHECK(ov.psi()[1] == ov.psi2);
}

TEST_CASE("objective of a linear zig-zag matches the closed-form kinetic term") {
  // Slopes alternate +-0.6: kinetic = T * (-sqrt(1 - 0.36)).
  const int N = 8;
  std::vector<double> nodes(N);
  for (int i = 0; i < N; ++i) nodes[i] = (i % 2) * 0.6 / N;
  const auto inst = builtin_instance("remark1-convex");
  CHECK(objective_nodes(inst, 0, 0, nodes).kinetic == doctest::Approx(-0.8));
}

TEST_CASE("node gradient matches finite differences") {
  std::vector<ProblemInstance> insts;
  for (const auto& name : builtin_names()) insts.push_back(builtin_instance(name));
  insts.push_back(planar());
  for (const auto& inst : insts) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto p = sample_path(inst, 64, seed, 1.5, 0.05);
      const double lambda = 0.5 - 0.2 * static_cast<double>(seed), mu = 1.0 + 0.1 * static_cast<double>(seed);
      const auto g = gradient(inst, lambda, mu, p);
      const auto fd = oracle::fd_gradient(inst, lambda, mu, p.data());
      CHECK_MESSAGE(rel_error(g, fd) <= 1e-5, inst.name << " seed " << seed);
    }
  }
}

TEST_CASE("potential and psi gradients") {
  const auto inst = planar();
  const std::vector<double> x{0.4, -0.7};
  std::vector<double> g(2);
  const double W = potential_gradient(inst, 0.5, 2.0, 1.0, x, g);
  const double a = 1.25;
  CHECK(W == doctest::Approx(std::pow(0.4, 4) + std::pow(0.7, 4) + std::sin(1.0) * 0.4 + 0.5 * 0.4 * -0.7 +
                             2.0 * a * (std::cos(0.4) + 0.49)));
  CHECK(g[0] == doctest::Approx(4 * std::pow(0.4, 3) + std::sin(1.0) + 0.5 * -0.7 - 2.0 * a * std::sin(0.4)));
  CHECK(g[1] == doctest::Approx(4 * std::pow(-0.7, 3) + 0.5 * 0.4 + 2.0 * a * 2 * -0.7));

  const auto p = sample_path(inst, 16, 3, 1.0);
  std::vector<double> d1(p.data().size()), d2(p.data().size());
  psi_gradients(inst, p.data(), d1, d2);
  // psi1 and psi2 are the lambda and mu derivatives of the objective, so their node gradients are
  // differences of objective gradients.
  const auto g00 = gradient(inst, 0, 0, p), g10 = gradient(inst, 1, 0, p), g01 = gradient(inst, 0, 1, p);
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(g10[i] - g00[i]).epsilon(1e-9));
    CHECK(d2[i] == doctest::Approx(g01[i] - g00[i]).epsilon(1e-9));
  }
}

TEST_CASE("objective_difference is accurate where plain subtraction cancels") {
  const auto inst = builtin_instance("cosine-desk");
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = sample_path(inst, 128, seed, 2.0, 0.01);
    std::vector<double> v(p.data().begin(), p.data().end());
    SUBCASE("large step") {
      for (double& x : v) x += 1e-5 * rng.uniform(-1, 1);
      const double direct = objective_nodes(inst, 0.2, 1.5, v).total - objective(inst, 0.2, 1.5, p).total;
      CHECK(objective_difference(inst, 0.2, 1.5, p.data(), v) == doctest::Approx(direct).epsilon(1e-9));
    }
    SUBCASE("tiny step follows the first-order term") {
      std::vector<double> dir(v.size());
      for (double& x : dir) x = rng.uniform(-1, 1);
      const double eps = 1e-11;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += eps * dir[i];
      const auto g = gradient(inst, 0.2, 1.5, p);
      double lin = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) lin += g[i] * eps * dir[i];
      CHECK(objective_difference(inst, 0.2, 1.5, p.data(), v) == doctest::Approx(lin).epsilon(1e-4));
    }
  }
}

TEST_CASE("field faults carry the node index") {
  auto inst = builtin_instance("remark1-convex");
  inst.F = parse_field("sqrt(x1)", 1);
  const std::vector<double> nodes{0.1, 0.05, 0.0, -0.05};
  try {
    objective_nodes(inst, 0, 0, nodes);
    FAIL("expected a fault");
  } catch (const EvaluationFault& e) {
    CHECK(e.node() == 3);
  }
}

TEST_CASE("gradient rejects slopes at the speed bound") {
  const auto inst = builtin_instance("remark1-convex");
  const std::vector<double> nodes{0.0, 0.25, 0.0, 0.0};  // slope exactly L
  std::vector<double> out(nodes.size());
  CHECK_THROWS_AS(gradient_nodes(inst, 0, 0, nodes, out), DomainError);
}
