#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "relosc/error.hpp"
#include "relosc/model.hpp"
#include "relosc/rng.hpp"

using namespace relosc;

TEST_CASE("relativistic kernel: values, gradient, inverse") {
  const auto phi = PhiModel::relativistic(2.0);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(phi.eval(zero) == doctest::Approx(-2.0));
  CHECK(phi.curvature_at_zero() == doctest::Approx(0.5));
  const std::vector<double> x{1.2, -0.9};
  CHECK(phi.eval(x) == doctest::Approx(-std::sqrt(4.0 - 1.44 - 0.81)));
  std::vector<double> g(2), back(2);
  phi.grad(x, g);
  const double s = std::sqrt(4.0 - 1.44 - 0.81);
  CHECK(g[0] == doctest::Approx(1.2 / s));
  CHECK(g[1] == doctest::Approx(-0.9 / s));
  phi.inverse(g, back);
  CHECK(back[0] == doctest::Approx(1.2));
  CHECK(back[1] == doctest::Approx(-0.9));

  const std::vector<double> edge{2.0, 0.0};
  CHECK(phi.eval(edge) == doctest::Approx(0.0));
  CHECK_THROWS_AS(phi.grad(edge, g), DomainError);
  CHECK_THROWS_AS(phi.eval(std::vector<double>{2.1, 0.0}), DomainError);
  CHECK_THROWS_AS(PhiModel::relativistic(0.0), std::invalid_argument);
}

TEST_CASE("relativistic kernel: inverse maps R^n onto the open ball") {
  const auto phi = PhiModel::relativistic(1.0);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> y{rng.normal() * 100, rng.normal() * 100}, x(2), back(2);
    phi.inverse(y, x);
    CHECK(std::hypot(x[0], x[1]) < 1.0);
    phi.grad(x, back);
    CHECK(back[0] == doctest::Approx(y[0]).epsilon(1e-8));
    CHECK(back[1] == doctest::Approx(y[1]).epsilon(1e-8));
  }
}

TEST_CASE("kernel difference agrees with plain subtraction and stays accurate for tiny steps") {
  const auto phi = PhiModel::relativistic(1.0);
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    std::vector<double> b{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    CHECK(phi.difference(a, b) == doctest::Approx(phi.eval(b) - phi.eval(a)).epsilon(1e-12));
    // First-order expansion for a 1e-10 step: dPhi = <phi(a), b - a>.
    std::vector<double> g(2), c{a[0] + 1e-10, a[1] - 2e-10};
    phi.grad(a, g);
    const double lin = g[0] * 1e-10 - g[1] * 2e-10;
    CHECK(phi.difference(a, c) == doctest::Approx(lin).epsilon(1e-6));
  }
}

TEST_CASE("custom kernels are property-checked on registration") {
  // Phi(x) = |x|^2/2 - 1/2 on the unit ball: admissible except for its gradient
  // not being onto R^n, which the checks here do not require.
  auto eval = [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return 0.5 * s - 0.5;
  };
  auto grad = [](std::span<const double> x, std::span<double> out) { std::copy(x.begin(), x.end(), out.begin()); };
  const auto ok = PhiModel::custom("quadratic", 1.0, eval, grad, grad);
  CHECK(ok.curvature_at_zero() == doctest::Approx(1.0));
  CHECK(ok.difference(std::vector<double>{0.1}, std::vector<double>{0.1 + 1e-9}) ==
        doctest::Approx(0.1 * 1e-9).epsilon(1e-6));

  auto concave = [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return -std::sqrt(s) - 1.0;
  };
  CHECK_THROWS_AS(PhiModel::custom("bad", 1.0, concave, grad, grad), InvariantViolation);
  auto bad_inverse = [](std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = 0.5 * y[i];
  };
  CHECK_THROWS_AS(PhiModel::custom("bad-inverse", 1.0, eval, grad, bad_inverse), InvariantViolation);
}

TEST_CASE("builtin registry") {
  const auto names = builtin_names();
  REQUIRE(names.size() == 3);
  CHECK(std::find(names.begin(), names.end(), "cosine-desk") != names.end());
  for (const auto& name : names) {
    const auto inst = builtin_instance(name);
    CHECK(inst.name == name);
    CHECK(inst.n == 1);
    CHECK(inst.L() == 1.0);
    CHECK(inst.T == 1.0);
    for (const auto& d : check_instance(inst)) CHECK_MESSAGE(d.ok, name << ": " << d.check << " " << d.message);
  }
  CHECK_THROWS_AS(builtin_instance("nope"), std::invalid_argument);

  const auto desk = builtin_instance("cosine-desk");
  REQUIRE(desk.has_witnesses());
  CHECK(desk.gamma() == doctest::Approx(1.0));
  CHECK(integral_G(desk, *desk.w) - integral_G(desk, *desk.v) == doctest::Approx(2 * std::numbers::pi));
  CHECK(integral_alpha(desk) == doctest::Approx(1.0));
}

TEST_CASE("static checks catch broken instances") {
  auto desk = builtin_instance("cosine-desk");
  auto failed = [](const ProblemInstance& inst) {
    std::vector<std::string> out;
    for (const auto& d : check_instance(inst)) {
      if (!d.ok) out.push_back(d.check);
    }
    return out;
  };
  SUBCASE("v = w fails the witness integral check") {
    desk.w = desk.v;
    const auto bad = failed(desk);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].find("witness integrals") != std::string::npos);
    CHECK_THROWS_AS(require_valid(desk), InvariantViolation);
  }
  SUBCASE("H depending on t") {
    desk.H = parse_field("cos(x1) + t", 1);
    CHECK_FALSE(failed(desk).empty());
  }
  SUBCASE("alpha depending on x") {
    desk.alpha = parse_field("1 + x1", 1);
    CHECK_FALSE(failed(desk).empty());
  }
  SUBCASE("alpha changing sign") {
    desk.alpha = parse_field("t - 0.5", 1);
    CHECK_FALSE(failed(desk).empty());
  }
  SUBCASE("w off the level set") {
    desk.w = std::vector<double>{3.0};
    CHECK_FALSE(failed(desk).empty());
  }
}

TEST_CASE("time integration and gamma side parsing") {
  CHECK(integrate_time([](double t) { return t * t; }, 2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(gamma_side_from_string("inf") == GammaSide::Inf);
  CHECK(gamma_side_from_string("sup") == GammaSide::Sup);
  CHECK_FALSE(gamma_side_from_string("max").has_value());
  CHECK(to_string(GammaSide::Sup) == "sup");
}
