#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "relosc/error.hpp"
#include "relosc/model.hpp"
#include "relosc/path.hpp"
#include "relosc/rng.hpp"

using namespace relosc;

namespace {

std::vector<double> random_slopes(Rng& rng, int N, int n, double r) {
  std::vector<double> s(static_cast<std::size_t>(N * n));
  for (double& v : s) v = rng.uniform(-2.5 * r, 2.5 * r) + 0.3 * r;
  return s;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("path construction enforces the invariants") {
  CHECK_NOTHROW(PeriodicPath(1, 1.0, {0.0, 0.1, 0.2, 0.1}, 1.0));
  CHECK_THROWS_AS(PeriodicPath(1, 1.0, {0.0, 0.5, 0.0, 0.0}, 1.0), InvariantViolation);  // slope 2
  CHECK_THROWS_AS(PeriodicPath(1, 1.0, {0.0, 0.0, 0.0}, 1.0), InvariantViolation);       // N < 4
  CHECK_THROWS_AS(PeriodicPath(2, 1.0, {0.0, 0.0, 0.0}, 1.0), InvariantViolation);       // ragged
  CHECK_THROWS_AS(PeriodicPath(1, 1.0, {0.0, 0.0, 0.0, NAN}, 1.0), InvariantViolation);
  CHECK_THROWS_AS(PeriodicPath(1, 1.0, {0.0, 0.0, 0.0, 0.0}, 1.0, 0.5), InvariantViolation);
  // Exactly at L(1 - margin) is allowed.
  CHECK_NOTHROW(PeriodicPath(1, 1.0, {0.0, 0.2475, 0.0, -0.2475}, 1.0, 0.01));

  const PeriodicPath p(2, 2.0, {1, 0, 1.2, 0.1, 1.1, 0.3, 0.9, 0.1}, 1.0);
  CHECK(p.intervals() == 4);
  CHECK(p.step() == 0.5);
  std::vector<double> d(2);
  p.slope(3, d);
  CHECK(d[0] == doctest::Approx(0.2));
  CHECK(d[1] == doctest::Approx(-0.2));
  CHECK(p.mean()[0] == doctest::Approx(1.05));
  CHECK(p.sup_norm() == doctest::Approx(std::hypot(1.2, 0.1)));
  CHECK(p.inf_norm() == doctest::Approx(std::hypot(0.9, 0.1)));
}

TEST_CASE("production and Dykstra projections agree with the active-set KKT oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 2;
    const int N = 4 + trial % 5;
    const double r = rng.uniform(0.3, 2.0);
    const auto s = random_slopes(rng, N, n, r);
    const auto want = oracle::project_kkt(s, n, r);
    const auto got = project_slopes(s, n, r);
    const auto dyk = project_slopes_dykstra(s, n, r);
    CHECK(sup_diff(got, want) <= 1e-8);
    CHECK(sup_diff(dyk, want) <= 1e-8);
    CHECK(sup_diff(project_slopes(got, n, r), got) <= 1e-10);
    CHECK(sup_diff(project_slopes_dykstra(dyk, n, r), dyk) <= 1e-10);
  }
}

TEST_CASE("projection output is feasible and minimizes the distance") {
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    const int N = 16 + trial;
    const double r = 0.8;
    const auto s = random_slopes(rng, N, n, r);
    const auto d = project_slopes(s, n, r);
    std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
    double dist = 0.0;
    for (int i = 0; i < N; ++i) {
      double nr = 0.0;
      for (int k = 0; k < n; ++k) {
        nr += d[i * n + k] * d[i * n + k];
        sum[k] += d[i * n + k];
        dist += (d[i * n + k] - s[i * n + k]) * (d[i * n + k] - s[i * n + k]);
      }
      CHECK(std::sqrt(nr) <= r * (1 + 1e-12));
    }
    for (double v : sum) CHECK(std::abs(v) <= 1e-10 * N);
    // Random feasible competitors are never closer.
    for (int k = 0; k < 10; ++k) {
      std::vector<double> c = d;
      for (double& v : c) v += rng.uniform(-0.05, 0.05);
      const auto cf = project_slopes(c, n, r);
      double dc = 0.0;
      for (std::size_t i = 0; i < cf.size(); ++i) dc += (cf[i] - s[i]) * (cf[i] - s[i]);
      CHECK(dc >= dist - 1e-10);
    }
  }
}

TEST_CASE("feasible slopes are fixed points and the stats report no work") {
  const std::vector<double> s{0.2, -0.1, -0.1, 0.0};
  ProjectionStats st;
  const auto d = project_slopes_dykstra(s, 1, 1.0, &st);
  CHECK(sup_diff(d, s) <= 1e-14);
  const auto p = project_feasible(1, 1.0, std::vector<double>{0.0, 0.05, 0.025, 0.0}, 1.0, kDefaultMargin, &st);
  CHECK(st.sweeps == 0);
  CHECK(p.node(1)[0] == 0.05);
}

TEST_CASE("project_feasible keeps the mean and yields a valid path") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 2, N = 32;
    std::vector<double> raw(static_cast<std::size_t>(N * n));
    for (double& v : raw) v = rng.uniform(-3, 3);
    const auto p = project_feasible(n, 1.5, raw, 1.0);
    CHECK(p.max_slope() <= 1.0 * (1 - kDefaultMargin) * (1 + 1e-9));
    for (int k = 0; k < n; ++k) {
      double m = 0;
      for (int i = 0; i < N; ++i) m += raw[i * n + k] / N;
      CHECK(p.mean()[k] == doctest::Approx(m).epsilon(1e-12));
    }
    CHECK(p.sup_norm() <= p.speed_bound() * p.horizon() + p.inf_norm() + 1e-12);
  }
}

TEST_CASE("sample_path is deterministic and honours the sup-norm inequality") {
  const auto inst = builtin_instance("cosine-desk");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = sample_path(inst, 64, seed, 3.0);
    const auto b = sample_path(inst, 64, seed, 3.0);
    CHECK(a == b);
    CHECK(a.sup_norm() <= inst.L() * inst.T + a.inf_norm() + 1e-12);
    CHECK(std::abs(a.mean()[0]) <= 3.0 + inst.L() * inst.T);
  }
  const auto c = sample_path(inst, 64, 7, 3.0, kDefaultMargin, 0.0);
  CHECK(c.max_slope() == 0.0);
  CHECK_THROWS_AS(sample_path(inst, 64, 7, 0.0), std::invalid_argument);
}

TEST_CASE("sup_distance") {
  const PeriodicPath a(1, 1.0, {0, 0.1, 0.2, 0.1}, 1.0);
  const PeriodicPath b(1, 1.0, {0.5, 0.6, 0.7, 0.6}, 1.0);
  CHECK(sup_distance(a, b) == doctest::Approx(0.5));
  CHECK(sup_distance(a, a) == 0.0);
}

TEST_CASE("path CSV round-trips bit for bit and rejects broken input") {
  const auto inst = builtin_instance("cosine-desk");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = sample_path(inst, 16 + static_cast<int>(seed), seed, 2.0);
    CHECK(path_from_csv(path_to_csv(p), 1.0) == p);
  }
  const std::string ok = "i,t,x1\n0,0,0\n1,0.25,0.1\n2,0.5,0.2\n3,0.75,0.1\n4,1,0\n";
  CHECK(path_from_csv(ok, 1.0).intervals() == 4);
  CHECK_THROWS_AS(path_from_csv("i,t,y1\n0,0,0\n1,0.25,0.1\n2,0.5,0.2\n3,0.75,0.1\n4,1,0\n", 1.0), InvariantViolation);
  CHECK_THROWS_AS(path_from_csv("i,t,x1\n0,0,0\n1,0.25,0.1\n2,0.5,0.2\n3,0.75,0.1\n4,1,0.5\n", 1.0), InvariantViolation);
  CHECK_THROWS_AS(path_from_csv("i,t,x1\n0,0,0\n1,0.25,0.4\n2,0.5,0.2\n3,0.75,0.1\n4,1,0\n", 1.0), InvariantViolation);
  CHECK_THROWS_AS(path_from_csv("i,t,x1\n0,0,0\n1,0.25,abc\n2,0.5,0.2\n3,0.75,0.1\n4,1,0\n", 1.0), InvariantViolation);
  CHECK_THROWS_AS(path_from_csv("i,t,x1\n0,0,0\n2,0.25,0.1\n2,0.5,0.2\n3,0.75,0.1\n4,1,0\n", 1.0), InvariantViolation);
}

TEST_CASE("path audit counts constructions and violations") {
  const auto before = path_audit();
  CHECK_NOTHROW(PeriodicPath(1, 1.0, {0, 0, 0, 0}, 1.0));
  CHECK_THROWS(PeriodicPath(1, 1.0, {0, 1, 0, 0}, 1.0));
  const auto after = path_audit();
  CHECK(after.constructed - before.constructed == 2);
  CHECK(after.violations - before.violations == 1);
}
