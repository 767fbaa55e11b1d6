#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "relosc/functional.hpp"
#include "relosc/optimize.hpp"

using namespace relosc;

namespace {

MinimizeOptions quick(int N = 64, int starts = 12) {
  MinimizeOptions o;
  o.N = N;
  o.starts = starts;
  o.threads = 1;
  return o;
}

}  // namespace

TEST_CASE("options validation") {
  MinimizeOptions o;
  CHECK_NOTHROW(o.validate());
  o.armijo = 1.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.N = 2;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.tol_grad = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.margin = 0.5;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  CHECK(MinimizeOptions{}.resolved_starts(1) == 32);
  CHECK(MinimizeOptions{}.resolved_starts(2) == 64);
}

TEST_CASE("local descent never increases the objective and reaches a stationary point") {
  const auto inst = builtin_instance("cosine-desk");
  auto opts = quick(128);
  opts.record_trace = true;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto start = sample_path(inst, 128, seed, 2.0);
    const auto r = minimize_local(inst, 0.3, 1.5, start, opts);
    CHECK(r.stationary);
    CHECK(r.stationarity <= opts.tol_grad);
    REQUIRE_FALSE(r.trace.empty());
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
    CHECK(r.value <= objective(inst, 0.3, 1.5, start).total);
    CHECK(r.value == doctest::Approx(objective(inst, 0.3, 1.5, r.path).total).epsilon(1e-14));
  }
}

TEST_CASE("remark1-convex: one cluster at the constant -lambda") {
  const auto inst = builtin_instance("remark1-convex");
  for (double lambda : {-2.0, 0.0, 1.0}) {
    const auto rep = multistart(inst, lambda, 0.0, quick(128, 16));
    REQUIRE(rep.clusters.size() == 1);
    CHECK(rep.global_set.size() == 1);
    CHECK(rep.best_value() == doctest::Approx(-1.0 - lambda * lambda / 2).epsilon(1e-9));
    CHECK(rep.clusters[0].representative.mean()[0] == doctest::Approx(-lambda).epsilon(1e-9).scale(1.0));
    CHECK(rep.clusters[0].basin_hits == 16);
    CHECK(rep.clusters[0].residual <= 1e-8);
    CHECK(std::isnan(rep.second_gap()));
  }
}

TEST_CASE("cosine-desk at the symmetric point has two global clusters at the oracle constants") {
  const auto inst = builtin_instance("cosine-desk");
  const auto ref = oracle::reduced_minimum(inst, 0.0, 1.0);
  REQUIRE(ref.points.size() == 2);
  CHECK(ref.points[1] == doctest::Approx(0.490015).epsilon(1e-6));
  const auto rep = multistart(inst, 0.0, 1.0, quick(64, 16));
  REQUIRE(rep.global_set.size() == 2);
  CHECK(rep.best_value() == doctest::Approx(ref.value).epsilon(1e-9));
  std::vector<double> means;
  for (std::size_t k : rep.global_set) means.push_back(rep.clusters[k].representative.mean()[0]);
  std::sort(means.begin(), means.end());
  CHECK(means[0] == doctest::Approx(ref.points[0]).epsilon(1e-6));
  CHECK(means[1] == doctest::Approx(ref.points[1]).epsilon(1e-6));
}

TEST_CASE("multistart matches the reduced oracle on random parameters") {
  for (const auto& name : builtin_names()) {
    const auto inst = builtin_instance(name);
    for (int k = 0; k < 3; ++k) {
      const double lambda = -1.0 + 0.9 * k, mu = 0.3 + 0.8 * k;
      const auto ref = oracle::reduced_minimum(inst, lambda, mu);
      const auto rep = multistart(inst, lambda, mu, quick(64, 12));
      CHECK_MESSAGE(std::abs(rep.best_value() - ref.value) <= 1e-6, name << " " << lambda << " " << mu);
    }
  }
}

TEST_CASE("multistart reports are identical across thread counts") {
  const auto inst = builtin_instance("cosine-desk");
  auto o1 = quick(64, 24);
  auto o4 = o1;
  o4.threads = 4;
  const auto a = multistart(inst, 0.1, 1.2, o1);
  const auto b = multistart(inst, 0.1, 1.2, o4);
  REQUIRE(a.clusters.size() == b.clusters.size());
  for (std::size_t k = 0; k < a.clusters.size(); ++k) {
    CHECK(a.clusters[k].representative == b.clusters[k].representative);
    CHECK(a.clusters[k].value == b.clusters[k].value);
    CHECK(a.clusters[k].basin_hits == b.clusters[k].basin_hits);
  }
  CHECK(a.global_set == b.global_set);
}

TEST_CASE("clustering merges by sup distance in value order") {
  const auto inst = builtin_instance("remark1-convex");
  auto constant = [](double c) { return PeriodicPath(1, 1.0, std::vector<double>(8, c), 1.0); };
  std::vector<LocalResult> rs;
  for (double c : {0.0, 0.05, 1.0, 1.02, -0.5}) {
    rs.push_back(LocalResult{constant(c), objective(inst, 0, 0, constant(c)).total, true, 1, 0.0, {}});
  }
  const auto cl = cluster_minimizers(inst, 0, 0, rs, 0.1);
  REQUIRE(cl.size() == 3);
  CHECK(cl[0].representative.mean()[0] == 0.0);
  CHECK(cl[0].basin_hits == 2);
  CHECK(cl[1].representative.mean()[0] == -0.5);
  CHECK(cl[2].basin_hits == 2);
  for (std::size_t k = 1; k < cl.size(); ++k) CHECK(cl[k].value >= cl[k - 1].value);
}

TEST_CASE("default box radius covers the global minimizers") {
  for (const auto& name : builtin_names()) {
    const auto inst = builtin_instance(name);
    const double box = default_box_radius(inst, 0.5, 1.0, 64, kDefaultMargin);
    const auto ref = oracle::reduced_minimum(inst, 0.5, 1.0);
    CHECK(std::isfinite(box));
    for (double p : ref.points) CHECK(std::abs(p) < box);
  }
}
