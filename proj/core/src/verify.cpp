#include "relosc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "relosc/error.hpp"
#include "relosc/functional.hpp"
#include "relosc/parallel.hpp"
#include "relosc/rng.hpp"

namespace relosc {

double el_residual(const ProblemInstance& inst, double lambda, double mu, const PeriodicPath& path) {
  const int n = path.dim();
  const int N = path.intervals();
  const double h = path.step();
  std::vector<double> phis(static_cast<std::size_t>(N) * n);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i < N; ++i) {
    path.slope(i, d);
    inst.phi.grad(d, std::span<double>(phis).subspan(static_cast<std::size_t>(i) * n, n));
  }
  std::vector<double> gw(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    potential_gradient(inst, lambda, mu, path.time(i), path.node(i), gw);
    const int prev = (i + N - 1) % N;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = (phis[static_cast<std::size_t>(i * n + k)] - phis[static_cast<std::size_t>(prev * n + k)]) / h -
                       gw[static_cast<std::size_t>(k)];
      s += r * r;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

namespace {

// Unit directions used for sphere sampling: both axis signs plus random
// directions for n >= 2.
std::vector<std::vector<double>> sphere_directions(int n) {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < n; ++k) {
    for (double s : {-1.0, 1.0}) {
      std::vector<double> e(static_cast<std::size_t>(n), 0.0);
      e[static_cast<std::size_t>(k)] = s;
      dirs.push_back(std::move(e));
    }
  }
  if (n >= 2) {
    Rng rng(0x5eed);
    for (int j = 0; j < 62; ++j) {
      std::vector<double> e(static_cast<std::size_t>(n));
      double norm = 0.0;
      for (double& x : e) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (double& x : e) x /= norm;
      dirs.push_back(std::move(e));
    }
  }
  return dirs;
}

std::vector<double> time_samples(const ProblemInstance& inst) {
  if (!inst.F.uses_t() && !inst.G.uses_t()) return {0.0};
  std::vector<double> ts;
  for (int j = 0; j <= 16; ++j) ts.push_back(inst.T * j / 16.0);
  return ts;
}

// Points of the closed ball of radius r used to bound the fields on it.
std::vector<std::vector<double>> ball_points(int n, double r) {
  std::vector<std::vector<double>> pts;
  if (n == 1) {
    for (int j = 0; j <= 2000; ++j) pts.push_back({-r + 2.0 * r * j / 2000.0});
  } else if (n == 2) {
    for (int a = 0; a <= 200; ++a) {
      for (int b = 0; b <= 200; ++b) {
        const double x = -r + 2.0 * r * a / 200.0;
        const double y = -r + 2.0 * r * b / 200.0;
        if (x * x + y * y <= r * r) pts.push_back({x, y});
      }
    }
  } else {
    Rng rng(0xba11);
    pts.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int j = 0; j < 20000; ++j) {
      std::vector<double> x(static_cast<std::size_t>(n));
      double norm = 0.0;
      for (double& c : x) {
        c = rng.normal();
        norm += c * c;
      }
      const double scale = r * std::pow(rng.uniform(), 1.0 / n) / std::sqrt(norm);
      for (double& c : x) c *= scale;
      pts.push_back(std::move(x));
    }
  }
  return pts;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

}  // namespace

GrowthCheck check_growth(const ProblemInstance& inst) {
  GrowthCheck out;
  const auto dirs = sphere_directions(inst.n);
  const auto ts = time_samples(inst);
  std::vector<double> x(static_cast<std::size_t>(inst.n));
  for (int k = 0; k <= 20; ++k) {
    const double r = std::ldexp(1.0, k);
    const double rq = std::pow(r, inst.q);
    double f_inf = std::numeric_limits<double>::infinity();
    double gh_sup = 0.0;
    for (const auto& e : dirs) {
      for (int c = 0; c < inst.n; ++c) x[static_cast<std::size_t>(c)] = r * e[static_cast<std::size_t>(c)];
      const double h = std::abs(inst.H.value(0.0, x));
      for (double t : ts) {
        f_inf = std::min(f_inf, inst.F.value(t, x) / rq);
        gh_sup = std::max(gh_sup, (std::abs(inst.G.value(t, x)) + h) / rq);
      }
    }
    out.f_ratios.push_back(f_inf);
    out.gh_ratios.push_back(gh_sup);
  }
  // F / |x|^q must grow without bound: increasing over the outer decade of
  // radii and at least doubled across it. (|G| + |H|) / |x|^q must stay bounded.
  bool f_grows = out.f_ratios[20] >= 2.0 * std::max(out.f_ratios[10], 0.0) && out.f_ratios[20] > 0.0;
  for (int k = 11; k <= 20 && f_grows; ++k) f_grows = out.f_ratios[static_cast<std::size_t>(k)] > out.f_ratios[static_cast<std::size_t>(k - 1)];
  const bool gh_bounded = out.gh_ratios[20] <= 2.0 * out.gh_ratios[10] + 1e-12;
  std::ostringstream msg;
  if (!f_grows) msg << "inf_t F/|x|^q does not grow beyond radius 2^20 (ratio " << out.f_ratios[20] << ")";
  if (!gh_bounded) {
    if (!f_grows) msg << "; ";
    msg << "(|G|+|H|)/|x|^q appears unbounded (ratio " << out.gh_ratios[20] << " at 2^20)";
  }
  out.ok = f_grows && gh_bounded;
  out.message = out.ok ? "growth ratios consistent with F dominating |x|^q" : msg.str();
  return out;
}

bool GrowthConstants::valid(double T_phi0) const {
  return c3 > c2 && c2 >= 0.0 && delta1 > delta && delta > 0.0 && b <= T_phi0 && q > 0.0;
}

double GrowthConstants::sup_bound(double value, double T, double L) const {
  const double base = (value - b) / ((c3 - c2) * T);
  if (base < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(base, 1.0 / q) + L * T;
}

GrowthConstants growth_constants(const ProblemInstance& inst, double lambda, double mu, double rho_ref) {
  GrowthConstants gc;
  gc.q = inst.q;
  gc.rho_ref = rho_ref;
  const double a_sup = alpha_sup(inst);

  if (inst.growth) {
    gc.closed_form = true;
    gc.c1 = inst.growth->c1;
    gc.delta = inst.growth->delta;
    gc.c2 = gc.c1 * std::max(std::abs(lambda), std::abs(mu) * a_sup);
    gc.c3 = gc.c2 > 0.0 ? 2.0 * gc.c2 : 1.0;
    gc.delta1 = std::max(inst.growth->f_radius(gc.c3), 2.0 * gc.delta);
  } else {
    const GrowthCheck check = check_growth(inst);
    if (!check.ok) throw HypothesisError("growth check failed: " + check.message);
    gc.delta = 1.0;
    gc.c1 = 2.0 * *std::max_element(check.gh_ratios.begin(), check.gh_ratios.end());
    if (gc.c1 == 0.0) gc.c1 = 1.0;
    gc.c2 = gc.c1 * std::max(std::abs(lambda), std::abs(mu) * a_sup);
    gc.c3 = gc.c2 > 0.0 ? 2.0 * gc.c2 : 1.0;
    // Smallest sampled radius beyond which F/|x|^q stays above 2 c3.
    std::optional<int> first;
    for (int k = 20; k >= 0 && check.f_ratios[static_cast<std::size_t>(k)] >= 2.0 * gc.c3; --k) first = k;
    if (!first) throw HypothesisError("F does not dominate c3 |x|^q on the sampled radii");
    gc.delta1 = std::max(std::ldexp(1.0, *first), 2.0 * gc.delta);
  }

  // M bounds |F| + |lambda G| + |mu alpha H| on B_delta1 and also covers
  // c3 |x|^q - F there, so that F >= c3 |x|^q - M holds everywhere.
  const auto ts = time_samples(inst);
  double m_sup = 0.0;
  for (const auto& x : ball_points(inst.n, gc.delta1)) {
    const double xq = std::pow(norm2(x), gc.q);
    const double h = std::abs(mu) * a_sup * std::abs(inst.H.value(0.0, x));
    for (double t : ts) {
      const double f = inst.F.value(t, x);
      const double m = std::max(std::abs(f), gc.c3 * xq - f) + std::abs(lambda * inst.G.value(t, x)) + h;
      m_sup = std::max(m_sup, m);
    }
  }
  gc.M_int = 2.0 * m_sup * inst.T;
  const std::vector<double> zero(static_cast<std::size_t>(inst.n), 0.0);
  gc.b = inst.T * inst.phi.eval(zero) - 2.0 * gc.M_int;
  gc.box_radius = gc.sup_bound(rho_ref, inst.T, inst.L());
  if (!std::isfinite(gc.box_radius)) throw HypothesisError("reference level lies below the coercivity floor b");
  return gc;
}

bool coercivity_holds(const ProblemInstance& inst, double lambda, double mu, const GrowthConstants& gc,
                      const PeriodicPath& path) {
  const double LT = inst.L() * inst.T;
  const double sup = path.sup_norm();
  if (sup < LT) return true;
  const double bound = gc.sup_bound(objective(inst, lambda, mu, path).total, inst.T, inst.L());
  return std::isfinite(bound) && sup <= bound;
}

CoercivityReport coercivity_check(const ProblemInstance& inst, double lambda, double mu, const GrowthConstants& gc,
                                  int n_samples, int N, std::uint64_t seed) {
  struct Draw {
    std::optional<PeriodicPath> path;
    double value = 0.0;
  };
  CoercivityReport rep;
  const double LT = inst.L() * inst.T;
  const double reach = std::max(2.0 * gc.box_radius, 4.0 * LT);
  const std::size_t batch = static_cast<std::size_t>(std::max(n_samples, 1));
  std::uint64_t next = 0;
  // Stop after 50 batches so a box too small to leave B_LT cannot loop forever.
  for (int round = 0; round < 50 && rep.samples < n_samples; ++round) {
    std::vector<Draw> draws(batch);
    parallel_for(batch, 0, [&](std::size_t j) {
      const std::uint64_t s = derive_seed(seed, next + j);
      Rng rng(s);
      const double box = reach * rng.uniform();
      const double scale = 8.0 * rng.uniform();
      Draw& d = draws[j];
      d.path = sample_path(inst, N, derive_seed(s, 1), box, kDefaultMargin, scale);
      d.value = objective(inst, lambda, mu, *d.path).total;
    });
    next += batch;
    for (Draw& d : draws) {
      const double sup = d.path->sup_norm();
      if (d.value <= gc.rho_ref) {
        ++rep.sublevel;
        if (sup > gc.box_radius) {
          ++rep.violations;
          if (rep.examples.size() < 5) rep.examples.push_back({"sublevel", d.value, sup, gc.box_radius, *d.path});
        }
      }
      if (sup < LT) {
        ++rep.excluded;
        continue;
      }
      if (rep.samples >= n_samples) continue;
      ++rep.samples;
      const double bound = gc.sup_bound(d.value, inst.T, inst.L());
      const bool ok = std::isfinite(bound) && sup <= bound;
      rep.worst_ratio = std::max(rep.worst_ratio, std::isfinite(bound) ? sup / bound : std::numeric_limits<double>::infinity());
      if (!ok) {
        ++rep.violations;
        if (rep.examples.size() < 5) rep.examples.push_back({"estimate", d.value, sup, bound, *d.path});
      }
    }
  }
  return rep;
}

std::vector<UniquenessRow> uniqueness_probe(const ProblemInstance& inst, const std::vector<double>& lambdas,
                                            const MinimizeOptions& opts, double mu) {
  std::vector<UniquenessRow> rows;
  for (double lambda : lambdas) {
    const MinimaReport rep = multistart(inst, lambda, mu, opts);
    UniquenessRow row;
    row.lambda = lambda;
    row.count = static_cast<int>(rep.global_set.size());
    row.flagged = row.count > 1;
    row.best_value = rep.best_value();
    row.representative_mean = rep.clusters.front().representative.mean();
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Golden-section refinement of a 1-D minimum bracketed by [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Compass search from x with initial step s.
std::vector<double> compass_min(const std::function<double(std::span<const double>)>& f, std::vector<double> x, double s) {
  double fx = f(x);
  while (s > 1e-11) {
    bool moved = false;
    for (std::size_t k = 0; k < x.size() && !moved; ++k) {
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> y = x;
        y[k] += sign * s;
        const double fy = f(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          moved = true;
          break;
        }
      }
    }
    if (!moved) s *= 0.5;
  }
  return x;
}

}  // namespace

int count_global_minima_of_H(const ProblemInstance& inst, double radius) {
  if (inst.n > 2) throw HypothesisError("global minima of H are only counted for n <= 2");
  std::vector<std::vector<double>> minima;
  std::vector<double> values;
  auto H = [&](std::span<const double> x) { return inst.H.value(0.0, x); };
  if (inst.n == 1) {
    const int M = 100000;
    const double step = 2.0 * radius / M;
    std::vector<double> hv(M + 1);
    for (int j = 0; j <= M; ++j) {
      const double x = -radius + step * j;
      hv[static_cast<std::size_t>(j)] = H(std::span<const double>(&x, 1));
    }
    for (int j = 0; j <= M; ++j) {
      const double left = j > 0 ? hv[static_cast<std::size_t>(j - 1)] : std::numeric_limits<double>::infinity();
      const double right = j < M ? hv[static_cast<std::size_t>(j + 1)] : std::numeric_limits<double>::infinity();
      const double v = hv[static_cast<std::size_t>(j)];
      if (v <= left && v < right) {
        const double lo = -radius + step * std::max(j - 1, 0);
        const double hi = -radius + step * std::min(j + 1, M);
        const double x = golden_min([&](double y) { return H(std::span<const double>(&y, 1)); }, lo, hi);
        minima.push_back({x});
        values.push_back(H(std::span<const double>(&x, 1)));
      }
    }
  } else {
    const int M = 400;
    const double step = 2.0 * radius / M;
    std::vector<double> hv(static_cast<std::size_t>((M + 1) * (M + 1)));
    auto at = [&](int a, int b) -> double& { return hv[static_cast<std::size_t>(a * (M + 1) + b)]; };
    for (int a = 0; a <= M; ++a) {
      for (int b = 0; b <= M; ++b) {
        const double x[2] = {-radius + step * a, -radius + step * b};
        at(a, b) = H(x);
      }
    }
    for (int a = 0; a <= M; ++a) {
      for (int b = 0; b <= M; ++b) {
        bool is_min = true;
        for (int da = -1; da <= 1 && is_min; ++da) {
          for (int db = -1; db <= 1; ++db) {
            if ((da == 0 && db == 0) || a + da < 0 || a + da > M || b + db < 0 || b + db > M) continue;
            const bool earlier = da < 0 || (da == 0 && db < 0);
            const double nb = at(a + da, b + db);
            if (earlier ? at(a, b) > nb : at(a, b) >= nb) {
              is_min = false;
              break;
            }
          }
        }
        if (!is_min) continue;
        auto x = compass_min(H, {-radius + step * a, -radius + step * b}, step);
        values.push_back(H(x));
        minima.push_back(std::move(x));
      }
    }
  }
  if (values.empty()) return 0;
  const double best = *std::min_element(values.begin(), values.end());
  std::vector<std::vector<double>> global;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] > best + 1e-9 * (1.0 + std::abs(best))) continue;
    bool fresh = true;
    for (const auto& g : global) {
      double d = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) d = std::max(d, std::abs(g[k] - minima[j][k]));
      if (d <= 1e-3) fresh = false;
    }
    if (fresh) global.push_back(minima[j]);
  }
  return static_cast<int>(global.size());
}

ConjectureReport conjecture_probe(const ProblemInstance& inst, const std::vector<double>& mus,
                                  const MinimizeOptions& opts) {
  ConjectureReport rep;
  rep.h_minima = count_global_minima_of_H(inst);
  if (rep.h_minima != 2) {
    throw HypothesisError("H must have exactly two global minima (found " + std::to_string(rep.h_minima) + ")");
  }
  Rng rng(0x6e);
  std::vector<double> x(static_cast<std::size_t>(inst.n));
  for (int j = 0; j < 200; ++j) {
    for (double& c : x) c = rng.uniform(-10.0, 10.0);
    if (inst.G.value(rng.uniform(0.0, inst.T), x) != 0.0) throw HypothesisError("G must vanish for the conjecture probe");
  }
  const GrowthCheck growth = check_growth(inst);
  if (!growth.ok) throw HypothesisError("growth check failed: " + growth.message);

  bool any_multiple = false;
  for (double mu : mus) {
    const MinimaReport mr = multistart(inst, 0.0, mu, opts);
    ConjectureRow row;
    row.mu = mu;
    row.n_global = static_cast<int>(mr.global_set.size());
    row.value_gap = mr.second_gap();
    any_multiple = any_multiple || row.n_global >= 2;
    rep.rows.push_back(row);
  }
  rep.instance_verdict = any_multiple ? "rejected" : "candidate";
  return rep;
}

}  // namespace relosc
