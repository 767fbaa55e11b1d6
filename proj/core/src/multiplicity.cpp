#include "relosc/multiplicity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "descent.hpp"
#include "relosc/error.hpp"
#include "relosc/functional.hpp"
#include "relosc/parallel.hpp"
#include "relosc/rng.hpp"
#include "relosc/verify.hpp"

namespace relosc {

namespace {

double psi_distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

double axis_value(double lo, double hi, int steps, int i) {
  if (steps == 1) return lo;
  return i == steps - 1 ? hi : lo + (hi - lo) * i / (steps - 1);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

ValueSample value_function(const ProblemInstance& inst, double lambda, double mu, const MinimizeOptions& opts) {
  const MinimaReport rep = multistart(inst, lambda, mu, opts);
  ValueSample s;
  s.lambda = lambda;
  s.mu = mu;
  s.beta = rep.best_value();
  s.n_global = static_cast<int>(rep.global_set.size());
  for (std::size_t idx : rep.global_set) {
    const Cluster& c = rep.clusters[idx];
    s.supergradients.push_back(c.psi);
    s.minimizers.push_back(c.representative);
    s.values.push_back(c.value);
    s.residuals.push_back(c.residual);
  }
  s.gap = s.values.back() - s.values.front();
  return s;
}

double supergradient_jump(const ValueSample& a, const ValueSample& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.supergradients) {
    for (const auto& r : b.supergradients) best = std::min(best, psi_distance(p, r));
  }
  return best;
}

double supergradient_spread(const ValueSample& s) {
  double worst = 0.0;
  for (const auto& p : s.supergradients) {
    for (const auto& r : s.supergradients) worst = std::max(worst, psi_distance(p, r));
  }
  return worst;
}

int ScanResult::flagged() const {
  return static_cast<int>(std::count_if(samples.begin(), samples.end(), [](const ValueSample& s) { return s.flag; }));
}

int ScanResult::faults() const {
  return static_cast<int>(
      std::count_if(samples.begin(), samples.end(), [](const ValueSample& s) { return !s.fault.empty(); }));
}

ScanResult scan_plane(const ProblemInstance& inst, const ParamBox& box, int lambda_steps, int mu_steps,
                      const MinimizeOptions& opts, const JumpRule& rule) {
  auto check_axis = [](double lo, double hi, int steps, const char* name) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw std::invalid_argument(std::string("scan_plane: invalid ") + name + " range");
    }
    if (steps < 1 || (steps == 1 && lo != hi)) {
      throw std::invalid_argument(std::string("scan_plane: ") + name + " needs at least 2 steps");
    }
  };
  check_axis(box.lambda_lo, box.lambda_hi, lambda_steps, "lambda");
  check_axis(box.mu_lo, box.mu_hi, mu_steps, "mu");
  opts.validate();

  ScanResult scan;
  scan.box = box;
  scan.lambda_steps = lambda_steps;
  scan.mu_steps = mu_steps;
  const std::size_t cells = static_cast<std::size_t>(lambda_steps) * mu_steps;
  scan.samples.resize(cells);
  MinimizeOptions inner = opts;
  inner.threads = 1;
  parallel_for(cells, opts.threads, [&](std::size_t c) {
    const int il = static_cast<int>(c % lambda_steps);
    const int im = static_cast<int>(c / lambda_steps);
    const double lambda = axis_value(box.lambda_lo, box.lambda_hi, lambda_steps, il);
    const double mu = axis_value(box.mu_lo, box.mu_hi, mu_steps, im);
    try {
      scan.samples[c] = value_function(inst, lambda, mu, inner);
    } catch (const Error& e) {
      ValueSample s;
      s.lambda = lambda;
      s.mu = mu;
      s.beta = std::numeric_limits<double>::quiet_NaN();
      s.fault = e.what();
      scan.samples[c] = std::move(s);
    }
  });

  auto ok = [](const ValueSample& s) { return s.fault.empty(); };
  for (ValueSample& s : scan.samples) {
    if (ok(s) && supergradient_spread(s) > rule.abs) s.flag = true;
  }
  auto compare = [&](std::size_t a, std::size_t b) {
    ValueSample& sa = scan.samples[a];
    ValueSample& sb = scan.samples[b];
    if (!ok(sa) || !ok(sb)) return;
    const double dp = std::max(std::abs(sa.lambda - sb.lambda), std::abs(sa.mu - sb.mu));
    if (supergradient_jump(sa, sb) > rule.threshold(dp)) sa.flag = sb.flag = true;
  };
  for (int im = 0; im < mu_steps; ++im) {
    for (int il = 0; il < lambda_steps; ++il) {
      const std::size_t c = static_cast<std::size_t>(im * lambda_steps + il);
      if (il + 1 < lambda_steps) compare(c, c + 1);
      if (im + 1 < mu_steps) compare(c, c + static_cast<std::size_t>(lambda_steps));
    }
  }
  return scan;
}

std::string scan_to_csv(const ScanResult& scan) {
  std::string out = "lambda,mu,beta,n_global,psi1_min,psi1_max,psi2_min,psi2_max,flag\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const ValueSample& s : scan.samples) {
    double p1lo = nan, p1hi = nan, p2lo = nan, p2hi = nan;
    if (!s.supergradients.empty()) {
      p1lo = p2lo = std::numeric_limits<double>::infinity();
      p1hi = p2hi = -std::numeric_limits<double>::infinity();
      for (const auto& p : s.supergradients) {
        p1lo = std::min(p1lo, p[0]);
        p1hi = std::max(p1hi, p[0]);
        p2lo = std::min(p2lo, p[1]);
        p2hi = std::max(p2hi, p[1]);
      }
    }
    for (double v : {s.lambda, s.mu, s.beta}) out += format_double(v) + ",";
    out += std::to_string(s.n_global) + ",";
    for (double v : {p1lo, p1hi, p2lo, p2hi}) out += format_double(v) + ",";
    out += s.flag ? "1\n" : "0\n";
  }
  return out;
}

std::vector<ScanRow> scan_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  auto fail = [](const std::string& why) -> void { throw InvariantViolation("scan csv: " + why); };
  if (!std::getline(in, line) || line != "lambda,mu,beta,n_global,psi1_min,psi1_max,psi2_min,psi2_max,flag") {
    fail("unexpected header");
  }
  std::vector<ScanRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 9) fail("line " + std::to_string(lineno) + ": expected 9 columns");
    auto num = [&](const std::string& s) {
      if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("line " + std::to_string(lineno) + ": bad number");
      return v;
    };
    ScanRow r;
    r.lambda = num(cols[0]);
    r.mu = num(cols[1]);
    r.beta = num(cols[2]);
    const double ng = num(cols[3]);
    if (!(ng >= 0.0) || ng != std::floor(ng)) fail("line " + std::to_string(lineno) + ": bad n_global");
    r.n_global = static_cast<int>(ng);
    r.psi1 = {num(cols[4]), num(cols[5])};
    r.psi2 = {num(cols[6]), num(cols[7])};
    if (cols[8] != "0" && cols[8] != "1") fail("line " + std::to_string(lineno) + ": flag must be 0 or 1");
    r.flag = cols[8] == "1";
    if (r.n_global > 0 && (r.psi1[0] > r.psi1[1] || r.psi2[0] > r.psi2[1])) {
      fail("line " + std::to_string(lineno) + ": psi min exceeds max");
    }
    rows.push_back(r);
  }
  return rows;
}

namespace {

MultiplicityCertificate certificate_from(const ValueSample& s) {
  // The widest-separated pair among the global minimizers.
  std::size_t ia = 0, ib = 1;
  double sep = -1.0;
  for (std::size_t a = 0; a < s.minimizers.size(); ++a) {
    for (std::size_t b = a + 1; b < s.minimizers.size(); ++b) {
      const double d = sup_distance(s.minimizers[a], s.minimizers[b]);
      if (d > sep) {
        sep = d;
        ia = a;
        ib = b;
      }
    }
  }
  MultiplicityCertificate c{.lambda_t = s.lambda, .mu_t = s.mu, .path_a = s.minimizers[ia], .path_b = s.minimizers[ib]};
  c.exact = true;
  c.beta = s.beta;
  c.value_a = s.values[ia];
  c.value_b = s.values[ib];
  c.value_gap = std::abs(c.value_a - c.value_b);
  c.separation = sep;
  c.residual_a = s.residuals[ia];
  c.residual_b = s.residuals[ib];
  c.psi_a = s.supergradients[ia];
  c.psi_b = s.supergradients[ib];
  return c;
}

double nearest(const std::array<double, 2>& p, const ValueSample& s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : s.supergradients) best = std::min(best, psi_distance(p, r));
  return best;
}

}  // namespace

MultiplicityCertificate find_two_minima(const ProblemInstance& inst, const ParamBox& box, const MinimizeOptions& opts,
                                        const SearchOptions& search) {
  for (const Diagnostic& d : check_instance(inst)) {
    if (!d.ok) throw HypothesisError(d.check + ": " + d.message);
  }
  const GrowthCheck growth = check_growth(inst);
  if (!growth.ok) throw HypothesisError("growth check failed: " + growth.message);

  const ScanResult scan = scan_plane(inst, box, search.lambda_steps, search.mu_steps, opts, search.rule);
  int evaluations = static_cast<int>(scan.samples.size());
  const double delta = opts.resolved_delta(inst);

  const ValueSample* best_multi = nullptr;
  for (const ValueSample& s : scan.samples) {
    if (!s.fault.empty() || s.n_global < 2) continue;
    if (!best_multi || s.gap < best_multi->gap) best_multi = &s;
  }
  if (best_multi) {
    MultiplicityCertificate c = certificate_from(*best_multi);
    if (c.separation > delta) {
      c.evaluations = evaluations;
      return c;
    }
  }

  // Neighbor pair with the largest jump above the rule.
  const ValueSample* pa = nullptr;
  const ValueSample* pb = nullptr;
  double best_excess = 0.0;
  auto consider = [&](const ValueSample& a, const ValueSample& b) {
    if (!a.fault.empty() || !b.fault.empty()) return;
    const double dp = std::max(std::abs(a.lambda - b.lambda), std::abs(a.mu - b.mu));
    const double jump = supergradient_jump(a, b);
    if (jump > search.rule.threshold(dp) && jump > best_excess) {
      best_excess = jump;
      pa = &a;
      pb = &b;
    }
  };
  for (int im = 0; im < scan.mu_steps; ++im) {
    for (int il = 0; il < scan.lambda_steps; ++il) {
      if (il + 1 < scan.lambda_steps) consider(scan.at(il, im), scan.at(il + 1, im));
      if (im + 1 < scan.mu_steps) consider(scan.at(il, im), scan.at(il, im + 1));
    }
  }
  if (!pa) throw NoJumpFound("no supergradient jump found in the search box");

  ValueSample a = *pa;
  ValueSample b = *pb;
  const bool along_lambda = a.lambda != b.lambda;
  for (int it = 0; it < search.max_bisections; ++it) {
    const double width = along_lambda ? std::abs(b.lambda - a.lambda) : std::abs(b.mu - a.mu);
    if (width < search.bracket_tol) break;
    const double lambda = along_lambda ? 0.5 * (a.lambda + b.lambda) : a.lambda;
    const double mu = along_lambda ? a.mu : 0.5 * (a.mu + b.mu);
    ValueSample m = value_function(inst, lambda, mu, opts);
    ++evaluations;
    if (m.n_global >= 2) {
      MultiplicityCertificate c = certificate_from(m);
      if (c.separation > delta) {
        c.evaluations = evaluations;
        return c;
      }
    }
    if (nearest(m.supergradients.front(), a) <= nearest(m.supergradients.front(), b)) {
      a = std::move(m);
    } else {
      b = std::move(m);
    }
  }

  // Collapsed bracket: report the two flanking minimizers at the midpoint.
  MultiplicityCertificate c{.lambda_t = 0.5 * (a.lambda + b.lambda),
                            .mu_t = 0.5 * (a.mu + b.mu),
                            .path_a = a.minimizers.front(),
                            .path_b = b.minimizers.front()};
  c.value_a = objective(inst, c.lambda_t, c.mu_t, c.path_a).total;
  c.value_b = objective(inst, c.lambda_t, c.mu_t, c.path_b).total;
  c.value_gap = std::abs(c.value_a - c.value_b);
  c.separation = sup_distance(c.path_a, c.path_b);
  c.residual_a = el_residual(inst, c.lambda_t, c.mu_t, c.path_a);
  c.residual_b = el_residual(inst, c.lambda_t, c.mu_t, c.path_b);
  c.psi_a = a.supergradients.front();
  c.psi_b = b.supergradients.front();
  c.beta = std::min(c.value_a, c.value_b);
  c.exact = false;
  c.evaluations = evaluations;
  return c;
}

namespace {

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

}  // namespace

NonconvexityReport nonconvexity_check(const ProblemInstance& inst, const NonconvexityOptions& opts) {
  if (!inst.has_witnesses()) throw HypothesisError("nonconvexity check needs gamma_side, v and w");
  const std::vector<double>& v = *inst.v;
  const std::vector<double>& w = *inst.w;
  const double Gv = integral_G(inst, v);
  const double Gw = integral_G(inst, w);
  if (std::abs(Gv - Gw) <= 1e-9 * (1.0 + std::abs(Gv))) {
    throw HypothesisError("witness hypothesis violated: int G(., v) equals int G(., w)");
  }

  NonconvexityReport rep;
  rep.gamma = inst.gamma();
  const double second = rep.gamma * integral_alpha(inst);
  rep.point_v = {Gv, second};
  rep.point_w = {Gw, second};
  rep.variation_budget = inst.L() * inst.T;

  // H^-1(gamma) consists of global extremizers of H; for n = 1 they are
  // located as refined grid extrema of s H on a window around v and w.
  std::vector<double> level_G = {Gv, Gw};
  if (inst.n == 1) {
    const double s = *inst.gamma_side == GammaSide::Inf ? 1.0 : -1.0;
    const double R = std::max(std::abs(v[0]), std::abs(w[0])) + 4.0 * std::max({std::abs(v[0] - w[0]), rep.variation_budget, 1.0});
    auto sH = [&](double x) { return s * inst.H.value(0.0, std::span<const double>(&x, 1)); };
    const int M = 200000;
    const double step = 2.0 * R / M;
    std::vector<double> hv(M + 1);
    for (int j = 0; j <= M; ++j) hv[static_cast<std::size_t>(j)] = sH(-R + step * j);
    const double tol = 1e-9 * (1.0 + std::abs(rep.gamma));
    bool plateau = false;
    int run = 0;
    for (int j = 0; j <= M; ++j) {
      run = std::abs(s * hv[static_cast<std::size_t>(j)] - rep.gamma) <= 1e-13 * (1.0 + std::abs(rep.gamma)) ? run + 1 : 0;
      if (run >= 3) plateau = true;
      const double left = j > 0 ? hv[static_cast<std::size_t>(j - 1)] : std::numeric_limits<double>::infinity();
      const double right = j < M ? hv[static_cast<std::size_t>(j + 1)] : std::numeric_limits<double>::infinity();
      if (!(hv[static_cast<std::size_t>(j)] <= left && hv[static_cast<std::size_t>(j)] < right)) continue;
      const double x = golden_min(sH, -R + step * std::max(j - 1, 0), -R + step * std::min(j + 1, M));
      if (std::abs(s * sH(x) - rep.gamma) > tol) continue;
      if (!rep.level_points.empty() && std::abs(rep.level_points.back() - x) <= 1e-6) continue;
      rep.level_points.push_back(x);
    }
    for (double x : rep.level_points) level_G.push_back(integral_G(inst, std::span<const double>(&x, 1)));
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < rep.level_points.size(); ++j) {
      rep.min_gap = std::min(rep.min_gap, rep.level_points[j] - rep.level_points[j - 1]);
    }
    if (plateau) {
      rep.discrete_note = "H^-1(gamma) contains an interval on the scanned window; the set is not countable";
    } else if (rep.level_points.size() < 2) {
      rep.discrete_note = "fewer than two points of H^-1(gamma) found on the scanned window";
    } else if (rep.variation_budget < rep.min_gap) {
      rep.discrete_argument = true;
      std::ostringstream os;
      os << "a feasible path with H(u_i) = gamma at every node has total variation <= L T = " << rep.variation_budget
         << " < " << rep.min_gap << ", the smallest gap in H^-1(gamma), so it is constant and psi1 lies in the attained set";
      rep.discrete_note = os.str();
    } else {
      rep.discrete_note = "L T is not below the smallest gap in H^-1(gamma); the variation budget does not force constants";
    }
  } else {
    rep.discrete_note = "level set of H not enumerated for n > 1";
  }

  // Interpolation coefficient, moved off the attained first coordinates.
  for (int k = 1; k < 1000; ++k) {
    rep.lambda_star = k == 1 ? 0.5 : 0.5 + 1.0 / (2.0 * k);
    const double t1 = Gw + rep.lambda_star * (Gv - Gw);
    const bool hit = std::any_of(level_G.begin(), level_G.end(),
                                 [&](double g) { return std::abs(g - t1) <= 1e-9 * (1.0 + std::abs(t1)); });
    rep.target = {t1, second};
    if (!hit) break;
  }

  // Empirical floor of |psi(u) - target| over feasible paths.
  double centre_radius = 0.0;
  for (int k = 0; k < inst.n; ++k) {
    centre_radius = std::max({centre_radius, std::abs(v[static_cast<std::size_t>(k)]), std::abs(w[static_cast<std::size_t>(k)])});
  }
  centre_radius += rep.variation_budget;
  const std::size_t runs = static_cast<std::size_t>(std::max(opts.runs, 1));
  std::vector<double> dist(runs, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> nodes(runs);
  parallel_for(runs, opts.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(opts.seed, r);
    Rng rng(seed);
    const double scale = 4.0 * rng.uniform();
    const PeriodicPath start = sample_path(inst, opts.N, derive_seed(seed, 1), centre_radius, kDefaultMargin, scale);
    const std::size_t size = start.data().size();
    detail::DescentProblem pb;
    pb.n = inst.n;
    pb.N = opts.N;
    pb.T = inst.T;
    pb.L = inst.L();
    pb.margin = kDefaultMargin;
    pb.curvature = 0.0;
    pb.shift = 1.0;
    pb.value = [&](std::span<const double> u) {
      const ObjectiveValue ov = objective_nodes(inst, 0.0, 0.0, u);
      const double a = ov.psi1 - rep.target[0];
      const double b = ov.psi2 - rep.target[1];
      return a * a + b * b;
    };
    std::vector<double> d1(size), d2(size);
    pb.gradient = [&](std::span<const double> u, std::span<double> out) {
      const ObjectiveValue ov = objective_nodes(inst, 0.0, 0.0, u);
      psi_gradients(inst, u, d1, d2);
      const double a = 2.0 * (ov.psi1 - rep.target[0]);
      const double b = 2.0 * (ov.psi2 - rep.target[1]);
      for (std::size_t j = 0; j < size; ++j) out[j] = a * d1[j] + b * d2[j];
    };
    detail::DescentSettings st;
    st.tol = 1e-10;
    st.max_iters = opts.max_iters;
    try {
      detail::DescentResult res = detail::projected_descent(pb, {start.data().begin(), start.data().end()}, st);
      dist[r] = std::sqrt(res.value);
      nodes[r] = std::move(res.nodes);
    } catch (const EvaluationFault&) {
    }
  });
  const auto best = std::min_element(dist.begin(), dist.end());
  rep.runs = static_cast<int>(runs);
  rep.empirical_floor = *best;
  if (std::isfinite(*best)) {
    rep.closest = PeriodicPath(inst.n, inst.T, nodes[static_cast<std::size_t>(best - dist.begin())], inst.L(), kDefaultMargin);
  }
  return rep;
}

}  // namespace relosc
