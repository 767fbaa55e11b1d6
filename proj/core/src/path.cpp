#include "relosc/path.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "relosc/error.hpp"
#include "relosc/model.hpp"
#include "relosc/rng.hpp"

namespace relosc {
namespace {

std::atomic<std::uint64_t> g_constructed{0};
std::atomic<std::uint64_t> g_violations{0};

double norm(const double* x, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += x[k] * x[k];
  return std::sqrt(s);
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

PeriodicPath::PeriodicPath(int n, double T, std::vector<double> nodes, double L, double margin)
    : n_(n), N_(0), T_(T), L_(L), margin_(margin), nodes_(std::move(nodes)) {
  ++g_constructed;
  auto fail = [](const std::string& what) {
    ++g_violations;
    throw InvariantViolation("PeriodicPath: " + what);
  };
  if (n_ < 1 || nodes_.size() % static_cast<std::size_t>(n_) != 0) fail("node array does not match dimension");
  N_ = static_cast<int>(nodes_.size() / static_cast<std::size_t>(n_));
  if (N_ < 4) fail("fewer than 4 grid intervals");
  if (!(T_ > 0.0) || !(L_ > 0.0)) fail("T and L must be positive");
  if (!(margin_ >= 0.0 && margin_ < 0.5)) fail("margin outside [0, 0.5)");
  double umax = 0.0, umin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N_; ++i) {
    const double r = norm(nodes_.data() + static_cast<std::ptrdiff_t>(i) * n_, n_);
    if (!std::isfinite(r)) fail("non-finite node");
    umax = std::max(umax, r);
    umin = std::min(umin, r);
  }

  const double h = step();
  const double bound = L_ * (1.0 - margin_);
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + umax) / h;
  std::vector<double> d(static_cast<std::size_t>(n_)), sum(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < N_; ++i) {
    slope(i, d);
    if (norm(d.data(), n_) > bound * (1.0 + 1e-9) + roundoff) {
      fail("slope " + std::to_string(i) + " exceeds L(1-margin)");
    }
    for (int k = 0; k < n_; ++k) sum[static_cast<std::size_t>(k)] += d[static_cast<std::size_t>(k)];
  }
  if (norm(sum.data(), n_) > N_ * roundoff) fail("slopes do not sum to zero");
  if (umax > L_ * T_ + umin + 1e-12 * (1.0 + umax)) fail("sup|u| > L T + inf|u|");
}

void PeriodicPath::slope(int i, std::span<double> out) const {
  const int j = (i + 1) % N_;
  const double inv_h = 1.0 / step();
  const double* a = nodes_.data() + static_cast<std::ptrdiff_t>(i) * n_;
  const double* b = nodes_.data() + static_cast<std::ptrdiff_t>(j) * n_;
  for (int k = 0; k < n_; ++k) out[static_cast<std::size_t>(k)] = (b[k] - a[k]) * inv_h;
}

double PeriodicPath::max_slope() const {
  std::vector<double> d(static_cast<std::size_t>(n_));
  double m = 0.0;
  for (int i = 0; i < N_; ++i) {
    slope(i, d);
    m = std::max(m, norm(d.data(), n_));
  }
  return m;
}

double PeriodicPath::sup_norm() const {
  double m = 0.0;
  for (int i = 0; i < N_; ++i) m = std::max(m, norm(nodes_.data() + static_cast<std::ptrdiff_t>(i) * n_, n_));
  return m;
}

double PeriodicPath::inf_norm() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N_; ++i) m = std::min(m, norm(nodes_.data() + static_cast<std::ptrdiff_t>(i) * n_, n_));
  return m;
}

std::vector<double> PeriodicPath::mean() const {
  std::vector<double> m(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < N_; ++i) {
    for (int k = 0; k < n_; ++k) m[static_cast<std::size_t>(k)] += nodes_[static_cast<std::size_t>(i * n_ + k)];
  }
  for (double& c : m) c /= N_;
  return m;
}

double sup_distance(const PeriodicPath& a, const PeriodicPath& b) {
  if (a.dim() != b.dim() || a.intervals() != b.intervals()) {
    throw std::invalid_argument("sup_distance: paths live on different grids");
  }
  const int n = a.dim();
  double m = 0.0;
  for (int i = 0; i < a.intervals(); ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double diff = a.node(i)[static_cast<std::size_t>(k)] - b.node(i)[static_cast<std::size_t>(k)];
      s += diff * diff;
    }
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

PathAudit path_audit() { return {g_constructed.load(), g_violations.load()}; }

std::vector<double> project_slopes_dykstra(std::span<const double> slopes, int n, double radius,
                                           ProjectionStats* stats, double tol, int max_sweeps) {
  if (n < 1 || slopes.size() % static_cast<std::size_t>(n) != 0) {
    throw std::invalid_argument("project_slopes: size does not match dimension");
  }
  const std::size_t N = slopes.size() / static_cast<std::size_t>(n);
  std::vector<double> x(slopes.begin(), slopes.end());
  std::vector<double> m(static_cast<std::size_t>(n));
  auto mean_of = [&](const std::vector<double>& v) {
    std::fill(m.begin(), m.end(), 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (int k = 0; k < n; ++k) m[static_cast<std::size_t>(k)] += v[i * n + k];
    for (double& c : m) c /= static_cast<double>(N);
  };

  // Dykstra: p corrects the ball step, q the hyperplane step. The iteration
  // stops once the hyperplane iterate x and the ball iterate a agree and x
  // stopped moving; small steps alone can hide a slow drift.
  std::vector<double> p(x.size(), 0.0), q(x.size(), 0.0), a(x.size()), z(x.size());
  double gap = std::numeric_limits<double>::infinity();
  const double stop = tol * std::max(1.0, radius);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < N; ++i) {
      double* zi = z.data() + i * n;
      for (int k = 0; k < n; ++k) zi[k] = x[i * n + k] + p[i * n + k];
      const double r = norm(zi, n);
      const double s = r > radius ? radius / r : 1.0;
      for (int k = 0; k < n; ++k) {
        a[i * n + k] = zi[k] * s;
        p[i * n + k] = zi[k] - a[i * n + k];
      }
    }
    for (std::size_t j = 0; j < a.size(); ++j) z[j] = a[j] + q[j];
    mean_of(z);
    double moved = 0.0;
    gap = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (int k = 0; k < n; ++k) {
        const std::size_t j = i * n + k;
        const double next = z[j] - m[static_cast<std::size_t>(k)];
        q[j] = z[j] - next;
        moved = std::max(moved, std::abs(next - x[j]));
        gap = std::max(gap, std::abs(next - a[j]));
        x[j] = next;
      }
    }
    if (!std::isfinite(moved) || !std::isfinite(gap)) break;
    gap = std::max(gap, moved);
    if (gap < stop) {
      if (stats) *stats = {sweep, gap};
      return x;
    }
  }
  throw ProjectionError("Dykstra projection did not converge in " + std::to_string(max_sweeps) +
                            " sweeps (gap " + std::to_string(gap) + ")",
                        gap);
}

namespace {

// The projection is d_i = P(s_i - nu) with P the projection onto the ball and
// nu in R^n the multiplier of the zero-sum constraint, the root of
// g(nu) = sum_i P(s_i - nu).
void ball_project(const double* z, int n, double radius, double* out) {
  const double r = norm(z, n);
  const double s = r > radius ? radius / r : 1.0;
  for (int k = 0; k < n; ++k) out[k] = z[k] * s;
}

// n = 1: g is piecewise linear and non-increasing with breakpoints s_i -+ r,
// so the root is found exactly on the bracketing segment.
double multiplier_1d(std::span<const double> s, double radius) {
  auto g = [&](double nu) {
    double acc = 0.0;
    for (double si : s) acc += std::clamp(si - nu, -radius, radius);
    return acc;
  };
  std::vector<double> bp;
  bp.reserve(2 * s.size());
  for (double si : s) {
    bp.push_back(si - radius);
    bp.push_back(si + radius);
  }
  std::sort(bp.begin(), bp.end());
  std::size_t lo = 0, hi = bp.size() - 1;
  if (g(bp[lo]) <= 0.0) return bp[lo];
  if (g(bp[hi]) >= 0.0) return bp[hi];
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (g(bp[mid]) > 0.0 ? lo : hi) = mid;
  }
  const double glo = g(bp[lo]);
  const double ghi = g(bp[hi]);
  if (glo == ghi) return bp[lo];
  return bp[lo] + (bp[hi] - bp[lo]) * glo / (glo - ghi);
}

// n >= 2: semismooth Newton on g with backtracking on |g|. Returns false
// if it fails to reach the tolerance.
bool multiplier_nd(std::span<const double> s, int n, double radius, double tol, std::vector<double>& nu, int& iters) {
  const std::size_t N = s.size() / static_cast<std::size_t>(n);
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> z(un), pz(un), g(un), J(un * un), step(un), trial(un);
  auto eval = [&](const std::vector<double>& v, std::vector<double>& out, std::vector<double>* jac) {
    std::fill(out.begin(), out.end(), 0.0);
    if (jac) std::fill(jac->begin(), jac->end(), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < un; ++k) z[k] = s[i * un + k] - v[k];
      const double r = norm(z.data(), n);
      ball_project(z.data(), n, radius, pz.data());
      for (std::size_t k = 0; k < un; ++k) out[k] += pz[k];
      if (!jac) continue;
      if (r <= radius) {
        for (std::size_t k = 0; k < un; ++k) (*jac)[k * un + k] += 1.0;
      } else {
        const double c = radius / r;
        for (std::size_t a = 0; a < un; ++a)
          for (std::size_t b = 0; b < un; ++b)
            (*jac)[a * un + b] += c * ((a == b ? 1.0 : 0.0) - z[a] * z[b] / (r * r));
      }
    }
    double m = 0.0;
    for (double c : out) m = std::max(m, std::abs(c));
    return m;
  };
  double res = eval(nu, g, &J);
  for (iters = 0; iters < 100; ++iters) {
    if (res <= tol) return true;
    // Solve J step = g by Gaussian elimination with partial pivoting; a
    // small ridge keeps J invertible when every ball is active.
    std::vector<double> A = J;
    step = g;
    for (std::size_t k = 0; k < un; ++k) A[k * un + k] += 1e-12 * static_cast<double>(N);
    for (std::size_t col = 0; col < un; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < un; ++r)
        if (std::abs(A[r * un + col]) > std::abs(A[piv * un + col])) piv = r;
      if (A[piv * un + col] == 0.0) return false;
      if (piv != col) {
        for (std::size_t c = 0; c < un; ++c) std::swap(A[col * un + c], A[piv * un + c]);
        std::swap(step[col], step[piv]);
      }
      for (std::size_t r = col + 1; r < un; ++r) {
        const double f = A[r * un + col] / A[col * un + col];
        for (std::size_t c = col; c < un; ++c) A[r * un + c] -= f * A[col * un + c];
        step[r] -= f * step[col];
      }
    }
    for (std::size_t col = un; col-- > 0;) {
      for (std::size_t c = col + 1; c < un; ++c) step[col] -= A[col * un + c] * step[c];
      step[col] /= A[col * un + col];
    }
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t k = 0; k < un; ++k) trial[k] = nu[k] + t * step[k];
      std::vector<double> gt(un);
      const double rt = eval(trial, gt, nullptr);
      if (rt < res) {
        improved = true;
        break;
      }
    }
    if (!improved) return false;
    nu = trial;
    res = eval(nu, g, &J);
  }
  return res <= tol;
}

}  // namespace

std::vector<double> project_slopes(std::span<const double> slopes, int n, double radius, ProjectionStats* stats,
                                   double tol, int max_sweeps) {
  if (n < 1 || slopes.size() % static_cast<std::size_t>(n) != 0) {
    throw std::invalid_argument("project_slopes: size does not match dimension");
  }
  const std::size_t N = slopes.size() / static_cast<std::size_t>(n);
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> nu(un, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < un; ++k) nu[k] += slopes[i * un + k] / static_cast<double>(N);

  int iters = 0;
  if (n == 1) {
    nu[0] = multiplier_1d(slopes, radius);
  } else if (!multiplier_nd(slopes, n, radius, tol * std::max(1.0, radius), nu, iters)) {
    return project_slopes_dykstra(slopes, n, radius, stats, tol, max_sweeps);
  }
  std::vector<double> d(slopes.size());
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> z(un);
    for (std::size_t k = 0; k < un; ++k) z[k] = slopes[i * un + k] - nu[k];
    ball_project(z.data(), n, radius, d.data() + i * un);
  }
  if (stats) *stats = {iters, 0.0};
  return d;
}

PeriodicPath project_feasible(int n, double T, std::span<const double> raw, double L, double margin,
                              ProjectionStats* stats) {
  if (n < 1 || raw.size() % static_cast<std::size_t>(n) != 0) {
    throw InvariantViolation("project_feasible: node array does not match dimension");
  }
  const int N = static_cast<int>(raw.size() / static_cast<std::size_t>(n));
  if (N < 4) throw InvariantViolation("project_feasible: degenerate grid, N < 4");
  if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("project_feasible: margin outside [0, 0.5)");
  const double h = T / N;
  const double radius = L * (1.0 - margin);

  std::vector<double> slopes(raw.size());
  bool feasible = true;
  for (int i = 0; i < N; ++i) {
    const int j = (i + 1) % N;
    for (int k = 0; k < n; ++k) slopes[static_cast<std::size_t>(i * n + k)] = (raw[j * n + k] - raw[i * n + k]) / h;
    feasible = feasible && norm(slopes.data() + i * n, n) <= radius;
  }
  if (feasible) {
    if (stats) *stats = {0, 0.0};
    return PeriodicPath(n, T, std::vector<double>(raw.begin(), raw.end()), L, margin);
  }

  const std::vector<double> d = project_slopes(slopes, n, radius, stats);
  std::vector<double> nodes(raw.size(), 0.0);
  for (int i = 0; i + 1 < N; ++i)
    for (int k = 0; k < n; ++k) nodes[(i + 1) * n + k] = nodes[i * n + k] + h * d[i * n + k];
  for (int k = 0; k < n; ++k) {
    double raw_mean = 0.0, new_mean = 0.0;
    for (int i = 0; i < N; ++i) {
      raw_mean += raw[i * n + k];
      new_mean += nodes[i * n + k];
    }
    const double shift = (raw_mean - new_mean) / N;
    for (int i = 0; i < N; ++i) nodes[i * n + k] += shift;
  }
  return PeriodicPath(n, T, std::move(nodes), L, margin);
}

PeriodicPath sample_path(const ProblemInstance& instance, int N, std::uint64_t seed, double box_radius, double margin,
                         double mode_scale) {
  if (!(box_radius > 0.0)) throw std::invalid_argument("sample_path: box radius must be positive");
  const int n = instance.n;
  const double T = instance.T;
  const double L = instance.L();
  Rng rng(seed);
  std::vector<double> center(static_cast<std::size_t>(n));
  for (double& c : center) c = rng.uniform(-box_radius, box_radius);

  std::vector<double> nodes(static_cast<std::size_t>(N) * n);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < n; ++k) nodes[i * n + k] = center[static_cast<std::size_t>(k)];

  const int modes = rng.integer(1, 3);
  std::vector<double> dir(static_cast<std::size_t>(n));
  for (int m = 0; m < modes; ++m) {
    const int freq = rng.integer(1, 3);
    const double amplitude = mode_scale * rng.uniform(0.0, L * T / 8.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double r2 = 0.0;
    for (double& c : dir) {
      c = rng.normal();
      r2 += c * c;
    }
    const double inv = 1.0 / std::sqrt(r2);
    for (int i = 0; i < N; ++i) {
      const double wave = amplitude * std::cos(2.0 * std::numbers::pi * freq * i / N + phase);
      for (int k = 0; k < n; ++k) nodes[i * n + k] += wave * dir[static_cast<std::size_t>(k)] * inv;
    }
  }
  return project_feasible(n, T, nodes, L, margin);
}

std::string path_to_csv(const PeriodicPath& path) {
  const int n = path.dim();
  std::string out = "i,t";
  for (int k = 1; k <= n; ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (int i = 0; i <= path.intervals(); ++i) {
    const int src = i % path.intervals();
    out += std::to_string(i);
    out += ',';
    append_double(out, i == path.intervals() ? path.horizon() : path.time(i));
    for (double c : path.node(src)) {
      out += ',';
      append_double(out, c);
    }
    out += '\n';
  }
  return out;
}

PeriodicPath path_from_csv(std::string_view csv, double L, double margin) {
  auto fail = [](const std::string& what) { throw InvariantViolation("path CSV: " + what); };
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  bool header = true;
  int n = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t s = 0;
    for (;;) {
      const std::size_t c = line.find(',', s);
      fields.push_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (header) {
      if (fields.size() < 3 || fields[0] != "i" || fields[1] != "t") fail("bad header");
      n = static_cast<int>(fields.size()) - 2;
      for (int k = 1; k <= n; ++k) {
        if (fields[static_cast<std::size_t>(k + 1)] != "x" + std::to_string(k)) fail("bad header");
      }
      header = false;
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(n) + 2) fail("row has wrong field count");
    std::vector<double> row;
    for (auto f : fields) {
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) fail("malformed number '" + std::string(f) + "'");
      row.push_back(v);
    }
    if (row[0] != static_cast<double>(rows.size())) fail("row index out of sequence");
    rows.push_back(std::move(row));
  }
  if (header || rows.size() < 5) fail("need a header and at least 5 rows");
  const int N = static_cast<int>(rows.size()) - 1;
  const double T = rows.back()[1];
  for (int k = 0; k < n; ++k) {
    if (rows.back()[static_cast<std::size_t>(k + 2)] != rows.front()[static_cast<std::size_t>(k + 2)]) {
      fail("closure row differs from first row");
    }
  }
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(N) * n);
  for (int i = 0; i < N; ++i) {
    if (std::abs(rows[static_cast<std::size_t>(i)][1] - T * i / N) > 1e-9 * T) fail("non-uniform time grid");
    for (int k = 0; k < n; ++k) nodes.push_back(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k + 2)]);
  }
  return PeriodicPath(n, T, std::move(nodes), L, margin);
}

}  // namespace relosc
