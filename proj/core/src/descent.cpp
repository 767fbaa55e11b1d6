#include "descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relosc/error.hpp"
#include "relosc/path.hpp"

namespace relosc::detail {

CyclicPreconditioner::CyclicPreconditioner(int N, int n, double a, double b) : N_(N), n_(n), a_(a), b_(b) {
  if (a_ == 0.0) return;
  const double d = 2.0 * a_ + b_;
  gamma_ = -d;
  std::vector<double> bb(static_cast<std::size_t>(N_), d);
  bb.front() = d - gamma_;
  bb.back() = d - a_ * a_ / gamma_;
  cprime_.resize(static_cast<std::size_t>(N_));
  denom_.resize(static_cast<std::size_t>(N_));
  denom_[0] = bb[0];
  cprime_[0] = -a_ / denom_[0];
  for (int i = 1; i < N_; ++i) {
    denom_[static_cast<std::size_t>(i)] = bb[static_cast<std::size_t>(i)] + a_ * cprime_[static_cast<std::size_t>(i - 1)];
    cprime_[static_cast<std::size_t>(i)] = -a_ / denom_[static_cast<std::size_t>(i)];
  }
  std::vector<double> u(static_cast<std::size_t>(N_), 0.0);
  u.front() = gamma_;
  u.back() = -a_;
  z_.resize(static_cast<std::size_t>(N_));
  thomas(u, z_);
  z_factor_ = 1.0 + z_.front() - a_ * z_.back() / gamma_;
}

void CyclicPreconditioner::thomas(const std::vector<double>& r, std::vector<double>& x) const {
  x[0] = r[0] / denom_[0];
  for (std::size_t i = 1; i < static_cast<std::size_t>(N_); ++i) x[i] = (r[i] + a_ * x[i - 1]) / denom_[i];
  for (std::size_t i = static_cast<std::size_t>(N_) - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
}

void CyclicPreconditioner::solve(std::span<const double> rhs, std::span<double> out) const {
  if (a_ == 0.0) {
    for (std::size_t j = 0; j < rhs.size(); ++j) out[j] = rhs[j] / b_;
    return;
  }
  std::vector<double> r(static_cast<std::size_t>(N_)), x(static_cast<std::size_t>(N_));
  for (int k = 0; k < n_; ++k) {
    for (int i = 0; i < N_; ++i) r[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i * n_ + k)];
    thomas(r, x);
    const double fact = (x.front() - a_ * x.back() / gamma_) / z_factor_;
    for (int i = 0; i < N_; ++i) {
      out[static_cast<std::size_t>(i * n_ + k)] = x[static_cast<std::size_t>(i)] - fact * z_[static_cast<std::size_t>(i)];
    }
  }
}

void CyclicPreconditioner::multiply(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < N_; ++i) {
    const int prev = (i + N_ - 1) % N_;
    const int next = (i + 1) % N_;
    for (int k = 0; k < n_; ++k) {
      const double xi = x[static_cast<std::size_t>(i * n_ + k)];
      out[static_cast<std::size_t>(i * n_ + k)] =
          b_ * xi + a_ * (2.0 * xi - x[static_cast<std::size_t>(prev * n_ + k)] - x[static_cast<std::size_t>(next * n_ + k)]);
    }
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

DescentResult projected_descent(const DescentProblem& pb, std::vector<double> u, const DescentSettings& st) {
  const double h = pb.T / pb.N;
  const CyclicPreconditioner precond(pb.N, pb.n, pb.curvature / h, h * pb.shift);
  const std::size_t size = u.size();

  auto project = [&](const std::vector<double>& raw) {
    const PeriodicPath p = project_feasible(pb.n, pb.T, raw, pb.L, pb.margin);
    return std::vector<double>(p.data().begin(), p.data().end());
  };

  // Sup over nodes of |(M v)_j| / h: the residual-scale size of a node displacement.
  std::vector<double> mv(size);
  auto residual_scale = [&](const std::vector<double>& v) {
    precond.multiply(v, mv);
    double m = 0.0;
    for (int i = 0; i < pb.N; ++i) {
      double s = 0.0;
      for (int k = 0; k < pb.n; ++k) s += mv[static_cast<std::size_t>(i * pb.n + k)] * mv[static_cast<std::size_t>(i * pb.n + k)];
      m = std::max(m, std::sqrt(s));
    }
    return m / h;
  };

  DescentResult res;
  double f = pb.value(u);
  std::vector<double> g(size), p(size), trial(size), delta(size), g_new(size), dg(size);
  pb.gradient(u, g);
  if (st.record_trace) res.trace.push_back(f);

  double step = st.step0;
  int it = 0;
  for (;; ++it) {
    precond.solve(g, p);
    for (std::size_t j = 0; j < size; ++j) trial[j] = u[j] - p[j];
    const std::vector<double> full = project(trial);
    for (std::size_t j = 0; j < size; ++j) delta[j] = u[j] - full[j];
    res.stationarity = residual_scale(delta);
    if (res.stationarity <= st.tol) {
      res.stationary = true;
      break;
    }
    if (it >= st.max_iters) break;

    bool accepted = false;
    std::vector<double> cand;
    double f_cand = f;
    for (double s = step; s >= 1e-14; s *= 0.5) {
      if (s == 1.0) {
        cand = full;
      } else {
        for (std::size_t j = 0; j < size; ++j) trial[j] = u[j] - s * p[j];
        cand = project(trial);
      }
      double descent = 0.0;
      for (std::size_t j = 0; j < size; ++j) descent += g[j] * (cand[j] - u[j]);
      const double change = pb.difference ? pb.difference(u, cand) : pb.value(cand) - f;
      f_cand = f + change;
      if (change <= st.armijo * std::min(descent, 0.0) && change <= 0.0) {
        accepted = true;
        step = s;
        break;
      }
    }
    if (!accepted) break;

    pb.gradient(cand, g_new);
    for (std::size_t j = 0; j < size; ++j) {
      delta[j] = cand[j] - u[j];
      dg[j] = g_new[j] - g[j];
    }
    const double curv = dot(delta, dg);
    precond.multiply(delta, mv);
    const double metric = dot(delta, mv);
    // Barzilai-Borwein step in the preconditioned metric; grow otherwise.
    step = curv > 0.0 ? std::clamp(metric / curv, 1e-8, 1e8) : std::min(2.0 * step, 1e8);
    u = std::move(cand);
    f = f_cand;
    g.swap(g_new);
    if (st.record_trace) res.trace.push_back(f);
  }
  res.iterations = it;
  res.value = pb.difference ? pb.value(u) : f;
  res.nodes = std::move(u);
  return res;
}

}  // namespace relosc::detail
