#include "relosc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "relosc/error.hpp"
#include "relosc/rng.hpp"

namespace relosc {
namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

PhiModel PhiModel::relativistic(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("relativistic kernel needs L > 0");
  PhiModel m;
  m.name_ = "relativistic";
  m.L_ = L;
  m.curvature0_ = 1.0 / L;
  m.relativistic_ = true;
  return m;
}

PhiModel PhiModel::custom(std::string name, double L, EvalFn eval, MapFn grad, MapFn inverse) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("kernel needs L > 0");
  if (!eval || !grad || !inverse) throw std::invalid_argument("kernel callables must be set");
  PhiModel m;
  m.name_ = std::move(name);
  m.L_ = L;
  m.relativistic_ = false;
  m.eval_ = std::move(eval);
  m.grad_ = std::move(grad);
  m.inverse_ = std::move(inverse);

  Rng rng(0x5eed);
  auto fail = [&](const std::string& what) { throw InvariantViolation("kernel '" + m.name_ + "': " + what); };
  for (int dim = 1; dim <= 3; ++dim) {
    std::vector<double> zero(dim, 0.0), x(dim), y(dim), mid(dim), g(dim), back(dim);
    const double phi0 = m.eval(zero);
    m.grad(zero, g);
    if (std::sqrt(norm2(g)) > 1e-12) fail("grad(0) != 0");
    auto draw = [&](std::vector<double>& p) {
      double r2 = 0.0;
      for (auto& c : p) {
        c = rng.normal();
        r2 += c * c;
      }
      const double radius = 0.99 * L * std::pow(rng.uniform(), 1.0 / dim) / std::sqrt(r2);
      for (auto& c : p) c *= radius;
    };
    for (int k = 0; k < 100; ++k) {
      draw(x);
      draw(y);
      const double fx = m.eval(x), fy = m.eval(y);
      if (fx > 0.0) fail("eval > 0");
      if (norm2(x) > 0.0 && !(fx > phi0)) fail("0 is not the strict minimum");
      for (int i = 0; i < dim; ++i) mid[i] = 0.5 * (x[i] + y[i]);
      if (norm2(x) != norm2(y) || x != y) {
        if (!(m.eval(mid) < 0.5 * (fx + fy))) fail("midpoint convexity fails");
      }
      m.grad(x, g);
      m.inverse(g, back);
      for (int i = 0; i < dim; ++i) {
        if (std::abs(back[i] - x[i]) > 1e-10) fail("inverse(grad(x)) != x");
      }
    }
  }
  const double eps = 1e-6 * L;
  std::vector<double> e{eps}, g(1);
  m.grad(e, g);
  const double gp = g[0];
  e[0] = -eps;
  m.grad(e, g);
  m.curvature0_ = (gp - g[0]) / (2.0 * eps);
  if (!(m.curvature0_ > 0.0)) fail("non-positive curvature at 0");
  return m;
}

double PhiModel::eval(std::span<const double> x) const {
  if (!relativistic_) return eval_(x);
  const double r2 = norm2(x);
  const double s = L_ * L_ - r2;
  if (s < -1e-14 * L_ * L_) throw DomainError("kernel evaluated outside the closed ball");
  return -std::sqrt(std::max(s, 0.0));
}

void PhiModel::grad(std::span<const double> x, std::span<double> out) const {
  if (!relativistic_) {
    grad_(x, out);
    return;
  }
  const double s = L_ * L_ - norm2(x);
  if (!(s > 0.0)) throw DomainError("kernel gradient undefined: slope at or beyond the speed bound");
  const double inv = 1.0 / std::sqrt(s);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv;
}

double PhiModel::difference(std::span<const double> a, std::span<const double> b) const {
  double step2 = 0.0, scale2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    step2 += (b[k] - a[k]) * (b[k] - a[k]);
    scale2 += a[k] * a[k];
  }
  if (relativistic_) {
    // -sqrt(L^2-|b|^2) + sqrt(L^2-|a|^2) = (|b|^2-|a|^2) / (sqrt(L^2-|b|^2) + sqrt(L^2-|a|^2))
    double num = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) num += (b[k] - a[k]) * (b[k] + a[k]);
    const double den = -eval(b) - eval(a);
    if (den > 0.0) return num / den;
    return eval(b) - eval(a);
  }
  if (step2 > 1e-12 * (L_ * L_ + scale2)) return eval(b) - eval(a);
  std::vector<double> ga(a.size()), gb(a.size());
  grad(a, ga);
  grad(b, gb);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += 0.5 * (ga[k] + gb[k]) * (b[k] - a[k]);
  return s;
}

void PhiModel::inverse(std::span<const double> y, std::span<double> out) const {
  if (!relativistic_) {
    inverse_(y, out);
    return;
  }
  const double scale = L_ / std::sqrt(1.0 + norm2(y));
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * scale;
}

PhiModel make_relativistic_phi(double L) { return PhiModel::relativistic(L); }

ScalarField parse_field(std::string_view source, int n) { return ScalarField::parse(source, n); }

std::string_view to_string(GammaSide side) { return side == GammaSide::Inf ? "inf" : "sup"; }

std::optional<GammaSide> gamma_side_from_string(std::string_view s) {
  if (s == "inf") return GammaSide::Inf;
  if (s == "sup") return GammaSide::Sup;
  return std::nullopt;
}

double ProblemInstance::gamma() const {
  if (!v) throw HypothesisError("instance has no witness points");
  return H.value(0.0, *v);
}

double integrate_time(const std::function<double(double)>& f, double T) {
  constexpr int kPanels = 2048;
  const double h = T / kPanels;
  double s = f(0.0) + f(T);
  for (int i = 1; i < kPanels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

double integral_G(const ProblemInstance& instance, std::span<const double> x) {
  return integrate_time([&](double t) { return instance.G.value(t, x); }, instance.T);
}

double integral_alpha(const ProblemInstance& instance) {
  const std::vector<double> origin(static_cast<std::size_t>(instance.n), 0.0);
  return integrate_time([&](double t) { return instance.alpha.value(t, origin); }, instance.T);
}

double alpha_sup(const ProblemInstance& instance) {
  const std::vector<double> origin(static_cast<std::size_t>(instance.n), 0.0);
  constexpr int kSamples = 10000;
  double sup = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = instance.T * k / (kSamples - 1);
    sup = std::max(sup, std::abs(instance.alpha.value(t, origin)));
  }
  return sup;
}

std::vector<Diagnostic> check_instance(const ProblemInstance& inst) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string check, bool ok, std::string msg) {
    out.push_back({std::move(check), ok, ok ? std::string() : std::move(msg)});
  };

  add("dimension", inst.n >= 1 && inst.n <= kMaxDimension, "n must lie in 1..16");
  add("horizon", inst.T > 0.0 && std::isfinite(inst.T), "T must be positive");
  add("growth exponent", inst.q > 0.0 && std::isfinite(inst.q), "q must be positive");
  const bool arity = inst.F.arity() == inst.n && inst.G.arity() == inst.n && inst.H.arity() == inst.n &&
                     inst.alpha.arity() == inst.n;
  add("field arity", arity, "every field must be declared over n variables");
  add("H autonomous", !inst.H.uses_t(), "H may not depend on t");
  add("alpha depends on t only", !inst.alpha.uses_x(), "alpha may not depend on x");
  for (const Diagnostic& d : out) {
    if (!d.ok) return out;
  }

  {
    const std::vector<double> origin(static_cast<std::size_t>(inst.n), 0.0);
    constexpr int kSamples = 10000;
    int pos = 0, neg = 0, zero = 0;
    std::string msg;
    try {
      for (int k = 0; k < kSamples; ++k) {
        const double a = inst.alpha.value(inst.T * k / (kSamples - 1), origin);
        if (a > 0.0) {
          ++pos;
        } else if (a < 0.0) {
          ++neg;
        } else {
          ++zero;
        }
      }
    } catch (const EvaluationFault& e) {
      msg = e.what();
    }
    const bool ok = msg.empty() && !(pos > 0 && neg > 0) && zero * 100 < kSamples;
    if (msg.empty()) {
      msg = "alpha changes sign or vanishes on a sampled set (" + std::to_string(pos) + " positive, " +
            std::to_string(neg) + " negative, " + std::to_string(zero) + " zero)";
    }
    add("alpha sign", ok, msg);
  }

  if (inst.v || inst.w) {
    const bool present = inst.gamma_side && inst.v && inst.w && inst.v->size() == static_cast<std::size_t>(inst.n) &&
                         inst.w->size() == static_cast<std::size_t>(inst.n);
    add("witness data", present, "gamma_side, v and w must all be given with n coordinates");
    if (present) {
      try {
        const double gamma = inst.gamma();
        const double hw = inst.H.value(0.0, *inst.w);
        add("gamma attained", std::abs(hw - gamma) <= 1e-12,
            "H(v) = " + std::to_string(gamma) + " but H(w) = " + std::to_string(hw));
        const double gv = integral_G(inst, *inst.v);
        const double gw = integral_G(inst, *inst.w);
        add("witness integrals differ", std::abs(gv - gw) > 1e-9,
            "int G(t,v) dt = int G(t,w) dt = " + std::to_string(gv));
      } catch (const EvaluationFault& e) {
        add("witness evaluation", false, e.what());
      }
    }
  }
  return out;
}

void require_valid(const ProblemInstance& instance) {
  for (const Diagnostic& d : check_instance(instance)) {
    if (!d.ok) throw InvariantViolation("instance '" + instance.name + "': " + d.check + ": " + d.message);
  }
}

std::vector<std::string> builtin_names() { return {"remark1-convex", "cosine-desk", "conjecture-doublewell"}; }

ProblemInstance builtin_instance(std::string_view name) {
  ProblemInstance p;
  p.name = std::string(name);
  p.n = 1;
  p.T = 1.0;
  p.phi = make_relativistic_phi(1.0);
  p.alpha = parse_field("1", 1);
  if (name == "remark1-convex") {
    // F = |x|^p / p with p = 2, G = <x, omega> with omega = 1, H = 0.
    p.F = parse_field("x1^2/2", 1);
    p.G = parse_field("x1", 1);
    p.H = parse_field("0", 1);
    p.q = 1.0;
    p.growth = GrowthClosedForm{1.0, 1.0, [](double c3) { return 2.0 * c3; }};
  } else if (name == "cosine-desk") {
    p.F = parse_field("x1^4", 1);
    p.G = parse_field("x1", 1);
    p.H = parse_field("cos(x1)", 1);
    p.q = 2.0;
    p.gamma_side = GammaSide::Sup;
    p.v = std::vector<double>{0.0};
    p.w = std::vector<double>{2.0 * std::numbers::pi};
    p.growth = GrowthClosedForm{2.0, 1.0, [](double c3) { return std::sqrt(c3); }};
  } else if (name == "conjecture-doublewell") {
    p.F = parse_field("x1^6", 1);
    p.G = parse_field("0", 1);
    p.H = parse_field("(x1^2-1)^2", 1);
    p.q = 4.0;
    p.gamma_side = GammaSide::Inf;
    p.growth = GrowthClosedForm{1.0, 1.0, [](double c3) { return std::sqrt(c3); }};
  } else {
    throw std::invalid_argument("unknown builtin instance '" + std::string(name) + "'");
  }
  return p;
}

}  // namespace relosc
