#include "report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relosc::cli {

namespace {

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json pair(const std::array<double, 2>& p) { return Json::array({p[0], p[1]}); }

Json vec(std::span<const double> xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(x);
  return out;
}

}  // namespace

Json Artifacts::add_path(const std::string& stem, const PeriodicPath& path) {
  const std::string csv = "paths/" + stem + ".csv";
  const std::string dat = "plot/" + stem + ".dat";
  files[csv] = path_to_csv(path);
  files[dat] = path_plot(path);
  const auto mean = path.mean();
  return Json{{"csv", csv},
              {"plot", dat},
              {"N", path.intervals()},
              {"mean", vec(mean)},
              {"sup_norm", path.sup_norm()},
              {"inf_norm", path.inf_norm()},
              {"max_slope", path.max_slope()}};
}

void Artifacts::write(const std::filesystem::path& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto put = [&](const fs::path& rel, const std::string& text) {
    const fs::path full = out_dir / rel;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    std::ofstream os(full, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + full.string());
  };
  for (const auto& [rel, text] : files) put(rel, text);
  put("report.json", report.dump(2) + "\n");
}

Json to_json(const Diagnostic& d) { return Json{{"check", d.check}, {"ok", d.ok}, {"message", d.message}}; }

Json to_json(const GrowthConstants& g) {
  return Json{{"q", g.q},         {"c1", g.c1},         {"delta", g.delta}, {"c2", g.c2},
              {"c3", g.c3},       {"delta1", g.delta1}, {"M_int", g.M_int}, {"b", g.b},
              {"rho_ref", g.rho_ref}, {"box_radius", g.box_radius}, {"closed_form", g.closed_form}};
}

Json to_json(const GrowthCheck& g) {
  return Json{{"ok", g.ok}, {"message", g.message}, {"f_ratios", g.f_ratios}, {"gh_ratios", g.gh_ratios}};
}

Json to_json(const CoercivityReport& r) {
  Json ex = Json::array();
  for (const auto& v : r.examples) {
    ex.push_back(Json{{"kind", v.kind},
                      {"value", v.value},
                      {"sup_norm", v.sup_norm},
                      {"bound", v.bound},
                      {"path_csv", path_to_csv(v.path)}});
  }
  return Json{{"samples", r.samples},         {"excluded", r.excluded},       {"sublevel", r.sublevel},
              {"violations", r.violations},   {"worst_ratio", r.worst_ratio}, {"examples", ex}};
}

Json to_json(const MultiplicityCertificate& c) {
  return Json{{"lambda", c.lambda_t},     {"mu", c.mu_t},           {"beta", c.beta},
              {"value_a", c.value_a},     {"value_b", c.value_b},   {"value_gap", c.value_gap},
              {"separation", c.separation}, {"residual_a", c.residual_a}, {"residual_b", c.residual_b},
              {"psi_a", pair(c.psi_a)},   {"psi_b", pair(c.psi_b)}, {"exact", c.exact},
              {"evaluations", c.evaluations}};
}

Json to_json(const ConjectureReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"mu", row.mu}, {"n_global", row.n_global}, {"value_gap", row.value_gap}});
  }
  return Json{{"h_minima", r.h_minima},
              {"rows", rows},
              {"instance_verdict", r.instance_verdict},
              {"conjecture_status", r.conjecture_status},
              {"note", "exploratory: a grid probe can reject a candidate witness, never confirm the conjecture"}};
}

Json to_json(const UniquenessRow& r) {
  return Json{{"lambda", r.lambda},
              {"count", r.count},
              {"flagged", r.flagged},
              {"best_value", r.best_value},
              {"representative_mean", r.representative_mean}};
}

Json to_json(const NonconvexityReport& r) {
  return Json{{"point_v", pair(r.point_v)},
              {"point_w", pair(r.point_w)},
              {"gamma", r.gamma},
              {"lambda_star", r.lambda_star},
              {"target", pair(r.target)},
              {"level_points", r.level_points},
              {"min_gap", r.min_gap},
              {"variation_budget", r.variation_budget},
              {"discrete_argument", r.discrete_argument},
              {"discrete_note", r.discrete_note},
              {"empirical_floor", r.empirical_floor},
              {"runs", r.runs}};
}

Json instance_json(const ProblemInstance& inst) {
  Json j{{"name", inst.name}, {"n", inst.n},         {"T", inst.T},         {"L", inst.L()},
         {"q", inst.q},       {"F", inst.F.source()}, {"G", inst.G.source()}, {"H", inst.H.source()},
         {"alpha", inst.alpha.source()}};
  if (inst.gamma_side) j["gamma_side"] = std::string(to_string(*inst.gamma_side));
  if (inst.v) j["v"] = *inst.v;
  if (inst.w) j["w"] = *inst.w;
  return j;
}

std::string path_plot(const PeriodicPath& path) {
  std::ostringstream os;
  os << "# t";
  for (int k = 1; k <= path.dim(); ++k) os << " x" << k;
  os << "\n";
  for (int i = 0; i <= path.intervals(); ++i) {
    os << num(path.time(i));
    for (double x : path.node(i % path.intervals())) os << " " << num(x);
    os << "\n";
  }
  return os.str();
}

std::string beta_plot(const ScanResult& scan) {
  std::ostringstream os;
  os << "# lambda mu beta\n";
  for (int j = 0; j < scan.mu_steps; ++j) {
    for (int i = 0; i < scan.lambda_steps; ++i) {
      const auto& s = scan.at(i, j);
      os << num(s.lambda) << " " << num(s.mu) << " " << (s.fault.empty() ? num(s.beta) : "nan") << "\n";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace relosc::cli
