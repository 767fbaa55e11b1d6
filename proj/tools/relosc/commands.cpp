#include "commands.hpp"

#include <cmath>
#include <sstream>

#include "relosc/error.hpp"
#include "relosc/rng.hpp"

namespace relosc::cli {

namespace {

Json cluster_json(Artifacts& out, const std::string& stem, const Cluster& c, bool global) {
  return Json{{"value", c.value},
              {"psi", Json::array({c.psi[0], c.psi[1]})},
              {"residual", c.residual},
              {"basin_hits", c.basin_hits},
              {"stationary", c.stationary},
              {"global", global},
              {"path", out.add_path(stem, c.representative)}};
}

Json minima_json(Artifacts& out, const MinimaReport& rep) {
  Json clusters = Json::array();
  for (std::size_t k = 0; k < rep.clusters.size(); ++k) {
    const bool global = std::find(rep.global_set.begin(), rep.global_set.end(), k) != rep.global_set.end();
    clusters.push_back(cluster_json(out, "cluster_" + std::to_string(k), rep.clusters[k], global));
  }
  return Json{{"lambda", rep.lambda},         {"mu", rep.mu},
              {"starts", rep.starts},         {"box_radius", rep.box_radius},
              {"best_value", rep.best_value()}, {"n_global", rep.global_set.size()},
              {"second_gap", rep.second_gap()}, {"clusters", clusters},
              {"faults", rep.faults}};
}

Json check(bool ok, Json detail) {
  Json j{{"ok", ok}};
  for (auto& [k, v] : detail.items()) j[k] = v;
  return j;
}

int cmd_solve(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, Artifacts& out) {
  const auto rep = multistart(inst, cfg.solve->lambda, cfg.solve->mu, opts);
  out.report["result"] = minima_json(out, rep);
  return kOk;
}

int cmd_scan(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, Artifacts& out) {
  const ScanSpec& s = *cfg.scan;
  const ParamBox box{s.lambda_min, s.lambda_max, s.mu_min, s.mu_max};
  const auto scan = scan_plane(inst, box, s.lambda_steps, s.mu_steps, opts, JumpRule{s.jump_abs, s.jump_slope});
  out.files["scan.csv"] = scan_to_csv(scan);
  out.files["plot/beta.dat"] = beta_plot(scan);
  Json flagged = Json::array();
  Json faults = Json::array();
  for (const auto& c : scan.samples) {
    if (c.flag) flagged.push_back(Json{{"lambda", c.lambda}, {"mu", c.mu}, {"n_global", c.n_global}});
    if (!c.fault.empty()) faults.push_back(Json{{"lambda", c.lambda}, {"mu", c.mu}, {"fault", c.fault}});
  }
  out.report["result"] = Json{{"cells", scan.samples.size()},
                              {"csv", "scan.csv"},
                              {"plot", "plot/beta.dat"},
                              {"flagged", flagged},
                              {"faults", faults}};
  return faults.empty() ? kOk : kFault;
}

int cmd_search(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, Artifacts& out) {
  const SearchSpec s = cfg.search.value_or(SearchSpec{});
  const ParamBox box{s.lambda_min, s.lambda_max, s.mu_min, s.mu_max};
  SearchOptions so;
  so.lambda_steps = s.lambda_steps;
  so.mu_steps = s.mu_steps;
  so.bracket_tol = s.bracket_tol;
  so.max_bisections = s.max_bisections;
  if (cfg.scan) so.rule = JumpRule{cfg.scan->jump_abs, cfg.scan->jump_slope};
  try {
    const auto cert = find_two_minima(inst, box, opts, so);
    Json j = to_json(cert);
    j["path_a"] = out.add_path("minimizer_a", cert.path_a);
    j["path_b"] = out.add_path("minimizer_b", cert.path_b);
    out.report["result"] = j;
    return cert.exact ? kOk : kViolation;
  } catch (const NoJumpFound& e) {
    out.report["result"] = Json{{"certificate", nullptr}, {"reason", e.what()}};
    return kViolation;
  }
}

int cmd_verify(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, int threads,
               Artifacts& out) {
  const VerifySpec& s = *cfg.verify;
  const PathAudit audit0 = path_audit();
  Json checks = Json::object();
  bool all_ok = true;
  auto record = [&](const char* name, bool ok, Json detail) {
    checks[name] = check(ok, std::move(detail));
    all_ok = all_ok && ok;
  };

  const auto diags = check_instance(inst);
  Json dj = Json::array();
  bool diag_ok = true;
  for (const auto& d : diags) {
    dj.push_back(to_json(d));
    diag_ok = diag_ok && d.ok;
  }
  record("diagnostics", diag_ok, Json{{"items", dj}});

  const auto growth = check_growth(inst);
  record("growth", growth.ok, to_json(growth));

  const auto ms = multistart(inst, s.lambda, s.mu, opts);
  out.report["minima"] = minima_json(out, ms);

  if (growth.ok) {
    const auto constants = growth_constants(inst, s.lambda, s.mu, ms.best_value() + 1.0);
    const bool valid = constants.valid(inst.T * inst.phi.eval(std::vector<double>(inst.n, 0.0)));
    record("constants", valid, Json{{"constants", to_json(constants)}});
    if (valid) {
      const auto coer =
          coercivity_check(inst, s.lambda, s.mu, constants, s.samples, opts.N, derive_seed(cfg.seed, 7));
      record("coercivity", coer.violations == 0, to_json(coer));
      bool inside = true;
      for (std::size_t k : ms.global_set) inside = inside && ms.clusters[k].representative.sup_norm() <= constants.box_radius;
      record("minimizers_in_box", inside, Json{{"box_radius", constants.box_radius}});
    }
  }

  double worst = 0.0;
  for (std::size_t k : ms.global_set) worst = std::max(worst, ms.clusters[k].residual);
  record("residuals", worst <= s.residual_tol, Json{{"worst", worst}, {"tolerance", s.residual_tol}});

  if (inst.has_witnesses()) {
    NonconvexityOptions no;
    no.runs = s.nonconvexity_runs;
    no.seed = derive_seed(cfg.seed, 11);
    no.threads = threads;
    const auto nc = nonconvexity_check(inst, no);
    Json j = to_json(nc);
    if (nc.closest) j["closest_path_csv"] = path_to_csv(*nc.closest);
    record("nonconvexity", nc.discrete_argument, j);
  }

  const PathAudit audit1 = path_audit();
  record("path_audit", audit1.violations == audit0.violations,
         Json{{"violations", audit1.violations - audit0.violations}});

  out.report["checks"] = checks;
  out.report["passed"] = all_ok;
  return all_ok ? kOk : kViolation;
}

int cmd_uniqueness(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, Artifacts& out) {
  const auto rows = uniqueness_probe(inst, cfg.uniqueness->lambdas, opts, cfg.uniqueness->mu);
  Json j = Json::array();
  bool flagged = false;
  for (const auto& r : rows) {
    j.push_back(to_json(r));
    flagged = flagged || r.flagged;
  }
  out.report["result"] = Json{{"mu", cfg.uniqueness->mu}, {"rows", j}, {"multiplicity_detected", flagged}};
  return flagged ? kViolation : kOk;
}

int cmd_conjecture(const RunConfig& cfg, const ProblemInstance& inst, const MinimizeOptions& opts, Artifacts& out) {
  out.report["result"] = to_json(conjecture_probe(inst, cfg.conjecture->mus, opts));
  return kOk;
}

int cmd_list(Artifacts& out) {
  Json list = Json::array();
  for (const auto& name : builtin_names()) list.push_back(instance_json(builtin_instance(name)));
  out.report["instances"] = list;
  return kOk;
}

}  // namespace

std::vector<Diagnostic> validate_config(const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  if (!cfg.instance.builtin) {
    // Parse each expression on its own so that every syntax error is listed.
    using Field = std::string InstanceSpec::*;
    const std::pair<const char*, Field> fields[] = {
        {"F", &InstanceSpec::F}, {"G", &InstanceSpec::G}, {"H", &InstanceSpec::H}, {"alpha", &InstanceSpec::alpha}};
    bool parsed = true;
    for (const auto& [key, field] : fields) {
      RunConfig one = cfg;
      one.instance.F = one.instance.G = one.instance.H = "0";
      one.instance.alpha = "1";
      one.instance.*field = cfg.instance.*field;
      try {
        build_instance(one);
        out.push_back({std::string("parse ") + key, true, "ok"});
      } catch (const ConfigError& e) {
        out.push_back({std::string("parse ") + key, false, e.what()});
        parsed = false;
      }
    }
    if (!parsed) return out;
  }
  try {
    const auto inst = build_instance(cfg);
    for (auto& d : check_instance(inst)) out.push_back(std::move(d));
  } catch (const ConfigError& e) {
    out.push_back({"instance", false, e.what()});
  }
  return out;
}

int run_command(const RunConfig& cfg, int threads, Artifacts& out) {
  out.report["command"] = cfg.command;
  out.report["seed"] = cfg.seed;
  out.report["config"] = serialize_config(cfg);

  if (cfg.command == "list-instances") return cmd_list(out);
  if (cfg.command == "validate") {
    Json items = Json::array();
    bool ok = true;
    for (const auto& d : validate_config(cfg)) {
      items.push_back(to_json(d));
      ok = ok && d.ok;
    }
    out.report["diagnostics"] = items;
    out.report["passed"] = ok;
    return ok ? kOk : kViolation;
  }

  const ProblemInstance inst = build_instance(cfg);
  const MinimizeOptions opts = minimize_options(cfg, threads);
  out.report["instance"] = instance_json(inst);

  if (cfg.command == "solve") return cmd_solve(cfg, inst, opts, out);
  if (cfg.command == "scan") return cmd_scan(cfg, inst, opts, out);
  if (cfg.command == "search") return cmd_search(cfg, inst, opts, out);
  if (cfg.command == "verify") return cmd_verify(cfg, inst, opts, threads, out);
  if (cfg.command == "probe-uniqueness") return cmd_uniqueness(cfg, inst, opts, out);
  if (cfg.command == "probe-conjecture") return cmd_conjecture(cfg, inst, opts, out);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace relosc::cli
