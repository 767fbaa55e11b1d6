#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "relosc/error.hpp"
#include "relosc/expression.hpp"

namespace relosc::cli {

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(line > 0 ? "config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message
                                  : "config: " + message),
      message_(message),
      line_(line),
      column_(column) {}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"solve",           "scan",     "search",        "verify",
                                                 "probe-uniqueness", "probe-conjecture", "list-instances", "validate"};
  return names;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out;
}

// Column (1-based) of the first non-blank character at or after `from`.
int skip_blank(const std::string& line, std::size_t from) {
  while (from < line.size() && (line[from] == ' ' || line[from] == '\t')) ++from;
  return static_cast<int>(from) + 1;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Cursor {
  int line;
  int column;
};

double to_double(const std::string& s, Cursor at) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected a number, got '" + s + "'", at.line, at.column);
  }
  return v;
}

template <class Int>
Int to_int(const std::string& s, Cursor at) {
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'", at.line, at.column);
  }
  return v;
}

std::vector<double> to_list(const std::string& s, Cursor at) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string raw = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::string item = trim(raw);
    const int lead = static_cast<int>(raw.find_first_not_of(" \t"));
    out.push_back(to_double(item, {at.line, at.column + static_cast<int>(pos) + std::max(lead, 0)}));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

using Setter = std::function<void(const std::string&, Cursor)>;
using Section = std::map<std::string, Setter>;

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  auto dbl = [](double& dst) -> Setter { return [&dst](const std::string& v, Cursor c) { dst = to_double(v, c); }; };
  auto integer = [](int& dst) -> Setter { return [&dst](const std::string& v, Cursor c) { dst = to_int<int>(v, c); }; };
  auto str = [](std::string& dst) -> Setter { return [&dst](const std::string& v, Cursor) { dst = v; }; };
  auto list = [](std::vector<double>& dst) -> Setter {
    return [&dst](const std::string& v, Cursor c) { dst = to_list(v, c); };
  };

  std::map<std::string, std::function<Section()>> sections;
  sections["run"] = [&] {
    return Section{{"command", str(cfg.command)},
                   {"seed", [&](const std::string& v, Cursor c) { cfg.seed = to_int<std::uint64_t>(v, c); }},
                   {"out", str(cfg.out)}};
  };
  sections["instance"] = [&] {
    InstanceSpec& s = cfg.instance;
    return Section{{"builtin", [&s](const std::string& v, Cursor) { s.builtin = v; }},
                   {"name", str(s.name)},
                   {"n", integer(s.n)},
                   {"T", dbl(s.T)},
                   {"L", dbl(s.L)},
                   {"q", dbl(s.q)},
                   {"F", str(s.F)},
                   {"G", str(s.G)},
                   {"H", str(s.H)},
                   {"alpha", str(s.alpha)},
                   {"gamma_side", [&s](const std::string& v, Cursor) { s.gamma_side = v; }},
                   {"v", [&s](const std::string& v, Cursor c) { s.v = to_list(v, c); }},
                   {"w", [&s](const std::string& v, Cursor c) { s.w = to_list(v, c); }}};
  };
  sections["options"] = [&] {
    OptionsSpec& o = cfg.options;
    return Section{{"N", integer(o.N)},
                   {"starts", integer(o.starts)},
                   {"step0", dbl(o.step0)},
                   {"armijo", dbl(o.armijo)},
                   {"tol_grad", dbl(o.tol_grad)},
                   {"max_iters", integer(o.max_iters)},
                   {"delta_cluster", dbl(o.delta_cluster)},
                   {"tol_global", dbl(o.tol_global)},
                   {"margin", dbl(o.margin)},
                   {"precond_shift", dbl(o.precond_shift)},
                   {"box_radius", dbl(o.box_radius)}};
  };
  sections["solve"] = [&] {
    SolveSpec& s = cfg.solve.emplace();
    return Section{{"lambda", dbl(s.lambda)}, {"mu", dbl(s.mu)}};
  };
  sections["scan"] = [&] {
    ScanSpec& s = cfg.scan.emplace();
    return Section{{"lambda_min", dbl(s.lambda_min)}, {"lambda_max", dbl(s.lambda_max)},
                   {"lambda_steps", integer(s.lambda_steps)}, {"mu_min", dbl(s.mu_min)},
                   {"mu_max", dbl(s.mu_max)}, {"mu_steps", integer(s.mu_steps)},
                   {"jump_abs", dbl(s.jump_abs)}, {"jump_slope", dbl(s.jump_slope)}};
  };
  sections["search"] = [&] {
    SearchSpec& s = cfg.search.emplace();
    return Section{{"lambda_min", dbl(s.lambda_min)}, {"lambda_max", dbl(s.lambda_max)},
                   {"mu_min", dbl(s.mu_min)}, {"mu_max", dbl(s.mu_max)},
                   {"lambda_steps", integer(s.lambda_steps)}, {"mu_steps", integer(s.mu_steps)},
                   {"bracket_tol", dbl(s.bracket_tol)}, {"max_bisections", integer(s.max_bisections)}};
  };
  sections["verify"] = [&] {
    VerifySpec& s = cfg.verify.emplace();
    return Section{{"lambda", dbl(s.lambda)}, {"mu", dbl(s.mu)}, {"samples", integer(s.samples)},
                   {"residual_tol", dbl(s.residual_tol)}, {"nonconvexity_runs", integer(s.nonconvexity_runs)}};
  };
  sections["probe-uniqueness"] = [&] {
    UniquenessSpec& s = cfg.uniqueness.emplace();
    return Section{{"lambdas", list(s.lambdas)}, {"mu", dbl(s.mu)}};
  };
  sections["probe-conjecture"] = [&] {
    ConjectureSpec& s = cfg.conjecture.emplace();
    return Section{{"mus", list(s.mus)}};
  };

  std::map<std::string, int> seen_sections;
  std::string current;
  Section active;
  std::map<std::string, int> seen_keys;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string body = trim(line);
    if (body.empty()) continue;
    const int col = skip_blank(line, 0);
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("unterminated section header", lineno, col);
      const std::string name = trim(std::string_view(body).substr(1, body.size() - 2));
      const auto it = sections.find(name);
      if (it == sections.end()) throw ConfigError("unknown section [" + name + "]", lineno, col + 1);
      if (seen_sections.count(name)) {
        throw ConfigError("duplicate section [" + name + "] (first at line " + std::to_string(seen_sections[name]) + ")",
                          lineno, col);
      }
      seen_sections[name] = lineno;
      current = name;
      active = it->second();
      seen_keys.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno, col);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (current.empty()) throw ConfigError("key '" + key + "' outside any section", lineno, col);
    const auto setter = active.find(key);
    if (setter == active.end()) throw ConfigError("unknown key '" + key + "' in [" + current + "]", lineno, col);
    if (seen_keys.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno, col);
    seen_keys[key] = lineno;
    const int vcol = skip_blank(line, eq + 1);
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", lineno, vcol);
    setter->second(value, {lineno, vcol});
    cfg.source.at[current + "." + key] = {lineno, vcol};
  }

  if (cfg.instance.builtin) {
    for (const auto& [k, pos] : cfg.source.at) {
      if (k.rfind("instance.", 0) == 0 && k != "instance.builtin") {
        throw ConfigError("'" + k.substr(9) + "' cannot be combined with a builtin instance", pos.first, pos.second);
      }
    }
  }
  return cfg;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\n";
  if (!c.command.empty()) os << "command = " << c.command << "\n";
  os << "seed = " << c.seed << "\n";
  os << "out = " << c.out << "\n";

  const InstanceSpec& s = c.instance;
  os << "\n[instance]\n";
  if (s.builtin) {
    os << "builtin = " << *s.builtin << "\n";
  } else {
    os << "name = " << s.name << "\n"
       << "n = " << s.n << "\n"
       << "T = " << fmt(s.T) << "\n"
       << "L = " << fmt(s.L) << "\n"
       << "q = " << fmt(s.q) << "\n"
       << "F = " << s.F << "\n"
       << "G = " << s.G << "\n"
       << "H = " << s.H << "\n"
       << "alpha = " << s.alpha << "\n";
    if (s.gamma_side) os << "gamma_side = " << *s.gamma_side << "\n";
    if (s.v) os << "v = " << fmt_list(*s.v) << "\n";
    if (s.w) os << "w = " << fmt_list(*s.w) << "\n";
  }

  const OptionsSpec& o = c.options;
  os << "\n[options]\n"
     << "N = " << o.N << "\n"
     << "starts = " << o.starts << "\n"
     << "step0 = " << fmt(o.step0) << "\n"
     << "armijo = " << fmt(o.armijo) << "\n"
     << "tol_grad = " << fmt(o.tol_grad) << "\n"
     << "max_iters = " << o.max_iters << "\n"
     << "delta_cluster = " << fmt(o.delta_cluster) << "\n"
     << "tol_global = " << fmt(o.tol_global) << "\n"
     << "margin = " << fmt(o.margin) << "\n"
     << "precond_shift = " << fmt(o.precond_shift) << "\n"
     << "box_radius = " << fmt(o.box_radius) << "\n";

  if (c.solve) os << "\n[solve]\nlambda = " << fmt(c.solve->lambda) << "\nmu = " << fmt(c.solve->mu) << "\n";
  if (c.scan) {
    const ScanSpec& x = *c.scan;
    os << "\n[scan]\n"
       << "lambda_min = " << fmt(x.lambda_min) << "\nlambda_max = " << fmt(x.lambda_max)
       << "\nlambda_steps = " << x.lambda_steps << "\nmu_min = " << fmt(x.mu_min) << "\nmu_max = " << fmt(x.mu_max)
       << "\nmu_steps = " << x.mu_steps << "\njump_abs = " << fmt(x.jump_abs) << "\njump_slope = " << fmt(x.jump_slope)
       << "\n";
  }
  if (c.search) {
    const SearchSpec& x = *c.search;
    os << "\n[search]\n"
       << "lambda_min = " << fmt(x.lambda_min) << "\nlambda_max = " << fmt(x.lambda_max) << "\nmu_min = " << fmt(x.mu_min)
       << "\nmu_max = " << fmt(x.mu_max) << "\nlambda_steps = " << x.lambda_steps << "\nmu_steps = " << x.mu_steps
       << "\nbracket_tol = " << fmt(x.bracket_tol) << "\nmax_bisections = " << x.max_bisections << "\n";
  }
  if (c.verify) {
    const VerifySpec& x = *c.verify;
    os << "\n[verify]\n"
       << "lambda = " << fmt(x.lambda) << "\nmu = " << fmt(x.mu) << "\nsamples = " << x.samples
       << "\nresidual_tol = " << fmt(x.residual_tol) << "\nnonconvexity_runs = " << x.nonconvexity_runs << "\n";
  }
  if (c.uniqueness) {
    os << "\n[probe-uniqueness]\nlambdas = " << fmt_list(c.uniqueness->lambdas) << "\nmu = " << fmt(c.uniqueness->mu)
       << "\n";
  }
  if (c.conjecture) os << "\n[probe-conjecture]\nmus = " << fmt_list(c.conjecture->mus) << "\n";
  return os.str();
}

void require_command_fields(const RunConfig& c) {
  const auto& names = command_names();
  if (c.command.empty()) throw ConfigError("no command given");
  if (std::find(names.begin(), names.end(), c.command) == names.end()) {
    const auto it = c.source.at.find("run.command");
    throw ConfigError("unknown command '" + c.command + "'", it == c.source.at.end() ? 0 : it->second.first,
                      it == c.source.at.end() ? 0 : it->second.second);
  }
  auto need = [&](bool present, const char* section) {
    if (!present) throw ConfigError("command '" + c.command + "' needs a [" + section + "] section");
  };
  auto need_key = [&](const std::string& key) {
    if (!c.source.at.count(key)) {
      throw ConfigError("command '" + c.command + "' needs '" + key.substr(key.find('.') + 1) + "' in [" +
                        key.substr(0, key.find('.')) + "]");
    }
  };
  if (c.command == "solve") {
    need(c.solve.has_value(), "solve");
    need_key("solve.lambda");
    need_key("solve.mu");
  } else if (c.command == "scan") {
    need(c.scan.has_value(), "scan");
    for (const char* k : {"scan.lambda_min", "scan.lambda_max", "scan.lambda_steps", "scan.mu_min", "scan.mu_max",
                          "scan.mu_steps"}) {
      need_key(k);
    }
  } else if (c.command == "verify") {
    need(c.verify.has_value(), "verify");
    need_key("verify.lambda");
    need_key("verify.mu");
  } else if (c.command == "probe-uniqueness") {
    need(c.uniqueness.has_value(), "probe-uniqueness");
    need_key("probe-uniqueness.lambdas");
  } else if (c.command == "probe-conjecture") {
    need(c.conjecture.has_value(), "probe-conjecture");
    need_key("probe-conjecture.mus");
  }
}

ProblemInstance build_instance(const RunConfig& c) {
  auto pos = [&](const std::string& key) {
    const auto it = c.source.at.find("instance." + key);
    return it == c.source.at.end() ? std::pair<int, int>{0, 0} : it->second;
  };
  const InstanceSpec& s = c.instance;
  if (s.builtin) {
    try {
      return builtin_instance(*s.builtin);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), pos("builtin").first, pos("builtin").second);
    }
  }
  auto bad = [&](const std::string& key, const std::string& why) {
    throw ConfigError(why, pos(key).first, pos(key).second);
  };
  if (s.n < 1 || s.n > kMaxDimension) bad("n", "n must lie in 1.." + std::to_string(kMaxDimension));
  if (!(s.T > 0.0)) bad("T", "T must be positive");
  if (!(s.L > 0.0)) bad("L", "L must be positive");
  if (!(s.q > 0.0)) bad("q", "q must be positive");

  ProblemInstance inst;
  inst.name = s.name;
  inst.n = s.n;
  inst.T = s.T;
  inst.q = s.q;
  inst.phi = PhiModel::relativistic(s.L);
  auto field = [&](const std::string& key, const std::string& src) {
    try {
      return ScalarField::parse(src, s.n);
    } catch (const ParseError& e) {
      const auto [line, col] = pos(key);
      throw ConfigError(e.what(), line, line > 0 ? col + static_cast<int>(e.position()) : 0);
    }
  };
  inst.F = field("F", s.F);
  inst.G = field("G", s.G);
  inst.H = field("H", s.H);
  inst.alpha = field("alpha", s.alpha);
  if (s.gamma_side) {
    inst.gamma_side = gamma_side_from_string(*s.gamma_side);
    if (!inst.gamma_side) bad("gamma_side", "gamma_side must be 'inf' or 'sup'");
  }
  if (s.v) {
    if (static_cast<int>(s.v->size()) != s.n) bad("v", "v needs " + std::to_string(s.n) + " coordinates");
    inst.v = *s.v;
  }
  if (s.w) {
    if (static_cast<int>(s.w->size()) != s.n) bad("w", "w needs " + std::to_string(s.n) + " coordinates");
    inst.w = *s.w;
  }
  return inst;
}

MinimizeOptions minimize_options(const RunConfig& c, int threads) {
  MinimizeOptions o;
  const OptionsSpec& s = c.options;
  o.N = s.N;
  o.starts = s.starts;
  o.step0 = s.step0;
  o.armijo = s.armijo;
  o.tol_grad = s.tol_grad;
  o.max_iters = s.max_iters;
  o.delta_cluster = s.delta_cluster;
  o.tol_global = s.tol_global;
  o.margin = s.margin;
  o.precond_shift = s.precond_shift;
  o.box_radius = s.box_radius;
  o.seed = c.seed;
  o.threads = threads;
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return o;
}

}  // namespace relosc::cli
