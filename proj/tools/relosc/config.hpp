#pragma once

// Run configuration: INI-style text with [section] headers and key = value
// lines. '#' and ';' start comments. Lists are comma separated. See the
// README for the full grammar.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relosc/model.hpp"
#include "relosc/multiplicity.hpp"
#include "relosc/optimize.hpp"

namespace relosc::cli {

/// Malformed or incomplete configuration. Line and column are 1-based; 0
/// means the error is not tied to a position.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

/// Where each "section.key" value starts in the source. Ignored by equality
/// so that a parsed and a re-serialized config compare equal.
struct SourceMap {
  std::map<std::string, std::pair<int, int>> at;
  bool operator==(const SourceMap&) const { return true; }
};

struct InstanceSpec {
  std::optional<std::string> builtin;
  std::string name = "custom";
  int n = 1;
  double T = 1.0;
  double L = 1.0;
  double q = 1.0;
  std::string F = "0";
  std::string G = "0";
  std::string H = "0";
  std::string alpha = "1";
  std::optional<std::string> gamma_side;
  std::optional<std::vector<double>> v;
  std::optional<std::vector<double>> w;
  bool operator==(const InstanceSpec&) const = default;
};

struct OptionsSpec {
  int N = 64;
  int starts = 0;
  double step0 = 1.0;
  double armijo = 1e-4;
  double tol_grad = 1e-9;
  int max_iters = 20000;
  double delta_cluster = 0.0;
  double tol_global = 1e-6;
  double margin = 1e-3;
  double precond_shift = 1.0;
  double box_radius = 0.0;
  bool operator==(const OptionsSpec&) const = default;
};

struct SolveSpec {
  double lambda = 0.0;
  double mu = 0.0;
  bool operator==(const SolveSpec&) const = default;
};

struct ScanSpec {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int lambda_steps = 1;
  double mu_min = 0.0;
  double mu_max = 0.0;
  int mu_steps = 1;
  double jump_abs = 0.25;
  double jump_slope = 1.5;
  bool operator==(const ScanSpec&) const = default;
};

struct SearchSpec {
  double lambda_min = -1.0;
  double lambda_max = 1.0;
  double mu_min = 0.5;
  double mu_max = 2.0;
  int lambda_steps = 6;
  int mu_steps = 4;
  double bracket_tol = 1e-10;
  int max_bisections = 80;
  bool operator==(const SearchSpec&) const = default;
};

struct VerifySpec {
  double lambda = 0.0;
  double mu = 0.0;
  int samples = 1000;
  double residual_tol = 1e-6;
  int nonconvexity_runs = 10000;
  bool operator==(const VerifySpec&) const = default;
};

struct UniquenessSpec {
  std::vector<double> lambdas;
  double mu = 0.0;
  bool operator==(const UniquenessSpec&) const = default;
};

struct ConjectureSpec {
  std::vector<double> mus;
  bool operator==(const ConjectureSpec&) const = default;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string out = "relosc-out";
  InstanceSpec instance;
  OptionsSpec options;
  std::optional<SolveSpec> solve;
  std::optional<ScanSpec> scan;
  std::optional<SearchSpec> search;
  std::optional<VerifySpec> verify;
  std::optional<UniquenessSpec> uniqueness;
  std::optional<ConjectureSpec> conjecture;
  SourceMap source;
  bool operator==(const RunConfig&) const = default;
};

/// Commands accepted in [run] command or on the command line.
const std::vector<std::string>& command_names();

/// Parses configuration text. Throws ConfigError with the position of the
/// offending token.
RunConfig parse_config(std::string_view text);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Checks that the sections required by config.command are present.
void require_command_fields(const RunConfig& config);

/// Builds the problem instance. Expression errors become ConfigError at the
/// expression's position in the source.
ProblemInstance build_instance(const RunConfig& config);

MinimizeOptions minimize_options(const RunConfig& config, int threads);

}  // namespace relosc::cli
