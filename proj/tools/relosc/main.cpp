#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "relosc/error.hpp"

using namespace relosc;
using namespace relosc::cli;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes whatever the run produced. A failure here is reported but does not
// mask the run's own exit code unless the run succeeded.
int finish(const Artifacts& art, const std::string& out_dir, int code) {
  try {
    art.write(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "relosc: " << e.what() << "\n";
    return code == kOk ? kFault : code;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic minimizers of perturbed relativistic-oscillator actions"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config,-c", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Override [run] seed");
  app.add_option("--out,-o", out, "Override [run] out (output directory)");
  app.add_option("--threads,-j", threads, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = parse_config(read_file(config_path));
    } else if (command != "list-instances") {
      throw ConfigError("--config is required for '" + command + "'");
    }
    if (!cfg.command.empty() && cfg.command != command) {
      throw ConfigError("config names command '" + cfg.command + "' but '" + command + "' was requested");
    }
    cfg.command = command;
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    require_command_fields(cfg);
  } catch (const ConfigError& e) {
    if (!config_path.empty() && e.line() > 0) {
      std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.message() << "\n";
    } else {
      std::cerr << (config_path.empty() ? "" : config_path + ": ") << e.what() << "\n";
    }
    return kConfigError;
  }

  Artifacts art;
  try {
    const int code = run_command(cfg, threads, art);
    art.report["status"] = code == kOk ? "ok" : code == kViolation ? "violation" : "fault";
    if (command == "list-instances") {
      for (const auto& inst : art.report["instances"]) std::cout << inst["name"].get<std::string>() << "\n";
      if (config_path.empty()) return code;
    }
    std::cout << "relosc " << command << ": " << art.report["status"].get<std::string>() << " (" << cfg.out
              << "/report.json)\n";
    return finish(art, cfg.out, code);
  } catch (const ConfigError& e) {
    if (!config_path.empty() && e.line() > 0) {
      std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.message() << "\n";
    } else {
      std::cerr << (config_path.empty() ? "" : config_path + ": ") << e.what() << "\n";
    }
    return kConfigError;
  } catch (const HypothesisError& e) {
    art.report["status"] = "violation";
    art.report["error"] = e.what();
    std::cerr << "relosc: hypothesis check failed: " << e.what() << "\n";
    return finish(art, cfg.out, kViolation);
  } catch (const std::exception& e) {
    art.report["status"] = "fault";
    art.report["error"] = e.what();
    std::cerr << "relosc: " << e.what() << "\n";
    return finish(art, cfg.out, kFault);
  }
}
