#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "relosc/multiplicity.hpp"
#include "relosc/optimize.hpp"
#include "relosc/path.hpp"
#include "relosc/verify.hpp"

namespace relosc::cli {

using Json = nlohmann::ordered_json;

/// Everything a command produces. Files are keyed by path relative to the
/// output directory and written together at the end of the run.
struct Artifacts {
  Json report = Json::object();
  std::map<std::string, std::string> files;

  /// Adds paths/<stem>.csv and plot/<stem>.dat for a path and returns a JSON
  /// summary referencing them.
  Json add_path(const std::string& stem, const PeriodicPath& path);
  void write(const std::filesystem::path& out_dir) const;
};

Json to_json(const Diagnostic& d);
Json to_json(const GrowthConstants& g);
Json to_json(const GrowthCheck& g);
Json to_json(const CoercivityReport& r);
Json to_json(const MultiplicityCertificate& c);
Json to_json(const ConjectureReport& r);
Json to_json(const UniquenessRow& r);
Json to_json(const NonconvexityReport& r);
Json instance_json(const ProblemInstance& instance);

/// `t x1 .. xn` rows including the closure node, for gnuplot.
std::string path_plot(const PeriodicPath& path);
/// beta surface as gnuplot grid data (blank line between mu rows).
std::string beta_plot(const ScanResult& scan);

}  // namespace relosc::cli
