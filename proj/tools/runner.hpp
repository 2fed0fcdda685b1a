#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "config.hpp"

namespace waveqed::cli {

// Execute a parsed config tree (any mode). Creates the output directory,
// writes CSV tables and a manifest.json per run. Returns the exit code:
// 0 ok, 1 numeric/convergence failure, 3 resource abort. Config problems
// throw ConfigError before anything is written.
int run_config(const nlohmann::json& tree, const std::string& out_override);

struct CompareOptions {
    double default_tol = 1e-9;
    std::map<std::string, double> tols; // "file:column", "column" or "*"
    std::string report_path;            // empty: no JSON file
};

// Compare the CSV tables two run directories share. Writes a JSON report,
// prints a summary, returns 0 when every deviation passes its tolerance,
// 1 otherwise. Header or row-count differences throw ConfigError.
int compare_dirs(const std::string& dir_a, const std::string& dir_b,
                 const CompareOptions& opts);

} // namespace waveqed::cli
