#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "waveqed/model.hpp"
#include "waveqed/scattering.hpp"

namespace waveqed::cli {

// One fully resolved simulation: everything run_scattering needs plus the
// output location. `echo` is the canonical config (all defaults
// materialized) that goes into the manifest and the run id.
struct ExperimentConfig {
    std::string mode; // ground-state | scatter | sweep | oracle
    std::string out;
    ScatteringRun run;
    nlohmann::json echo;
};

// A sweep point: the base config with the axis overrides applied and a
// directory token like "n2_m4".
struct SweepPoint {
    std::string name;
    ExperimentConfig config;
};

// Parse + validate a config tree (from parse_toml). Unknown keys, wrong
// types and out-of-range values throw ConfigError naming the field.
ExperimentConfig load_config(const nlohmann::json& tree);

// Apply one --set override (dotted.path=value) onto a raw config tree.
void apply_override(nlohmann::json& tree, const std::string& assignment);

// Expand the [sweep] axes of a config tree into concrete points (cartesian
// product, deterministic order). A tree without [sweep] yields one point.
std::vector<SweepPoint> expand_sweep(const nlohmann::json& tree);

// FNV-1a 64-bit hex digest of the canonical config echo + version string.
std::string run_id(const nlohmann::json& echo);

extern const char* kVersion;

} // namespace waveqed::cli
