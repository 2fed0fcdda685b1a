#pragma once

#include <string>

#include <json.hpp>

namespace waveqed::cli {

// Parse a TOML-subset document into a json tree. Supported: [table] and
// [[array-of-tables]] headers with dotted paths, key = value with dotted
// keys, strings with the usual escapes, integers, floats, booleans, and
// single-line arrays of scalars. '#' starts a comment outside strings.
// Throws ConfigError with a line number on anything malformed.
nlohmann::json parse_toml(const std::string& text);

// Parse a single TOML scalar or array literal (used for --set overrides).
nlohmann::json parse_toml_value(const std::string& text);

} // namespace waveqed::cli
