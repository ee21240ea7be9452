#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "a2lc/run_config.hpp"

namespace a2lc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key-value text with [section] headers; '#' starts a comment.
/// Sections and keys are kept sorted so serialization is canonical.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

ConfigSections parse_config_text(const std::string& text);
ConfigSections parse_config_file(const std::string& path);

/// Builds a RunConfig, rejecting unknown sections/keys and out-of-range
/// values with the offending key named.
RunConfig make_run_config(const ConfigSections& sections);

/// Canonical echo of a RunConfig: every key present, values formatted with
/// the shortest round-trip representation.
ConfigSections normalize_config(const RunConfig& config);

std::string config_to_text(const ConfigSections& sections);

/// FNV-1a 64 over the canonical text, hex encoded.
std::string config_hash_hex(const RunConfig& config);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace a2lc
