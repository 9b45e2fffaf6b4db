#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "defidx/config.hpp"

namespace defidx {

inline constexpr int kConfigVersion = 1;

/// Parses the JSON configuration document (schema in docs/config.md).
/// Unknown keys, missing required keys and a version mismatch are hard
/// errors: Error(ParseError) or Error(InvalidConfig).
SingularityConfig parse_config(std::string_view text);

/// Canonical JSON form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SingularityConfig& config);

SingularityConfig load_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace defidx
