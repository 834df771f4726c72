#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace specseg {

// Reader for the TOML subset used by configuration files: [table] and
// [dotted.table] headers, bare/quoted/dotted keys, basic and literal strings,
// integers, floats, booleans and single-line arrays. Inline tables, multi-line
// strings and dates are rejected. Errors throw InvalidConfig with the line.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);

}  // namespace specseg
