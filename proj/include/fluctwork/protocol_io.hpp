#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fluctwork/process.hpp"

namespace fluctwork {

// Protocol files are JSON:
//   { "beta": 1.0,
//     "initial_levels": [0, 1],
//     "steps": [ {"quench": [0, 2]}, "thermalize", {"quasistatic": [0, 1]} ] }
// Errors carry the line of the offending step.

Protocol parse_protocol(std::string_view text);
Protocol load_protocol(const std::filesystem::path& path);

/// One step per line; numbers use shortest round-trip formatting.
std::string protocol_to_json(const Protocol& p);

}  // namespace fluctwork
