#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "brw/offspring_model.hpp"

namespace brw {

/// Parses a model document:
///   {"type":"finite","atoms":[{"p":0.2,"x":[]},{"p":0.8,"x":[0,1]}]}
///   {"type":"log_divergent","a":1.5,"n_max":1000000}
/// Structural problems throw Error(parse); messages name the atom index.
/// The result is not yet validated.
LawSpec parse_law_json(std::string_view text);

/// Reads and parses a model file. Throws Error(io) if unreadable.
LawSpec load_law_file(const std::filesystem::path& path);

/// Inverse of parse_law_json (shortest round-trip number formatting).
std::string law_to_json(const LawSpec& spec);

}  // namespace brw
