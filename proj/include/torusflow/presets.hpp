#pragma once

#include <string>
#include <vector>

#include "torusflow/flow.hpp"

namespace torusflow {

/// Named flow presets, so every documented run is reproducible by name.
/// "linear:a,b" parses its slopes ("phi" is accepted for the golden
/// mean); an optional "preset:" prefix is stripped. Unknown names throw
/// std::invalid_argument (a configuration error, not a construction
/// failure).
FieldPtr make_preset(const std::string& name);

std::vector<std::string> preset_names();

} // namespace torusflow
