#pragma once

// Run configuration: flat `key = value` lines with optional [section]
// headers (`pll.kp = 60` and `[pll]` + `kp = 60` are equivalent), `#`
// comments, or the same keys as nested JSON objects. Unknown keys are
// errors.

#include "tsslab/assessment.hpp"
#include "tsslab/staged_sim.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tsslab {

struct RunConfig {
    std::string preset{kPaperAppendixPreset};
    Scenario scenario;
    MethodSet methods = MethodSet::all();
    std::vector<SweepAxis> sweep;

    bool operator==(const RunConfig&) const = default;
};

/// Parses config text. JSON when the first non-blank character is '{'.
/// `preset` is applied before any parameter key regardless of position;
/// `preset_override`, when non-empty, replaces the preset named in the text.
/// Throws ConfigError on syntax errors, unknown keys and malformed values.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>",
                       std::string_view preset_override = {});

RunConfig load_config(const std::filesystem::path& path, std::string_view preset_override = {});

/// Applies the keys of a preset file (parameter sections only) onto p.
void apply_param_text(SystemParams& p, std::string_view text, std::string_view origin);

/// Every key with round-trip precision; parse_config(write_config(c)) == c.
std::string write_config(const RunConfig& c);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

} // namespace tsslab
