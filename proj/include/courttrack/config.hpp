#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "courttrack/costs.hpp"
#include "courttrack/synth.hpp"

namespace courttrack {

/// `key = value` lines; `#` starts a comment. Throws ParseError on malformed
/// lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source);

/// Keys: alpha, neighborhood, layer, conf_threshold, secondary, part_subset,
/// cost_gate, stabilize, similarity. Unknown keys are rejected.
TrackerConfig tracker_config_from(const std::map<std::string, std::string>& kv);
TrackerConfig load_tracker_config(const std::filesystem::path& path);
std::string format_tracker_config(const TrackerConfig& cfg);

SynthConfig synth_config_from(const std::map<std::string, std::string>& kv);
SynthConfig load_synth_config(const std::filesystem::path& path);
std::string format_synth_config(const SynthConfig& cfg);

PartSet parse_part_subset(const std::string& text);

} // namespace courttrack
