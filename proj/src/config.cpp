#include "courttrack/config.hpp"

#include <charconv>
#include <sstream>

#include "courttrack/error.hpp"

namespace courttrack {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw Error(ErrorCode::InvalidArgument, key + ": not a number: " + v);
    }
    return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw Error(ErrorCode::InvalidArgument, key + ": not an integer: " + v);
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::InvalidArgument, key + ": not a boolean: " + v);
}

Rgb to_rgb(const std::string& key, const std::string& v) {
    std::array<int, 3> c{};
    std::istringstream in(v);
    std::string part;
    std::size_t i = 0;
    while (std::getline(in, part, ',')) {
        if (i >= 3) throw Error(ErrorCode::InvalidArgument, key + ": expected r,g,b");
        c[i] = to_int<int>(key, trim(part));
        if (c[i] < 0 || c[i] > 255) throw Error(ErrorCode::InvalidArgument, key + ": channel out of range");
        ++i;
    }
    if (i != 3) throw Error(ErrorCode::InvalidArgument, key + ": expected r,g,b");
    return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
}

std::string rgb_text(Rgb c) {
    return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

const char* motion_name(MotionModel m) {
    switch (m) {
    case MotionModel::Static: return "static";
    case MotionModel::RandomWalk: return "random_walk";
    case MotionModel::CrossingPairs: return "crossing_pairs";
    }
    return "?";
}

std::string part_subset_text(const PartSet& s) {
    for (auto [name, preset] : {std::pair{"all", PartPreset::All}, std::pair{"top6", PartPreset::Top6},
                                std::pair{"top12", PartPreset::Top12}, std::pair{"top20", PartPreset::Top20}}) {
        if (preset_parts(preset) == s) return name;
    }
    std::string out;
    for (int id : s.ids()) out += (out.empty() ? "" : ",") + std::to_string(id);
    return out;
}

} // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ParseError(source, line_no, "empty key");
        if (!out.emplace(key, value).second) throw ParseError(source, line_no, "duplicate key " + key);
    }
    return out;
}

PartSet parse_part_subset(const std::string& text) {
    const std::string t = trim(text);
    if (auto preset = preset_from_name(t)) return preset_parts(*preset);
    PartSet s;
    std::istringstream in(t);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string v = trim(item);
        if (v.empty()) continue;
        int id = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), id);
        if (ec == std::errc{} && p == v.data() + v.size()) {
            s.insert(id);
        } else if (auto part = part_from_name(v)) {
            s.insert(*part);
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown part: " + v);
        }
    }
    if (s.empty()) throw Error(ErrorCode::InvalidArgument, "part subset is empty");
    return s;
}

TrackerConfig tracker_config_from(const std::map<std::string, std::string>& kv) {
    TrackerConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "alpha") {
            cfg.alpha = to_double(key, v);
        } else if (key == "neighborhood") {
            cfg.neighborhood = NeighborhoodSpec(to_int<int>(key, v));
        } else if (key == "layer") {
            cfg.layer = LayerSpec::from_name(v);
        } else if (key == "conf_threshold") {
            cfg.conf_threshold = to_double(key, v);
        } else if (key == "secondary") {
            if (v == "deep") cfg.secondary = SecondaryCost::Deep;
            else if (v == "color") cfg.secondary = SecondaryCost::Color;
            else throw Error(ErrorCode::InvalidArgument, "secondary must be deep or color");
        } else if (key == "part_subset") {
            cfg.part_subset = parse_part_subset(v);
        } else if (key == "cost_gate") {
            cfg.cost_gate = to_double(key, v);
        } else if (key == "stabilize") {
            cfg.stabilize = to_bool(key, v);
        } else if (key == "similarity") {
            if (v == "pair_set") cfg.similarity = SimilarityNormalization::PairSet;
            else if (v == "per_row") cfg.similarity = SimilarityNormalization::PerRow;
            else throw Error(ErrorCode::InvalidArgument, "similarity must be pair_set or per_row");
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown tracker key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

TrackerConfig load_tracker_config(const std::filesystem::path& path) {
    return tracker_config_from(parse_key_values(read_text_file(path), path.string()));
}

std::string format_tracker_config(const TrackerConfig& cfg) {
    std::string out;
    out += "alpha = " + format_real(cfg.alpha) + "\n";
    out += "neighborhood = " + std::to_string(cfg.neighborhood.size()) + "\n";
    out += "layer = " + cfg.layer.name + "\n";
    out += "conf_threshold = " + format_real(cfg.conf_threshold) + "\n";
    out += std::string("secondary = ") + (cfg.secondary == SecondaryCost::Deep ? "deep" : "color") + "\n";
    out += "part_subset = " + part_subset_text(cfg.part_subset) + "\n";
    out += "cost_gate = " + format_real(cfg.cost_gate) + "\n";
    out += std::string("stabilize = ") + (cfg.stabilize ? "true" : "false") + "\n";
    out += std::string("similarity = ") +
           (cfg.similarity == SimilarityNormalization::PairSet ? "pair_set" : "per_row") + "\n";
    return out;
}

SynthConfig synth_config_from(const std::map<std::string, std::string>& kv) {
    SynthConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "seed") cfg.seed = to_int<std::uint64_t>(key, v);
        else if (key == "n_players") cfg.n_players = to_int<int>(key, v);
        else if (key == "n_frames") cfg.n_frames = to_int<int>(key, v);
        else if (key == "width") cfg.width = to_int<int>(key, v);
        else if (key == "height") cfg.height = to_int<int>(key, v);
        else if (key == "player_height") cfg.player_height = to_double(key, v);
        else if (key == "motion") {
            if (v == "static") cfg.motion = MotionModel::Static;
            else if (v == "random_walk") cfg.motion = MotionModel::RandomWalk;
            else if (v == "crossing_pairs") cfg.motion = MotionModel::CrossingPairs;
            else throw Error(ErrorCode::InvalidArgument, "motion must be static, random_walk or crossing_pairs");
        }
        else if (key == "walk_sigma") cfg.walk_sigma = to_double(key, v);
        else if (key == "cross_period") cfg.cross_period = to_int<int>(key, v);
        else if (key == "cross_frames") cfg.cross_frames = to_int<int>(key, v);
        else if (key == "cross_separation") cfg.cross_separation = to_double(key, v);
        else if (key == "dropout_prob") cfg.dropout_prob = to_double(key, v);
        else if (key == "pan_per_frame") cfg.pan_per_frame = to_double(key, v);
        else if (key == "feature_dim") cfg.feature_dim = to_int<int>(key, v);
        else if (key == "feature_sigma") cfg.feature_sigma = to_double(key, v);
        else if (key == "layer") cfg.layer = LayerSpec::from_name(v);
        else if (key == "jersey_a") cfg.jersey_colors[0] = to_rgb(key, v);
        else if (key == "jersey_b") cfg.jersey_colors[1] = to_rgb(key, v);
        else if (key == "court_color") cfg.court_color = to_rgb(key, v);
        else if (key == "render_images") cfg.render_images = to_bool(key, v);
        else throw Error(ErrorCode::InvalidArgument, "unknown synth key: " + key);
    }
    cfg.validate();
    return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    return synth_config_from(parse_key_values(read_text_file(path), path.string()));
}

std::string format_synth_config(const SynthConfig& cfg) {
    std::string out;
    auto line = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    line("seed", std::to_string(cfg.seed));
    line("n_players", std::to_string(cfg.n_players));
    line("n_frames", std::to_string(cfg.n_frames));
    line("width", std::to_string(cfg.width));
    line("height", std::to_string(cfg.height));
    line("player_height", format_real(cfg.player_height));
    line("motion", motion_name(cfg.motion));
    line("walk_sigma", format_real(cfg.walk_sigma));
    line("cross_period", std::to_string(cfg.cross_period));
    line("cross_frames", std::to_string(cfg.cross_frames));
    line("cross_separation", format_real(cfg.cross_separation));
    line("dropout_prob", format_real(cfg.dropout_prob));
    line("pan_per_frame", format_real(cfg.pan_per_frame));
    line("feature_dim", std::to_string(cfg.feature_dim));
    line("feature_sigma", format_real(cfg.feature_sigma));
    line("layer", cfg.layer.name);
    line("jersey_a", rgb_text(cfg.jersey_colors[0]));
    line("jersey_b", rgb_text(cfg.jersey_colors[1]));
    line("court_color", rgb_text(cfg.court_color));
    line("render_images", cfg.render_images ? "true" : "false");
    return out;
}

} // namespace courttrack
