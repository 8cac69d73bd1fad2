#include "courttrack/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "courttrack/error.hpp"

namespace courttrack {

using nlohmann::json;

std::string format_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "cannot format real");
    return std::string(buf, end);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path() && !fs::exists(path.parent_path())) {
        throw Error(ErrorCode::IoError, "directory does not exist: " + path.parent_path().string());
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    os << text;
    if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

/// Calls `fn(line, line_no)` for every non-blank line.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    std::istringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        fn(line, line_no);
    }
}

json parse_json(const std::string& line, const std::string& source, std::size_t line_no) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) throw ParseError(source, line_no, "expected a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ParseError(source, line_no, e.what());
    }
}

int get_int(const json& j, const char* key, const std::string& source, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
        throw ParseError(source, line_no, std::string("missing or non-integer '") + key + "'");
    }
    return it->get<int>();
}

double get_real(const json& j, const std::string& source, std::size_t line_no) {
    if (!j.is_number()) throw ParseError(source, line_no, "expected a number");
    return j.get<double>();
}

json real_json(double v) { return json(v); }

} // namespace

Detection parse_detection_line(const std::string& line, const std::string& source, std::size_t line_no) {
    const json j = parse_json(line, source, line_no);
    const int frame = get_int(j, "frame", source, line_no);
    const int det = get_int(j, "det", source, line_no);
    auto kp_it = j.find("kp");
    if (kp_it == j.end() || !kp_it->is_array() || kp_it->size() != kNumParts) {
        throw ParseError(source, line_no, "'kp' must be an array of 25 entries");
    }
    Skeleton sk = empty_skeleton();
    for (std::size_t i = 0; i < sk.size(); ++i) {
        const json& e = (*kp_it)[i];
        if (e.is_null()) continue;
        if (!e.is_array() || e.size() != 3) {
            throw ParseError(source, line_no, "keypoint " + std::to_string(i) + " must be [x,y,conf] or null");
        }
        sk[i].x = get_real(e[0], source, line_no);
        sk[i].y = get_real(e[1], source, line_no);
        sk[i].confidence = get_real(e[2], source, line_no);
        sk[i].present = true;
    }
    std::optional<std::string> feat_ref;
    if (auto it = j.find("feat_ref"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError(source, line_no, "'feat_ref' must be a string");
        feat_ref = it->get<std::string>();
    }
    try {
        return Detection::create(frame, det, sk, nullptr, feat_ref);
    } catch (const Error& e) {
        throw ParseError(source, line_no, e.what());
    }
}

std::string format_detection_line(const Detection& d) {
    json kp = json::array();
    for (const Keypoint& k : d.keypoints) {
        if (!k.present) {
            kp.push_back(nullptr);
        } else {
            kp.push_back(json::array({real_json(k.x), real_json(k.y), real_json(k.confidence)}));
        }
    }
    json j = json::object();
    j["frame"] = d.frame_id;
    j["det"] = d.detection_id;
    j["kp"] = std::move(kp);
    if (d.feat_ref) j["feat_ref"] = *d.feat_ref;
    return j.dump();
}

Sequence load_sequence(const SequencePaths& paths) {
    const std::string det_source = paths.detections.string();
    std::map<int, SequenceFrame> frames;

    if (paths.frames) {
        const std::string source = paths.frames->string();
        for_each_line(read_text_file(*paths.frames), [&](const std::string& line, std::size_t line_no) {
            const json j = parse_json(line, source, line_no);
            FrameMeta meta;
            meta.frame_id = get_int(j, "frame", source, line_no);
            meta.width = get_int(j, "w", source, line_no);
            meta.height = get_int(j, "h", source, line_no);
            if (meta.width <= 0 || meta.height <= 0) throw ParseError(source, line_no, "frame size must be positive");
            if (auto it = j.find("image"); it != j.end() && !it->is_null()) {
                if (!it->is_string()) throw ParseError(source, line_no, "'image' must be a string");
                fs::path img = it->get<std::string>();
                if (img.is_relative()) img = paths.frames->parent_path() / img;
                meta.image_path = img.string();
            }
            if (!frames.emplace(meta.frame_id, SequenceFrame{meta, {}}).second) {
                throw ParseError(source, line_no, "duplicate frame " + std::to_string(meta.frame_id));
            }
        });
    }

    const fs::path feature_root = paths.features_dir ? *paths.features_dir : paths.detections.parent_path();
    std::map<std::string, std::shared_ptr<const PartFeatureSet>> feature_cache;

    for_each_line(read_text_file(paths.detections), [&](const std::string& line, std::size_t line_no) {
        Detection d = parse_detection_line(line, det_source, line_no);
        auto it = frames.find(d.frame_id);
        if (it == frames.end()) {
            if (paths.frames) {
                throw ParseError(det_source, line_no, "frame " + std::to_string(d.frame_id) + " has no metadata");
            }
            FrameMeta meta{d.frame_id, kDefaultFrameWidth, kDefaultFrameHeight, std::nullopt, {}};
            it = frames.emplace(d.frame_id, SequenceFrame{meta, {}}).first;
        }
        for (const auto& other : it->second.detections) {
            if (other.detection_id == d.detection_id) {
                throw ParseError(det_source, line_no, "duplicate detection id " + std::to_string(d.detection_id));
            }
        }
        if (d.feat_ref) {
            const fs::path p = feature_root / *d.feat_ref;
            auto [cached, inserted] = feature_cache.try_emplace(p.string());
            if (inserted) cached->second = std::make_shared<const PartFeatureSet>(read_pfv1(p));
            d.features = cached->second;
        }
        it->second.detections.push_back(std::move(d));
    });

    Sequence seq;
    for (auto& [id, f] : frames) seq.frames.push_back(std::move(f));
    return seq;
}

void save_sequence(const Sequence& seq, const SequencePaths& paths) {
    std::string det_text;
    std::string frame_text;
    const fs::path feature_root = paths.features_dir ? *paths.features_dir : paths.detections.parent_path();
    for (const auto& f : seq.frames) {
        json fj = json::object();
        fj["frame"] = f.meta.frame_id;
        fj["w"] = f.meta.width;
        fj["h"] = f.meta.height;
        if (f.meta.image_path) {
            fs::path img = *f.meta.image_path;
            if (paths.frames && img.is_absolute()) {
                img = img.lexically_relative(fs::absolute(*paths.frames).parent_path());
            }
            fj["image"] = img.generic_string();
        }
        frame_text += fj.dump() + "\n";
        for (const auto& d : f.detections) {
            det_text += format_detection_line(d) + "\n";
            if (d.feat_ref && d.features) {
                const fs::path p = feature_root / *d.feat_ref;
                if (p.has_parent_path()) fs::create_directories(p.parent_path());
                write_pfv1(p, *d.features);
            }
        }
    }
    write_text_file(paths.detections, det_text);
    if (paths.frames) write_text_file(*paths.frames, frame_text);
}

void save_tracks(const fs::path& path, const std::vector<TrackRow>& rows) {
    std::string out = "frame,track_id,x_min,y_min,width,height\n";
    for (const auto& r : rows) {
        out += std::to_string(r.frame_id) + "," + std::to_string(r.track_id) + "," + format_real(r.x_min) + "," +
               format_real(r.y_min) + "," + format_real(r.width) + "," + format_real(r.height) + "\n";
    }
    write_text_file(path, out);
}

namespace {

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line_no) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(source, line_no, "bad number '" + std::string(field) + "'");
    }
    return value;
}

} // namespace

std::vector<TrackRow> load_tracks(const fs::path& path) {
    const std::string source = path.string();
    std::vector<TrackRow> rows;
    for_each_line(read_text_file(path), [&](const std::string& line, std::size_t line_no) {
        if (line_no == 1 && line.rfind("frame", 0) == 0) return;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() < 6) throw ParseError(source, line_no, "expected 6 comma-separated fields");
        TrackRow r;
        r.frame_id = parse_number<int>(fields[0], source, line_no);
        r.track_id = parse_number<int>(fields[1], source, line_no);
        r.x_min = parse_number<double>(fields[2], source, line_no);
        r.y_min = parse_number<double>(fields[3], source, line_no);
        r.width = parse_number<double>(fields[4], source, line_no);
        r.height = parse_number<double>(fields[5], source, line_no);
        if (r.width < 0 || r.height < 0) throw ParseError(source, line_no, "negative box size");
        rows.push_back(r);
    });
    return rows;
}

void save_homographies(const fs::path& path, const std::vector<HomographyRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        json j = json::object();
        j["frame_from"] = r.frame_from;
        j["frame_to"] = r.frame_to;
        json h = json::array();
        const auto& m = r.h.matrix();
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) h.push_back(m(i, k));
        }
        j["H"] = std::move(h);
        out += j.dump() + "\n";
    }
    write_text_file(path, out);
}

std::vector<HomographyRecord> load_homographies(const fs::path& path) {
    const std::string source = path.string();
    std::vector<HomographyRecord> out;
    for_each_line(read_text_file(path), [&](const std::string& line, std::size_t line_no) {
        const json j = parse_json(line, source, line_no);
        HomographyRecord r;
        r.frame_from = get_int(j, "frame_from", source, line_no);
        r.frame_to = get_int(j, "frame_to", source, line_no);
        auto it = j.find("H");
        if (it == j.end() || !it->is_array() || it->size() != 9) {
            throw ParseError(source, line_no, "'H' must hold 9 reals");
        }
        Eigen::Matrix3d m;
        for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = get_real((*it)[static_cast<std::size_t>(i)], source, line_no);
        try {
            r.h = Homography(m);
        } catch (const Error& e) {
            throw ParseError(source, line_no, e.what());
        }
        out.push_back(r);
    });
    return out;
}

std::vector<Homography> pair_homographies_for(const Sequence& seq, const std::vector<HomographyRecord>& records) {
    std::map<std::pair<int, int>, Homography> by_pair;
    for (const auto& r : records) by_pair.insert_or_assign({r.frame_from, r.frame_to}, r.h);
    std::vector<Homography> out;
    for (std::size_t i = 1; i < seq.frames.size(); ++i) {
        const int from = seq.frames[i - 1].meta.frame_id;
        const int to = seq.frames[i].meta.frame_id;
        auto it = by_pair.find({from, to});
        if (it == by_pair.end()) {
            throw Error(ErrorCode::InvalidArgument,
                        "no homography for frames " + std::to_string(from) + " -> " + std::to_string(to));
        }
        out.push_back(it->second);
    }
    return out;
}

} // namespace courttrack
