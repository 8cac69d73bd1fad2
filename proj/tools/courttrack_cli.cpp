#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "courttrack/ablation.hpp"
#include "courttrack/config.hpp"
#include "courttrack/court.hpp"
#include "courttrack/error.hpp"
#include "courttrack/homography.hpp"
#include "courttrack/io.hpp"
#include "courttrack/matcher.hpp"
#include "courttrack/metrics.hpp"
#include "courttrack/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace courttrack;

namespace {

struct Globals {
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

template <class T>
std::vector<T> parse_list(const std::string& text, T (*convert)(const std::string&)) {
    std::vector<T> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(convert(item));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty list: " + text);
    return out;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error(ErrorCode::InvalidArgument, "not a number: " + s);
    return v;
}

int to_int(const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw Error(ErrorCode::InvalidArgument, "not an integer: " + s);
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw Error(ErrorCode::InvalidArgument, "not a boolean: " + s);
}

LayerSpec to_layer(const std::string& s) { return LayerSpec::from_name(s); }

void write_or_print(const std::optional<fs::path>& path, const std::string& text) {
    if (path) {
        write_text_file(*path, text);
    } else {
        std::cout << text;
    }
}

// ---- synth ----

struct SynthArgs {
    std::optional<fs::path> config;
    fs::path out;
    std::optional<std::uint64_t> seed;
};

void run_synth(const SynthArgs& a, const Globals& g) {
    SynthConfig cfg = a.config ? load_synth_config(*a.config) : SynthConfig{};
    const auto seed = a.seed ? a.seed : g.seed;
    if (!seed) throw Error(ErrorCode::InvalidArgument, "synth needs an explicit --seed");
    cfg.seed = *seed;
    const SynthOutput out = generate(cfg);
    write_fixture(out, cfg, a.out);
    std::cerr << "wrote " << out.sequence.frames.size() << " frames, " << out.sequence.detection_count()
              << " detections to " << a.out.string() << "\n";
}

// ---- track ----

struct TrackArgs {
    fs::path detections;
    std::optional<fs::path> frames;
    std::optional<fs::path> features;
    std::optional<fs::path> config;
    std::optional<fs::path> homographies;
    fs::path out;
};

void run_track(const TrackArgs& a) {
    const TrackerConfig cfg = a.config ? load_tracker_config(*a.config) : TrackerConfig{};
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
    SequencePaths paths{a.detections, a.frames, a.features};
    const Sequence seq = load_sequence(paths);
    std::vector<Homography> pairs;
    if (cfg.stabilize) {
        if (!a.homographies) throw Error(ErrorCode::InvalidArgument, "stabilize = true needs --homographies");
        pairs = pair_homographies_for(seq, load_homographies(*a.homographies));
    }
    const auto assignments = track_sequence(seq, cfg, pairs);
    save_tracks(a.out, to_track_rows(assignments));
}

// ---- eval ----

struct EvalArgs {
    std::vector<fs::path> gt;
    std::vector<fs::path> tracks;
    double iou_gate = 0.5;
    std::string report = "table";
    std::optional<fs::path> out;
};

json metrics_json(const MetricsAccumulator& acc, const DetectionScores& det) {
    json j;
    j["mota"] = acc.ground_truth > 0 ? json(mota(acc)) : json(nullptr);
    j["motp"] = acc.correspondences > 0 ? json(motp(acc)) : json(nullptr);
    j["fp"] = acc.false_positives;
    j["m"] = acc.misses;
    j["mm"] = acc.mismatches;
    j["g"] = acc.ground_truth;
    j["precision"] = det.precision;
    j["recall"] = det.recall;
    j["f1"] = det.f1;
    return j;
}

std::string metrics_line(const std::string& name, const MetricsAccumulator& acc, const DetectionScores& det) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-24s %-9s %-9s %-6lld %-6lld %-6lld %-6lld %-7.4f %-7.4f %.4f\n",
                  name.c_str(), acc.ground_truth > 0 ? std::to_string(mota(acc)).substr(0, 8).c_str() : "n/a",
                  acc.correspondences > 0 ? std::to_string(motp(acc)).substr(0, 8).c_str() : "n/a",
                  acc.false_positives, acc.misses, acc.mismatches, acc.ground_truth, det.precision, det.recall,
                  det.f1);
    return buf;
}

void run_eval(const EvalArgs& a) {
    if (a.gt.size() != a.tracks.size()) {
        throw Error(ErrorCode::InvalidArgument, "--gt and --tracks must be given the same number of times");
    }
    if (a.report != "table" && a.report != "json") throw Error(ErrorCode::InvalidArgument, "--report is json or table");
    MetricsAccumulator pooled;
    DetectionScores pooled_det;
    json per_seq = json::array();
    std::string table = "sequence                 MOTA      MOTP      FP     M      MM     G      P       R       F1\n";
    for (std::size_t i = 0; i < a.gt.size(); ++i) {
        const auto gt = load_tracks(a.gt[i]);
        const auto hyp = load_tracks(a.tracks[i]);
        const MetricsAccumulator acc = evaluate_tracks(gt, hyp, a.iou_gate);
        const DetectionScores det = detection_prf(gt, hyp, a.iou_gate);
        pooled += acc;
        pooled_det.true_positives += det.true_positives;
        pooled_det.false_positives += det.false_positives;
        pooled_det.false_negatives += det.false_negatives;
        json j = metrics_json(acc, det);
        j["tracks"] = a.tracks[i].string();
        per_seq.push_back(std::move(j));
        table += metrics_line(a.tracks[i].filename().string(), acc, det);
    }
    const auto tp = static_cast<double>(pooled_det.true_positives);
    const auto p_den = tp + static_cast<double>(pooled_det.false_positives);
    const auto r_den = tp + static_cast<double>(pooled_det.false_negatives);
    pooled_det.precision = p_den > 0 ? tp / p_den : 0.0;
    pooled_det.recall = r_den > 0 ? tp / r_den : 0.0;
    const double pr = pooled_det.precision + pooled_det.recall;
    pooled_det.f1 = pr > 0 ? 2 * pooled_det.precision * pooled_det.recall / pr : 0.0;

    if (a.report == "json") {
        json out;
        out["sequences"] = per_seq;
        out["pooled"] = metrics_json(pooled, pooled_det);
        write_or_print(a.out, out.dump(2) + "\n");
    } else {
        if (a.gt.size() > 1) table += metrics_line("pooled", pooled, pooled_det);
        write_or_print(a.out, table);
    }
}

// ---- court ----

struct CourtArgs {
    fs::path image;
    HsvFilter filter;
    double offset = 25.0;
    double step = 12.0;
    double angle_tol_deg = 2.0;
    double border_tol = 10.0;
    std::optional<fs::path> segments;
    std::optional<fs::path> out;
    std::optional<fs::path> overlay;
};

std::vector<LineSegment> load_segments(const fs::path& path) {
    std::vector<LineSegment> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({{j.at("x0").get<double>(), j.at("y0").get<double>()},
                           {j.at("x1").get<double>(), j.at("y1").get<double>()}});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return out;
}

json line_json(const SweepResult& r) {
    json j;
    j["theta"] = r.line.theta;
    j["a"] = {r.line.a.x, r.line.a.y};
    j["b"] = {r.line.b.x, r.line.b.y};
    j["difference"] = r.difference;
    j["low_confidence"] = r.low_confidence;
    return j;
}

void run_court(const CourtArgs& a) {
    const cv::Mat img = cv::imread(a.image.string(), cv::IMREAD_COLOR);
    if (img.empty()) throw Error(ErrorCode::MissingImage, "cannot read " + a.image.string());
    FrameMeta frame;
    frame.width = img.cols;
    frame.height = img.rows;

    const auto segments = a.segments ? load_segments(*a.segments) : detect_segments(img);
    const double angle_tol = a.angle_tol_deg * std::numbers::pi / 180.0;
    const auto lines = join_segments(segments, angle_tol, a.border_tol, frame);
    const auto dominant = dominant_orientations(lines);
    if (!dominant.sideline) throw Error(ErrorCode::NoSidelineCandidate, "no line crosses both lateral borders");

    const cv::Mat mask = hsv_mask(img, a.filter);
    SweepOptions top_opts{a.offset, a.step, SweepPolarity::FilterAfter, false};
    SweepOptions bottom_opts{a.offset, a.step, SweepPolarity::FilterBefore, true};
    const SweepResult top = sweep_mask(mask, *dominant.sideline, BoundaryKind::Sideline, top_opts);
    const SweepResult bottom = sweep_mask(mask, *dominant.sideline, BoundaryKind::Sideline, bottom_opts);
    std::optional<SweepResult> base;
    if (dominant.baseline) {
        base = sweep_mask(mask, *dominant.baseline, BoundaryKind::Baseline, {a.offset, a.step});
        if (base->low_confidence) base.reset();
    }
    const CourtPolygon poly = court_polygon(top.line, bottom.line,
                                            base ? std::optional<BoundaryLine>(base->line) : std::nullopt, frame);

    json out;
    out["width"] = frame.width;
    out["height"] = frame.height;
    out["segments"] = segments.size();
    out["top_sideline"] = line_json(top);
    out["bottom_sideline"] = line_json(bottom);
    out["baseline"] = base ? line_json(*base) : json(nullptr);
    json verts = json::array();
    for (const auto& v : poly.vertices) verts.push_back({v.x, v.y});
    out["vertices"] = verts;
    write_or_print(a.out, out.dump(2) + "\n");

    if (a.overlay) {
        cv::Mat vis = img.clone();
        std::vector<cv::Point> pts;
        for (const auto& v : poly.vertices) pts.emplace_back(cvRound(v.x), cvRound(v.y));
        cv::polylines(vis, pts, true, cv::Scalar(0, 0, 255), 3);
        for (const auto& s : segments) {
            cv::line(vis, cv::Point(cvRound(s.p0.x), cvRound(s.p0.y)), cv::Point(cvRound(s.p1.x), cvRound(s.p1.y)),
                     cv::Scalar(0, 255, 255), 1);
        }
        if (!cv::imwrite(a.overlay->string(), vis)) {
            throw Error(ErrorCode::IoError, "cannot write " + a.overlay->string());
        }
    }
}

// ---- stabilize ----

struct StabilizeArgs {
    fs::path detections;
    std::optional<fs::path> frames;
    std::optional<fs::path> homographies;
    std::optional<fs::path> correspondences;
    std::optional<fs::path> homographies_out;
    double inlier_tol = 2.0;
    int iterations = 500;
    fs::path out;
};

std::vector<HomographyRecord> estimate_from_correspondences(const fs::path& path, const StabilizeArgs& a,
                                                            std::uint64_t seed) {
    std::vector<HomographyRecord> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<Correspondence> pairs;
        HomographyRecord rec{0, 0, Homography::identity()};
        try {
            const auto j = nlohmann::json::parse(line);
            rec.frame_from = j.at("frame_from").get<int>();
            rec.frame_to = j.at("frame_to").get<int>();
            for (const auto& p : j.at("pairs")) {
                if (p.size() != 4) throw ParseError(path.string(), line_no, "pair needs [sx, sy, dx, dy]");
                pairs.push_back({{p[0].get<double>(), p[1].get<double>()}, {p[2].get<double>(), p[3].get<double>()}});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        const RansacResult r = estimate_ransac(pairs, {a.inlier_tol, a.iterations, seed});
        if (!r.reliable) {
            std::cerr << "warning: frames " << rec.frame_from << "->" << rec.frame_to << ": only " << r.inlier_count
                      << " inliers\n";
        }
        rec.h = r.homography;
        out.push_back(rec);
    }
    return out;
}

void run_stabilize(const StabilizeArgs& a, const Globals& g) {
    if (a.homographies.has_value() == a.correspondences.has_value()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --homographies or --correspondences");
    }
    const Sequence seq = load_sequence({a.detections, a.frames, std::nullopt});
    const auto records = a.homographies ? load_homographies(*a.homographies)
                                        : estimate_from_correspondences(*a.correspondences, a, g.seed.value_or(0));
    if (a.homographies_out) save_homographies(*a.homographies_out, records);
    const StabilizedSequence st = stabilize(seq, pair_homographies_for(seq, records));
    std::string text;
    for (const auto& f : st.stabilized.frames) {
        for (const auto& d : f.detections) text += format_detection_line(d) + "\n";
    }
    write_text_file(a.out, text);
}

// ---- ablate ----

struct AblateArgs {
    std::vector<fs::path> datasets;
    std::optional<fs::path> config;
    std::optional<std::string> alphas;
    std::string neighborhoods = "1,2,3";
    std::string layers = "b4c2";
    std::string stabilize = "false";
    double iou_gate = 0.5;
    std::string report = "table";
    std::optional<fs::path> out;
};

void run_ablate(const AblateArgs& a, const Globals& g) {
    if (a.report != "table" && a.report != "json") throw Error(ErrorCode::InvalidArgument, "--report is json or table");
    AblationSpec spec;
    if (a.alphas) spec.alphas = parse_list<double>(*a.alphas, to_double);
    spec.neighborhoods = parse_list<int>(a.neighborhoods, to_int);
    spec.layers = parse_list<LayerSpec>(a.layers, to_layer);
    spec.stabilize = parse_list<bool>(a.stabilize, to_bool);
    spec.iou_gate = a.iou_gate;
    spec.threads = g.threads;
    const TrackerConfig base = a.config ? load_tracker_config(*a.config) : TrackerConfig{};

    std::vector<FixtureData> data;
    for (const auto& d : a.datasets) data.push_back(load_fixture(d));
    const AblationReport report = run_ablation(spec, base, data);
    std::cout << (a.report == "json" ? report.to_json() : report.to_table());
    if (a.out) write_text_file(*a.out, report.to_json());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tracking-by-detection for broadcast basketball video"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threads", g.threads, "Worker threads for parallel stages")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Seed for every random choice");

    SynthArgs synth;
    auto* sc = app.add_subcommand("synth", "Generate a synthetic fixture directory");
    sc->add_option("--config", synth.config, "key = value synth config")->check(CLI::ExistingFile);
    sc->add_option("--out", synth.out, "Output directory")->required();
    sc->add_option("--seed", synth.seed, "Generator seed; takes precedence over the global --seed and the config");

    TrackArgs track;
    auto* tc = app.add_subcommand("track", "Assign track ids to a detection sequence");
    tc->add_option("--detections", track.detections)->required()->check(CLI::ExistingFile);
    tc->add_option("--frames", track.frames)->check(CLI::ExistingFile);
    tc->add_option("--features", track.features, "Directory feat_ref paths are relative to");
    tc->add_option("--config", track.config)->check(CLI::ExistingFile);
    tc->add_option("--homographies", track.homographies)->check(CLI::ExistingFile);
    tc->add_option("--out", track.out, "tracks.csv")->required();

    EvalArgs eval;
    auto* ec = app.add_subcommand("eval", "CLEAR-MOT and detection scores against ground truth");
    ec->add_option("--gt", eval.gt)->required()->check(CLI::ExistingFile);
    ec->add_option("--tracks", eval.tracks)->required()->check(CLI::ExistingFile);
    ec->add_option("--iou-gate", eval.iou_gate)->check(CLI::Range(0.0, 1.0));
    ec->add_option("--report", eval.report, "json or table");
    ec->add_option("--out", eval.out);

    CourtArgs court;
    auto* cc = app.add_subcommand("court", "Detect court boundaries in one frame");
    cc->add_option("--image", court.image)->required()->check(CLI::ExistingFile);
    cc->add_option("--hue-min", court.filter.hue_min);
    cc->add_option("--hue-max", court.filter.hue_max);
    cc->add_option("--sat-min", court.filter.sat_min);
    cc->add_option("--val-min", court.filter.val_min);
    cc->add_option("--offset", court.offset);
    cc->add_option("--step", court.step);
    cc->add_option("--angle-tol", court.angle_tol_deg, "Segment joining tolerance in degrees");
    cc->add_option("--border-tol", court.border_tol, "Segment joining tolerance in px");
    cc->add_option("--segments", court.segments, "Precomputed segments, JSONL {x0,y0,x1,y1}")
        ->check(CLI::ExistingFile);
    cc->add_option("--out", court.out, "Polygon JSON (default stdout)");
    cc->add_option("--overlay", court.overlay, "Debug image");

    StabilizeArgs stab;
    auto* stc = app.add_subcommand("stabilize", "Map detections into frame-0 coordinates");
    stc->add_option("--detections", stab.detections)->required()->check(CLI::ExistingFile);
    stc->add_option("--frames", stab.frames)->check(CLI::ExistingFile);
    stc->add_option("--homographies", stab.homographies)->check(CLI::ExistingFile);
    stc->add_option("--correspondences", stab.correspondences, "JSONL {frame_from, frame_to, pairs}")
        ->check(CLI::ExistingFile);
    stc->add_option("--homographies-out", stab.homographies_out);
    stc->add_option("--inlier-tol", stab.inlier_tol);
    stc->add_option("--iterations", stab.iterations);
    stc->add_option("--out", stab.out)->required();

    AblateArgs abl;
    auto* ac = app.add_subcommand("ablate", "Grid of tracker configurations over fixture directories");
    ac->add_option("--dataset", abl.datasets)->required()->check(CLI::ExistingDirectory);
    ac->add_option("--config", abl.config, "Base tracker config")->check(CLI::ExistingFile);
    ac->add_option("--alphas", abl.alphas, "Comma list; default 0 to 1 in 0.05 steps");
    ac->add_option("--neighborhoods", abl.neighborhoods);
    ac->add_option("--layers", abl.layers);
    ac->add_option("--stabilize", abl.stabilize, "Comma list of true/false");
    ac->add_option("--iou-gate", abl.iou_gate);
    ac->add_option("--report", abl.report, "json or table");
    ac->add_option("--out", abl.out, "JSON report file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sc) run_synth(synth, g);
        if (*tc) run_track(track);
        if (*ec) run_eval(eval);
        if (*cc) run_court(court);
        if (*stc) run_stabilize(stab, g);
        if (*ac) run_ablate(abl, g);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
