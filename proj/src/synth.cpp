#include "courttrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "courttrack/config.hpp"
#include "courttrack/error.hpp"

namespace courttrack {

void SynthConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
    if (n_players < 1) fail("n_players must be >= 1");
    if (n_frames < 1) fail("n_frames must be >= 1");
    if (width <= 0 || height <= 0) fail("frame size must be positive");
    if (!(player_height > 0.0)) fail("player_height must be positive");
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) fail("dropout_prob must lie in [0,1]");
    if (walk_sigma < 0.0 || feature_sigma < 0.0) fail("noise levels must be non-negative");
    if (feature_dim < 1) fail("feature_dim must be >= 1");
    if (cross_period < 1 || cross_frames < 1 || cross_frames > cross_period) {
        fail("crossing needs 1 <= cross_frames <= cross_period");
    }
}

namespace {

// Offsets from the feet point in units of player height; y grows downwards.
constexpr std::array<std::array<double, 2>, kNumParts> kTemplate = {{
    {0.00, -0.94},  // Nose
    {0.00, -0.84},  // Chest
    {-0.10, -0.83}, // R-Shoulder
    {-0.13, -0.68}, // R-Elbow
    {-0.14, -0.55}, // R-Wrist
    {0.10, -0.83},  // L-Shoulder
    {0.13, -0.68},  // L-Elbow
    {0.14, -0.55},  // L-Wrist
    {0.00, -0.50},  // Mid-Hip
    {-0.06, -0.50}, // R-Hip
    {-0.07, -0.28}, // R-Knee
    {-0.07, -0.07}, // R-Ankle
    {0.06, -0.50},  // L-Hip
    {0.07, -0.28},  // L-Knee
    {0.07, -0.07},  // L-Ankle
    {-0.02, -0.955},// R-Eye
    {0.02, -0.955}, // L-Eye
    {-0.04, -0.945},// R-Ear
    {0.04, -0.945}, // L-Ear
    {0.10, -0.01},  // L-Toes
    {0.12, -0.015}, // L-Mid-Foot
    {0.06, 0.00},   // L-Heel
    {-0.10, -0.01}, // R-Toes
    {-0.12, -0.015},// R-Mid-Foot
    {-0.06, 0.00},  // R-Heel
}};

std::vector<float> random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = static_cast<float>(gauss(rng));
    l2_normalize(v);
    return v;
}

double dot_product(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

struct Layout {
    std::vector<Point2> anchors;     // feet positions in world coordinates
    std::vector<Point2> partner;     // crossing: the position swapped to
};

Layout initial_layout(const SynthConfig& cfg) {
    Layout l;
    const int n = cfg.n_players;
    const bool crossing = cfg.motion == MotionModel::CrossingPairs;
    const int slots = crossing ? (n + 1) / 2 : n;
    const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(slots * static_cast<double>(cfg.width) /
                                                                       cfg.height))));
    const int rows = (slots + cols - 1) / cols;
    const double cw = static_cast<double>(cfg.width) / cols;
    const double ch = static_cast<double>(cfg.height) / rows;
    for (int i = 0; i < n; ++i) {
        const int slot = crossing ? i / 2 : i;
        const Point2 center{cw * (slot % cols + 0.5), ch * (slot / cols + 0.5) + 0.5 * cfg.player_height};
        if (!crossing || (i % 2 == 0 && i + 1 == n)) {
            l.anchors.push_back(center);
            l.partner.push_back(center);
            continue;
        }
        const double half = 0.5 * cfg.cross_separation;
        const Point2 left{center.x - half, center.y};
        const Point2 right{center.x + half, center.y};
        l.anchors.push_back(i % 2 == 0 ? left : right);
        l.partner.push_back(i % 2 == 0 ? right : left);
    }
    return l;
}

/// Fraction of the way from a crossing player's anchor to its partner position.
double crossing_fraction(const SynthConfig& cfg, int t, double& lateral) {
    const int period = cfg.cross_period;
    const int k = cfg.cross_frames;
    const int completed = t / period;
    const int next = completed + 1;
    const int start = next * period - k;  // frame before the next swap starts moving
    double from = completed % 2;
    lateral = 0.0;
    if (t > start) {
        const double frac = static_cast<double>(t - start) / k;
        const double to = next % 2;
        lateral = std::sin(std::numbers::pi * frac);
        return from + (to - from) * frac;
    }
    return from;
}

cv::Mat render_frame(const SynthConfig& cfg, const std::vector<std::pair<int, BoundingBox>>& players) {
    cv::Mat img(cfg.height, cfg.width, CV_8UC3,
                cv::Scalar(cfg.court_color.b, cfg.court_color.g, cfg.court_color.r));
    for (const auto& [player, box] : players) {
        const Rgb c = cfg.jersey_colors[static_cast<std::size_t>(player % 2)];
        const cv::Point p0(static_cast<int>(std::floor(box.x_min)) - 3, static_cast<int>(std::floor(box.y_min)) - 3);
        const cv::Point p1(static_cast<int>(std::ceil(box.x_max)) + 3, static_cast<int>(std::ceil(box.y_max)) + 3);
        cv::rectangle(img, p0, p1, cv::Scalar(c.b, c.g, c.r), cv::FILLED);
    }
    return img;
}

std::string frame_file(const char* prefix, int frame, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%05d%s", prefix, frame, ext);
    return buf;
}

} // namespace

Skeleton skeleton_template(Point2 feet, double height) {
    Skeleton sk = empty_skeleton();
    for (std::size_t k = 0; k < sk.size(); ++k) {
        sk[k].x = feet.x + kTemplate[k][0] * height;
        sk[k].y = feet.y + kTemplate[k][1] * height;
        sk[k].confidence = 1.0;
        sk[k].present = true;
    }
    return sk;
}

SynthOutput generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n = cfg.n_players;
    const int dim = cfg.feature_dim;
    SynthOutput out;

    // Per-player, per-part appearance signatures.
    std::vector<std::array<std::vector<float>, kNumParts>> signatures(static_cast<std::size_t>(n));
    for (auto& player : signatures)
        for (auto& sig : player) sig = random_unit(rng, dim);
    out.min_signature_dot = n > 1 ? 1.0 : 0.0;
    out.max_signature_dot = n > 1 ? -1.0 : 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < kNumParts; ++k) {
                const double d = dot_product(signatures[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                                             signatures[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
                out.min_signature_dot = std::min(out.min_signature_dot, d);
                out.max_signature_dot = std::max(out.max_signature_dot, d);
            }

    const Layout layout = initial_layout(cfg);
    std::vector<Point2> world = layout.anchors;
    std::vector<bool> dropped_last(static_cast<std::size_t>(n), false);
    const double margin_x = 0.2 * cfg.player_height;

    for (int t = 0; t < cfg.n_frames; ++t) {
        // Motion in world coordinates.
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            switch (cfg.motion) {
            case MotionModel::Static:
                break;
            case MotionModel::RandomWalk:
                if (t > 0) {
                    world[ui].x += cfg.walk_sigma * gauss(rng);
                    world[ui].y += cfg.walk_sigma * gauss(rng);
                    world[ui].x = std::clamp(world[ui].x, margin_x, cfg.width - margin_x);
                    world[ui].y = std::clamp(world[ui].y, cfg.player_height, static_cast<double>(cfg.height));
                }
                break;
            case MotionModel::CrossingPairs: {
                double lateral = 0.0;
                const double f = crossing_fraction(cfg, t, lateral);
                const Point2 a = layout.anchors[ui], b = layout.partner[ui];
                const double side = (i % 2 == 0) ? 1.0 : -1.0;
                world[ui] = a + f * (b - a) + Point2{0.0, side * lateral * 0.3 * cfg.cross_separation};
                break;
            }
            }
        }

        // Visibility.
        std::vector<int> visible;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double draw = unit(rng);
            const bool drop = t > 0 && !dropped_last[ui] && draw < cfg.dropout_prob;
            dropped_last[ui] = drop;
            if (drop) {
                ++out.dropouts;
            } else {
                visible.push_back(i);
            }
        }
        std::vector<int> order = visible;
        std::shuffle(order.begin(), order.end(), rng);

        SequenceFrame frame;
        frame.meta.frame_id = t;
        frame.meta.width = cfg.width;
        frame.meta.height = cfg.height;
        const Point2 camera{cfg.pan_per_frame * t, 0.0};
        std::vector<std::pair<int, BoundingBox>> rendered;

        for (std::size_t di = 0; di < order.size(); ++di) {
            const int player = order[di];
            const auto up = static_cast<std::size_t>(player);
            Skeleton sk = skeleton_template(world[up] - camera, cfg.player_height);
            for (auto& kp : sk) kp.confidence = 0.6 + 0.4 * unit(rng);
            const BoundingBox box = derive_bbox(sk);
            const CropGeometry g = crop_geometry(box);

            auto features = std::make_shared<PartFeatureSet>(cfg.layer, dim);
            for (int k = 0; k < kNumParts; ++k) {
                const Point2 p = sk[static_cast<std::size_t>(k)].position();
                const GridCell anchor = map_to_grid(p, g, cfg.layer, NeighborhoodSpec(1)).front();
                for (GridCell cell : map_to_grid(p, g, cfg.layer, NeighborhoodSpec(3))) {
                    std::vector<float> v;
                    if (cell == anchor) {
                        v = signatures[up][static_cast<std::size_t>(k)];
                        if (cfg.feature_sigma > 0.0) {
                            for (auto& x : v) x = static_cast<float>(x + cfg.feature_sigma * gauss(rng));
                        }
                        l2_normalize(v);
                    } else {
                        v = random_unit(rng, dim);
                    }
                    features->insert(k, cell, std::move(v));
                }
            }
            const int det_id = static_cast<int>(di);
            char ref[64];
            std::snprintf(ref, sizeof(ref), "features/f%05d_d%03d.pfv", t, det_id);
            frame.detections.push_back(Detection::create(t, det_id, sk, std::move(features), std::string(ref)));
            rendered.emplace_back(player, box);
        }
        for (int player : visible) {
            const auto it = std::find_if(rendered.begin(), rendered.end(),
                                         [&](const auto& r) { return r.first == player; });
            out.ground_truth.push_back(TrackRow::from_box(t, player + 1, it->second));
        }
        if (cfg.render_images) {
            frame.meta.image = render_frame(cfg, rendered);
            frame.meta.image_path = frame_file("images/frame_", t, ".png");
        }
        out.sequence.frames.push_back(std::move(frame));
        if (t > 0) out.homographies.push_back({t - 1, t, Homography::translation(cfg.pan_per_frame, 0.0)});
    }
    out.sequence.fps_effective = 4.0;
    return out;
}

void write_fixture(const SynthOutput& out, const SynthConfig& cfg, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "features");
    if (cfg.render_images) fs::create_directories(dir / "images");

    save_sequence(out.sequence, {dir / "detections.jsonl", dir / "frames.jsonl", dir});
    save_tracks(dir / "gt.csv", out.ground_truth);
    save_homographies(dir / "homographies.jsonl", out.homographies);
    if (cfg.render_images) {
        for (const auto& f : out.sequence.frames) {
            if (!f.meta.image.empty() && f.meta.image_path) {
                const fs::path p = dir / *f.meta.image_path;
                if (!cv::imwrite(p.string(), f.meta.image)) throw Error(ErrorCode::IoError, "cannot write " + p.string());
            }
        }
    }
    write_text_file(dir / "synth.cfg", format_synth_config(cfg));

    nlohmann::ordered_json manifest;
    manifest["frames"] = out.sequence.frames.size();
    manifest["detections"] = out.sequence.detection_count();
    manifest["players"] = cfg.n_players;
    manifest["dropouts"] = out.dropouts;
    manifest["min_signature_dot"] = out.min_signature_dot;
    manifest["max_signature_dot"] = out.max_signature_dot;
    manifest["layer"] = cfg.layer.name;
    manifest["seed"] = cfg.seed;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

FixtureData load_fixture(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    FixtureData data;
    SequencePaths paths{dir / "detections.jsonl", std::nullopt, dir};
    if (fs::exists(dir / "frames.jsonl")) paths.frames = dir / "frames.jsonl";
    data.sequence = load_sequence(paths);
    if (fs::exists(dir / "gt.csv")) data.ground_truth = load_tracks(dir / "gt.csv");
    if (fs::exists(dir / "homographies.jsonl")) data.homographies = load_homographies(dir / "homographies.jsonl");
    return data;
}

} // namespace courttrack
