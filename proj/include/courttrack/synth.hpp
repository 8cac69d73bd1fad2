#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "courttrack/costs.hpp"
#include "courttrack/detection.hpp"
#include "courttrack/io.hpp"

namespace courttrack {

enum class MotionModel { Static, RandomWalk, CrossingPairs };

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct SynthConfig {
    std::uint64_t seed = 0;
    int n_players = 10;
    int n_frames = 40;
    int width = 1920;
    int height = 1080;
    double player_height = 150.0;
    MotionModel motion = MotionModel::RandomWalk;
    double walk_sigma = 3.0;
    /// Crossing pairs swap places every `cross_period` frames, moving over
    /// `cross_frames` frames.
    int cross_period = 2;
    int cross_frames = 1;
    double cross_separation = 120.0;
    /// Per-player chance of vanishing for one frame. A player is never dropped
    /// two frames in a row.
    double dropout_prob = 0.0;
    /// Horizontal camera pan in px/frame; scene content moves by -pan each frame.
    double pan_per_frame = 0.0;
    int feature_dim = 128;
    double feature_sigma = 0.0;
    LayerSpec layer = LayerSpec::b4c2();
    std::array<Rgb, 2> jersey_colors{Rgb{200, 30, 30}, Rgb{240, 240, 240}};
    Rgb court_color{181, 134, 84};
    bool render_images = false;

    void validate() const;
};

struct SynthOutput {
    Sequence sequence;
    std::vector<TrackRow> ground_truth;
    std::vector<HomographyRecord> homographies;
    /// Smallest dot product between signatures of the same part of two
    /// different players, and the largest. Separability needs max well below 1.
    double min_signature_dot = 0.0;
    double max_signature_dot = 0.0;
    int dropouts = 0;
};

/// Upright 25-part skeleton with feet at `feet` and height `height`.
Skeleton skeleton_template(Point2 feet, double height);

SynthOutput generate(const SynthConfig& cfg);

/// Writes detections.jsonl, frames.jsonl, gt.csv, homographies.jsonl,
/// features/*.pfv and optional images/*.png under `dir`, plus manifest.json.
void write_fixture(const SynthOutput& out, const SynthConfig& cfg, const std::filesystem::path& dir);

struct FixtureData {
    Sequence sequence;
    std::vector<TrackRow> ground_truth;
    std::vector<HomographyRecord> homographies;
};

/// Reads the layout written by write_fixture; missing optional files are empty.
FixtureData load_fixture(const std::filesystem::path& dir);

} // namespace courttrack
