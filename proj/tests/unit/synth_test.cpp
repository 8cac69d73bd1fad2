#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "courttrack/error.hpp"
#include "courttrack/io.hpp"
#include "courttrack/synth.hpp"
#include "test_support.hpp"

using namespace courttrack;
using courttrack::testing::scratch_dir;

namespace {

SynthConfig small_config(std::uint64_t seed = 1) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_players = 4;
    cfg.n_frames = 12;
    cfg.feature_dim = 16;
    cfg.feature_sigma = 0.05;
    return cfg;
}

std::map<int, std::set<int>> gt_ids_by_frame(const std::vector<TrackRow>& rows) {
    std::map<int, std::set<int>> out;
    for (const auto& r : rows) out[r.frame_id].insert(r.track_id);
    return out;
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

} // namespace

TEST(SkeletonTemplate, FeetAnchorAndHeight) {
    const Detection d = Detection::create(0, 0, skeleton_template({500, 800}, 200));
    EXPECT_NEAR(d.bbox.y_max, 800.0, 1e-9);
    EXPECT_NEAR(d.bbox.height(), 0.955 * 200, 1e-9);
    EXPECT_NEAR(0.5 * (d.bbox.x_min + d.bbox.x_max), 500.0, 1e-9);
}

TEST(SynthConfig, RejectsBadValues) {
    SynthConfig cfg = small_config();
    cfg.dropout_prob = 1.5;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = small_config();
    cfg.cross_frames = 3;
    cfg.cross_period = 2;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = small_config();
    cfg.n_players = 0;
    EXPECT_THROW(generate(cfg), Error);
}

TEST(Synth, SameSeedGivesIdenticalOutput) {
    const SynthConfig cfg = small_config(42);
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    EXPECT_EQ(a.ground_truth, b.ground_truth);
    ASSERT_EQ(a.sequence.frames.size(), b.sequence.frames.size());
    for (std::size_t t = 0; t < a.sequence.frames.size(); ++t) {
        const auto& fa = a.sequence.frames[t].detections;
        const auto& fb = b.sequence.frames[t].detections;
        ASSERT_EQ(fa.size(), fb.size());
        for (std::size_t i = 0; i < fa.size(); ++i) {
            EXPECT_EQ(format_detection_line(fa[i]), format_detection_line(fb[i]));
            EXPECT_EQ(*fa[i].features, *fb[i].features);
        }
    }
    EXPECT_NE(generate(small_config(43)).ground_truth, a.ground_truth);
}

TEST(Synth, FixtureFilesAreByteIdentical) {
    const SynthConfig cfg = small_config(9);
    const auto d1 = scratch_dir("synth_det1");
    const auto d2 = scratch_dir("synth_det2");
    write_fixture(generate(cfg), cfg, d1);
    write_fixture(generate(cfg), cfg, d2);
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(d1)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), d1);
        ASSERT_TRUE(std::filesystem::exists(d2 / rel)) << rel;
        EXPECT_EQ(slurp(entry.path()), slurp(d2 / rel)) << rel;
        ++files;
    }
    // detections, frames, gt, homographies, manifest, config + one PFV per detection.
    EXPECT_EQ(files, 6u + 4u * 12u);
}

TEST(Synth, FeatureVectorsAreUnitNorm) {
    const auto out = generate(small_config(5));
    std::size_t checked = 0;
    for (const auto& frame : out.sequence.frames) {
        for (const auto& det : frame.detections) {
            ASSERT_TRUE(det.features);
            for (int k = 0; k < kNumParts; ++k) {
                for (const auto& [cell, vec] : det.features->cells(k)) {
                    double s = 0;
                    for (float v : vec) s += static_cast<double>(v) * v;
                    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
                    ++checked;
                }
            }
        }
    }
    // 25 parts x 9 cells per detection (fewer only where a cell is clamped).
    EXPECT_GT(checked, 4u * 12u * 25u * 4u);
}

TEST(Synth, GroundTruthMatchesVisiblePlayers) {
    SynthConfig cfg = small_config(11);
    cfg.n_players = 6;
    cfg.n_frames = 60;
    cfg.dropout_prob = 0.2;
    const auto out = generate(cfg);
    EXPECT_GT(out.dropouts, 0);
    EXPECT_EQ(static_cast<int>(out.ground_truth.size()), cfg.n_players * cfg.n_frames - out.dropouts);
    const auto ids = gt_ids_by_frame(out.ground_truth);
    for (const auto& frame : out.sequence.frames) {
        const auto it = ids.find(frame.meta.frame_id);
        const std::size_t gt = it == ids.end() ? 0 : it->second.size();
        EXPECT_EQ(frame.detections.size(), gt);
    }
    // Never dropped in the first frame, never two frames running.
    EXPECT_EQ(ids.at(0).size(), 6u);
    for (int p = 1; p <= cfg.n_players; ++p) {
        for (int t = 1; t + 1 < cfg.n_frames; ++t) {
            const bool missing_now = !ids.at(t).contains(p);
            const bool missing_next = !ids.at(t + 1).contains(p);
            EXPECT_FALSE(missing_now && missing_next) << "player " << p << " frame " << t;
        }
    }
}

TEST(Synth, PanShiftsStaticSceneAndRecordsHomographies) {
    SynthConfig cfg = small_config(2);
    cfg.motion = MotionModel::Static;
    cfg.pan_per_frame = 8.0;
    const auto out = generate(cfg);
    ASSERT_EQ(out.homographies.size(), static_cast<std::size_t>(cfg.n_frames - 1));
    std::map<int, double> x0;
    for (const auto& r : out.ground_truth) {
        if (r.frame_id == 0) x0[r.track_id] = r.x_min;
    }
    for (const auto& r : out.ground_truth) {
        EXPECT_NEAR(r.x_min, x0.at(r.track_id) - 8.0 * r.frame_id, 1e-9);
    }
    for (std::size_t i = 0; i < out.homographies.size(); ++i) {
        const auto& rec = out.homographies[i];
        EXPECT_EQ(rec.frame_from, static_cast<int>(i));
        EXPECT_EQ(rec.frame_to, static_cast<int>(i) + 1);
        // Maps a frame-(t) point to where it was seen in frame t-1.
        const Point2 q = rec.h.apply({100, 200});
        EXPECT_NEAR(q.x, 108.0, 1e-12);
        EXPECT_NEAR(q.y, 200.0, 1e-12);
    }
}

TEST(Synth, CrossingPairsSwapOrder) {
    SynthConfig cfg = small_config(3);
    cfg.motion = MotionModel::CrossingPairs;
    cfg.n_frames = 6;
    const auto out = generate(cfg);
    std::map<int, std::map<int, double>> cx;
    for (const auto& r : out.ground_truth) cx[r.frame_id][r.track_id] = r.x_min + 0.5 * r.width;
    // Players 1 and 2 form a pair; their horizontal order flips at each swap.
    int flips = 0;
    for (int t = 1; t < cfg.n_frames; ++t) {
        const bool before = cx[t - 1][1] < cx[t - 1][2];
        const bool now = cx[t][1] < cx[t][2];
        flips += before != now;
    }
    EXPECT_GE(flips, 2);
}

TEST(Synth, SignaturesAreSeparable) {
    SynthConfig cfg = small_config(4);
    cfg.feature_dim = 128;
    const auto out = generate(cfg);
    EXPECT_LT(out.max_signature_dot, 0.6);
    EXPECT_GE(out.min_signature_dot, -1.0);
}

TEST(Synth, RenderedImagesShowJerseys) {
    SynthConfig cfg = small_config(6);
    cfg.render_images = true;
    cfg.n_frames = 2;
    const auto out = generate(cfg);
    for (const auto& frame : out.sequence.frames) {
        ASSERT_FALSE(frame.meta.image.empty());
        EXPECT_EQ(frame.meta.image.cols, cfg.width);
        ASSERT_FALSE(frame.detections.empty());
        const auto& box = frame.detections.front().bbox;
        const auto px = frame.meta.image.at<cv::Vec3b>(static_cast<int>(0.5 * (box.y_min + box.y_max)),
                                                       static_cast<int>(0.5 * (box.x_min + box.x_max)));
        const Rgb c{px[2], px[1], px[0]};
        EXPECT_TRUE(c == cfg.jersey_colors[0] || c == cfg.jersey_colors[1]);
    }
}

TEST(Synth, FixtureRoundTrip) {
    SynthConfig cfg = small_config(7);
    cfg.pan_per_frame = 3.0;
    const auto out = generate(cfg);
    const auto dir = scratch_dir("synth_roundtrip");
    write_fixture(out, cfg, dir);
    const FixtureData back = load_fixture(dir);
    EXPECT_EQ(back.ground_truth, out.ground_truth);
    ASSERT_EQ(back.homographies.size(), out.homographies.size());
    for (std::size_t i = 0; i < out.homographies.size(); ++i) {
        EXPECT_LT(back.homographies[i].h.distance(out.homographies[i].h), 1e-12);
    }
    ASSERT_EQ(back.sequence.frames.size(), out.sequence.frames.size());
    for (std::size_t t = 0; t < out.sequence.frames.size(); ++t) {
        const auto& a = out.sequence.frames[t];
        const auto& b = back.sequence.frames[t];
        EXPECT_EQ(a.meta.width, b.meta.width);
        ASSERT_EQ(a.detections.size(), b.detections.size());
        for (std::size_t i = 0; i < a.detections.size(); ++i) {
            EXPECT_EQ(format_detection_line(a.detections[i]), format_detection_line(b.detections[i]));
            ASSERT_TRUE(b.detections[i].features);
            EXPECT_EQ(*a.detections[i].features, *b.detections[i].features);
        }
    }
}
