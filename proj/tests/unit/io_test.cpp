#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "courttrack/error.hpp"
#include "courttrack/io.hpp"
#include "courttrack/part_features.hpp"
#include "courttrack/synth.hpp"
#include "test_support.hpp"

using namespace courttrack;
using courttrack::testing::fixture;
using courttrack::testing::scratch_dir;

TEST(LoadSequence, EmptyFileGivesNoFrames) {
    const Sequence seq = load_sequence({fixture("empty.jsonl"), std::nullopt, std::nullopt});
    EXPECT_TRUE(seq.frames.empty());
}

TEST(LoadSequence, HandAuthoredFixture) {
    const Sequence seq = load_sequence({fixture("one_detection.jsonl"), std::nullopt, std::nullopt});
    ASSERT_EQ(seq.frames.size(), 1u);
    ASSERT_EQ(seq.frames[0].detections.size(), 1u);
    const Detection& d = seq.frames[0].detections[0];
    EXPECT_EQ(d.keypoints.size(), 25u);
    EXPECT_EQ(seq.frames[0].meta.width, kDefaultFrameWidth);
    EXPECT_EQ(seq.frames[0].meta.height, kDefaultFrameHeight);
    EXPECT_EQ(d.keypoints[0].x, 960.5);
    EXPECT_EQ(d.keypoints[0].y, 400.25);
    EXPECT_EQ(d.keypoints[0].confidence, 0.91);
    EXPECT_FALSE(d.keypoints[18].present);
    EXPECT_TRUE(d.keypoints[17].present);
    EXPECT_EQ(d.bbox.x_min, 925.0);
    EXPECT_EQ(d.bbox.x_max, 992.0);
    EXPECT_EQ(d.bbox.y_min, 395.0);
    EXPECT_EQ(d.bbox.y_max, 624.0);
    EXPECT_FALSE(d.features);
}

TEST(ParseDetectionLine, ReportsLineNumbers) {
    const auto dir = scratch_dir("parse_lines");
    write_text_file(dir / "d.jsonl", "\n{\"frame\":0,\"det\":0,\"kp\":[[1,2,0.5]]}\n");
    try {
        load_sequence({dir / "d.jsonl", std::nullopt, std::nullopt});
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(ParseDetectionLine, RejectsMalformedInput) {
    EXPECT_THROW(parse_detection_line("{not json", "x", 1), ParseError);
    EXPECT_THROW(parse_detection_line("{\"frame\":0,\"det\":0}", "x", 1), ParseError);
    std::string all_null = "{\"frame\":0,\"det\":0,\"kp\":[";
    for (int k = 0; k < 25; ++k) all_null += k ? ",null" : "null";
    all_null += "]}";
    EXPECT_THROW(parse_detection_line(all_null, "x", 1), Error);
}

TEST(LoadSequence, DuplicateDetectionIdRejected) {
    const auto dir = scratch_dir("dup_det");
    const std::string line = format_detection_line(courttrack::testing::box_detection(0, 0, {1, 2, 3, 4}));
    write_text_file(dir / "d.jsonl", line + "\n" + line + "\n");
    EXPECT_THROW(load_sequence({dir / "d.jsonl", std::nullopt, std::nullopt}), Error);
}

TEST(LoadSequence, MissingFileIsIoError) {
    try {
        load_sequence({"/nonexistent/courttrack/d.jsonl", std::nullopt, std::nullopt});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

TEST(SequenceRoundTrip, SyntheticSequenceIsStructurallyEqual) {
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.n_players = 4;
    cfg.n_frames = 5;
    cfg.feature_dim = 16;
    cfg.dropout_prob = 0.2;
    const SynthOutput out = generate(cfg);
    const auto dir = scratch_dir("roundtrip");
    save_sequence(out.sequence, {dir / "d.jsonl", dir / "f.jsonl", dir});
    const Sequence back = load_sequence({dir / "d.jsonl", dir / "f.jsonl", dir});
    ASSERT_EQ(back.frames.size(), out.sequence.frames.size());
    for (std::size_t i = 0; i < back.frames.size(); ++i) {
        const auto& fa = out.sequence.frames[i];
        const auto& fb = back.frames[i];
        EXPECT_EQ(fa.meta.frame_id, fb.meta.frame_id);
        EXPECT_EQ(fa.meta.width, fb.meta.width);
        ASSERT_EQ(fa.detections.size(), fb.detections.size());
        for (std::size_t j = 0; j < fa.detections.size(); ++j) {
            EXPECT_TRUE(same_content(fa.detections[j], fb.detections[j]));
            ASSERT_TRUE(fb.detections[j].features);
            EXPECT_EQ(*fa.detections[j].features, *fb.detections[j].features);
        }
    }
}

TEST(SequenceRoundTrip, RealsSurviveBitExactly) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-1e4, 1e4);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Skeleton sk = empty_skeleton();
        for (auto& kp : sk) {
            kp.present = conf(rng) < 0.7;
            kp.x = coord(rng);
            kp.y = coord(rng);
            kp.confidence = conf(rng);
        }
        sk[5].present = true;
        const Detection d = Detection::create(trial, trial % 3, sk);
        const Detection back = parse_detection_line(format_detection_line(d), "mem", 1);
        EXPECT_TRUE(same_content(d, back));
    }
}

TEST(Tracks, CsvRoundTripIsExact) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 2000.0);
    std::vector<TrackRow> rows;
    for (int i = 0; i < 100; ++i) rows.push_back({i / 10, i % 10 + 1, u(rng), u(rng), u(rng) / 10, u(rng) / 5});
    rows.push_back({100, 1, 1.0 / 3.0, 0.1, 1e-300, std::numeric_limits<double>::max()});
    const auto dir = scratch_dir("tracks");
    save_tracks(dir / "t.csv", rows);
    EXPECT_EQ(load_tracks(dir / "t.csv"), rows);
    const std::string text = read_text_file(dir / "t.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "frame,track_id,x_min,y_min,width,height");
}

TEST(Tracks, MalformedRowIsParseError) {
    const auto dir = scratch_dir("tracks_bad");
    write_text_file(dir / "t.csv", "frame,track_id,x_min,y_min,width,height\n0,1,2,3,4\n");
    EXPECT_THROW(load_tracks(dir / "t.csv"), ParseError);
}

TEST(Homographies, FileRoundTrip) {
    const auto dir = scratch_dir("homs");
    Eigen::Matrix3d m;
    m << 1.1, 0.02, 5.0, -0.01, 0.95, -3.0, 1e-5, 2e-5, 1.0;
    const std::vector<HomographyRecord> recs{{0, 1, Homography(m)}, {1, 2, Homography::translation(3, 4)}};
    save_homographies(dir / "h.jsonl", recs);
    const auto back = load_homographies(dir / "h.jsonl");
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].frame_from, recs[i].frame_from);
        EXPECT_EQ(back[i].frame_to, recs[i].frame_to);
        EXPECT_TRUE(back[i].h.matrix().isApprox(recs[i].h.matrix(), 1e-15));
    }
}

TEST(Pfv1, EncodeDecodeRoundTrip) {
    PartFeatureSet set(LayerSpec::b5c2(), 4);
    set.insert(1, {3, 4}, {1.0f, 0.0f, 0.0f, 0.0f});
    set.insert(24, {13, 0}, {0.5f, 0.5f, 0.5f, 0.5f});
    const auto bytes = encode_pfv1(set);
    ASSERT_GE(bytes.size(), 4u);
    EXPECT_EQ(std::memcmp(bytes.data(), "PFV1", 4), 0);
    // magic + len + "b5c2" + channels + count + 2 * (1 + 2 + 2 + 16)
    EXPECT_EQ(bytes.size(), 4u + 1 + 4 + 4 + 4 + 2 * 21);
    EXPECT_EQ(decode_pfv1(bytes), set);
}

TEST(Pfv1, TruncationAndTrailingBytesRejected) {
    PartFeatureSet set(LayerSpec::b4c2(), 2);
    set.insert(0, {0, 0}, {0.6f, 0.8f});
    auto bytes = encode_pfv1(set);
    auto cut = bytes;
    cut.pop_back();
    EXPECT_THROW(decode_pfv1(cut), ParseError);
    auto extra = bytes;
    extra.push_back(0);
    EXPECT_THROW(decode_pfv1(extra), ParseError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_pfv1(bad_magic), ParseError);
}

TEST(Pfv1, InsertValidatesVectors) {
    PartFeatureSet set(LayerSpec::b4c2(), 2);
    EXPECT_THROW(set.insert(0, {0, 0}, {1.0f, 1.0f}), Error);        // not unit norm
    EXPECT_THROW(set.insert(0, {0, 0}, {1.0f}), Error);              // wrong length
    EXPECT_THROW(set.insert(25, {0, 0}, {1.0f, 0.0f}), Error);       // bad part
    EXPECT_THROW(set.insert(0, {28, 0}, {1.0f, 0.0f}), Error);       // outside grid
    EXPECT_NO_THROW(set.insert(0, {27, 27}, {0.0f, 1.0f}));
}

TEST(LayerSpec, TableValues) {
    EXPECT_EQ(LayerSpec::from_name("b2c2"), (LayerSpec{"b2c2", 112, 112, 128}));
    EXPECT_EQ(LayerSpec::from_name("b3c2"), (LayerSpec{"b3c2", 56, 56, 256}));
    EXPECT_EQ(LayerSpec::from_name("b4c2"), (LayerSpec{"b4c2", 28, 28, 512}));
    EXPECT_EQ(LayerSpec::from_name("b5c2"), (LayerSpec{"b5c2", 14, 14, 512}));
    EXPECT_THROW(LayerSpec::from_name("b1c1"), Error);
}
