#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "courttrack/error.hpp"
#include "courttrack/matcher.hpp"
#include "courttrack/metrics.hpp"
#include "courttrack/synth.hpp"
#include "test_support.hpp"

using namespace courttrack;
using courttrack::testing::box_detection;
using courttrack::testing::frame_meta;

namespace {

CostMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CostMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
}

void expect_injective(const Assignment& a) {
    std::set<std::size_t> cols;
    for (const auto& c : a) {
        if (c) EXPECT_TRUE(cols.insert(*c).second);
    }
}

Sequence box_sequence(const std::vector<std::vector<BoundingBox>>& frames) {
    Sequence seq;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        SequenceFrame frame;
        frame.meta = frame_meta(static_cast<int>(f));
        for (std::size_t i = 0; i < frames[f].size(); ++i) {
            frame.detections.push_back(box_detection(static_cast<int>(f), static_cast<int>(i), frames[f][i]));
        }
        seq.frames.push_back(frame);
    }
    return seq;
}

TrackerConfig geometric() {
    TrackerConfig cfg;
    cfg.alpha = 1.0;
    return cfg;
}

} // namespace

TEST(BuildAssoc, SingleCell) {
    const auto e = build_assoc(CostMatrix::from_rows({{0.3}}));
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].best_col, 0u);
    EXPECT_EQ(e[0].best_cost, 0.3);
    EXPECT_FALSE(e[0].second_col.has_value());
    EXPECT_FALSE(e[0].second_cost.has_value());
}

TEST(BuildAssoc, TwoMinima) {
    const auto e = build_assoc(CostMatrix::from_rows({{0.5, 0.2, 0.9}}));
    EXPECT_EQ(e[0].best_col, 1u);
    EXPECT_EQ(e[0].best_cost, 0.2);
    EXPECT_EQ(e[0].second_col, 0u);
    EXPECT_EQ(e[0].second_cost, 0.5);
}

TEST(BuildAssoc, TiesGoToLowerColumn) {
    const auto e = build_assoc(CostMatrix::from_rows({{0.4, 0.4}}));
    EXPECT_EQ(e[0].best_col, 0u);
    EXPECT_EQ(e[0].second_col, 1u);
    EXPECT_EQ(e[0].second_cost, 0.4);
}

TEST(BuildAssoc, NoColumnsGivesNoEntries) {
    EXPECT_TRUE(build_assoc(CostMatrix(3, 0)).empty());
}

TEST(ResolveConflicts, TenPercentRuleWins) {
    const auto m = CostMatrix::from_rows({{0.10, 0.60}, {0.50, 0.70}});
    const auto a = resolve_conflicts(build_assoc(m), 2);
    EXPECT_EQ(a[0], 0u);
    EXPECT_EQ(a[1], 1u);  // loser falls back to its free second column
}

TEST(ResolveConflicts, MarginRuleWithinTenPercent) {
    const auto m = CostMatrix::from_rows({{0.31, 0.36}, {0.30, 0.70}});
    const auto a = resolve_conflicts(build_assoc(m), 2);
    // 0.30 is not below 0.9 * 0.31, so the larger margin (0.40 vs 0.05) decides.
    EXPECT_EQ(a[1], 0u);
    EXPECT_EQ(a[0], 1u);
}

TEST(ResolveConflicts, LoserWithTakenSecondStaysUnmatched) {
    // Rows 0 and 1 fight for col 0; row 1 loses and its second (col 1) is row 2's unique best.
    const auto m = CostMatrix::from_rows({{0.1, 0.9, 0.9}, {0.5, 0.6, 0.9}, {0.9, 0.2, 0.9}});
    const auto a = resolve_conflicts(build_assoc(m), 3);
    EXPECT_EQ(a[0], 0u);
    EXPECT_FALSE(a[1].has_value());
    EXPECT_EQ(a[2], 1u);
}

TEST(ResolveConflicts, DiagonalDominantIsIdentity) {
    const auto m = CostMatrix::from_rows({{0.1, 0.8, 0.9}, {0.7, 0.2, 0.6}, {0.9, 0.5, 0.3}});
    const auto a = assign(m);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(a[r], r);
    EXPECT_EQ(a, brute_force_assignment(m));
}

TEST(ResolveConflicts, ScaleInvariantAndInjective) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> dim(1, 8);
    for (int trial = 0; trial < 500; ++trial) {
        const CostMatrix m = random_matrix(rng, static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)));
        const Assignment base = assign(m);
        expect_injective(base);
        // Power-of-two factors scale every cost exactly.
        for (double f : {0.25, 2.0, 1024.0}) EXPECT_EQ(assign(m.scaled(f), 1e300), base);
    }
}

TEST(Assign, CostGateRejectsExpensiveMatches) {
    const auto m = CostMatrix::from_rows({{0.1, 0.9}, {0.8, 0.7}});
    const auto a = assign(m, 0.5);
    EXPECT_EQ(a[0], 0u);
    EXPECT_FALSE(a[1].has_value());
}

TEST(BruteForce, AntiDiagonalExample) {
    const auto a = brute_force_assignment(CostMatrix::from_rows({{1, 2}, {2, 100}}));
    EXPECT_EQ(a[0], 1u);
    EXPECT_EQ(a[1], 0u);
}

TEST(BruteForce, RectangularAndTooLarge) {
    const auto a = brute_force_assignment(CostMatrix::from_rows({{5, 1, 9}, {1, 5, 9}}));
    EXPECT_EQ(a[0], 1u);
    EXPECT_EQ(a[1], 0u);
    const auto b = brute_force_assignment(CostMatrix::from_rows({{5}, {1}, {3}}));
    EXPECT_FALSE(b[0].has_value());
    EXPECT_EQ(b[1], 0u);
    EXPECT_FALSE(b[2].has_value());
    try {
        brute_force_assignment(CostMatrix(9, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooLarge);
    }
}

TEST(BruteForce, MatchesIndependentEnumerationOnThreeByThree) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const CostMatrix m = random_matrix(rng, 3, 3);
        std::array<std::size_t, 3> p{0, 1, 2}, best{};
        double best_sum = 1e9;
        do {
            const double s = m(0, p[0]) + m(1, p[1]) + m(2, p[2]);
            if (s < best_sum) {
                best_sum = s;
                best = p;
            }
        } while (std::next_permutation(p.begin(), p.end()));
        const auto a = brute_force_assignment(m);
        for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(a[r], best[r]);
    }
}

TEST(TrackSequence, FirstFrameGetsFreshIds) {
    const auto seq = box_sequence({{{0, 0, 10, 50}, {500, 0, 510, 50}, {900, 0, 910, 50}}});
    const auto out = track_sequence(seq, geometric());
    ASSERT_EQ(out.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i].track_id, static_cast<int>(i) + 1);
}

TEST(TrackSequence, StaticPlayerKeepsOneId) {
    const auto seq = box_sequence(std::vector<std::vector<BoundingBox>>(5, {{100, 100, 140, 250}}));
    for (const auto& a : track_sequence(seq, geometric())) EXPECT_EQ(a.track_id, 1);
}

TEST(TrackSequence, OneFrameDropoutIsRecovered) {
    const BoundingBox p{100, 100, 140, 250}, q{900, 400, 940, 550};
    const BoundingBox q_moved{905, 400, 945, 550};
    const auto seq = box_sequence({{p, q}, {p}, {q_moved, p}});
    const auto out = track_sequence(seq, geometric());
    ASSERT_EQ(out.size(), 5u);
    EXPECT_EQ(out[0].track_id, 1);
    EXPECT_EQ(out[1].track_id, 2);
    EXPECT_EQ(out[2].track_id, 1);
    EXPECT_EQ(out[3].track_id, 2);  // q, recovered from two frames back
    EXPECT_EQ(out[4].track_id, 1);
}

TEST(TrackSequence, TwoFrameGapGetsFreshId) {
    const BoundingBox p{100, 100, 140, 250}, q{900, 400, 940, 550};
    const auto seq = box_sequence({{p, q}, {p}, {p}, {p, q}});
    const auto out = track_sequence(seq, geometric());
    EXPECT_EQ(out.back().track_id, 3);
}

TEST(TrackSequence, IdsAreUniquePerFrame) {
    SynthConfig sc;
    sc.seed = 77;
    sc.n_players = 8;
    sc.n_frames = 15;
    sc.walk_sigma = 40.0;
    sc.dropout_prob = 0.3;
    sc.feature_dim = 16;
    const SynthOutput out = generate(sc);
    const auto assignments = track_sequence(out.sequence, TrackerConfig{});
    std::map<int, std::set<int>> per_frame;
    for (const auto& a : assignments) EXPECT_TRUE(per_frame[a.frame_id].insert(a.track_id).second);
    EXPECT_EQ(assignments.size(), out.sequence.detection_count());
    EXPECT_EQ(assignments, track_sequence(out.sequence, TrackerConfig{}));
}

TEST(TrackSequence, CrossingIdsFollowSignatures) {
    SynthConfig sc;
    sc.seed = 4;
    sc.n_players = 2;
    sc.n_frames = 12;
    sc.motion = MotionModel::CrossingPairs;
    sc.feature_dim = 32;
    const SynthOutput out = generate(sc);
    TrackerConfig deep;
    deep.alpha = 0.0;
    const auto rows = to_track_rows(track_sequence(out.sequence, deep));
    EXPECT_EQ(evaluate_tracks(out.ground_truth, rows).mismatches, 0);
    const auto geo_rows = to_track_rows(track_sequence(out.sequence, geometric()));
    EXPECT_GT(evaluate_tracks(out.ground_truth, geo_rows).mismatches, 0);
}

TEST(TrackSequence, MissingFeaturesReported) {
    const auto seq = box_sequence({{{0, 0, 10, 50}}, {{0, 0, 10, 50}}});
    TrackerConfig cfg;
    cfg.alpha = 0.5;
    try {
        track_sequence(seq, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingFeatures);
    }
    cfg.alpha = 1.0;
    EXPECT_NO_THROW(track_sequence(seq, cfg));
    cfg.stabilize = true;
    EXPECT_THROW(track_sequence(seq, cfg), Error);
}

TEST(TrackSequence, StabilizationUsesFrameZeroCoordinates) {
    // Camera pans 300 px per frame; two players 200 px apart. Unstabilized
    // geometry swaps them, stabilized geometry does not.
    const auto seq = box_sequence({{{500, 300, 540, 450}, {700, 300, 740, 450}},
                                   {{200, 300, 240, 450}, {400, 300, 440, 450}}});
    TrackerConfig cfg = geometric();
    cfg.stabilize = true;
    const std::vector<Homography> pairs{Homography::translation(300, 0)};
    const auto st = track_sequence(seq, cfg, pairs);
    EXPECT_EQ(st[2].track_id, 1);
    EXPECT_EQ(st[3].track_id, 2);
    EXPECT_EQ(st[2].bbox.x_min, 200.0);
    cfg.stabilize = false;
    const auto raw = track_sequence(seq, cfg);
    EXPECT_NE(raw[3].track_id, 2);
}
