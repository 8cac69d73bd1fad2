#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "courttrack/error.hpp"
#include "courttrack/metrics.hpp"

using namespace courttrack;

namespace {

BoundingBox square(double x, double y, double side = 100.0) { return {x, y, x + side, y + side}; }

TrackRow row(int frame, int id, const BoundingBox& b) { return TrackRow::from_box(frame, id, b); }

/// Ten objects on a row, ten frames: 100 ground-truth boxes.
std::vector<TrackRow> ten_by_ten_gt() {
    std::vector<TrackRow> gt;
    for (int f = 0; f < 10; ++f)
        for (int i = 0; i < 10; ++i) gt.push_back(row(f, i + 1, square(150.0 * i, 0)));
    return gt;
}

} // namespace

TEST(Iou, Examples) {
    EXPECT_EQ(iou(square(0, 0, 10), square(0, 0, 10)), 1.0);
    EXPECT_EQ(iou(square(0, 0, 10), square(20, 20, 10)), 0.0);
    EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(iou({5, 5, 5, 5}, {5, 5, 5, 5}), 0.0);
    EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
}

TEST(Iou, SymmetricAndScaleInvariant) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const BoundingBox a{u(rng), u(rng), u(rng) + 100, u(rng) + 100};
        const BoundingBox b{u(rng), u(rng), u(rng) + 100, u(rng) + 100};
        EXPECT_EQ(iou(a, b), iou(b, a));
        const BoundingBox a4{4 * a.x_min, 4 * a.y_min, 4 * a.x_max, 4 * a.y_max};
        const BoundingBox b4{4 * b.x_min, 4 * b.y_min, 4 * b.x_max, 4 * b.y_max};
        EXPECT_NEAR(iou(a4, b4), iou(a, b), 1e-15);
        EXPECT_GE(iou(a, b), 0.0);
        EXPECT_LE(iou(a, b), 1.0);
    }
}

TEST(Clear, PerfectSingleObject) {
    std::vector<TrackRow> gt;
    for (int f = 0; f < 10; ++f) gt.push_back(row(f, 1, square(10.0 * f, 0)));
    auto hyp = gt;
    for (auto& r : hyp) r.track_id = 42;
    const auto acc = evaluate_tracks(gt, hyp);
    EXPECT_EQ(acc.false_positives, 0);
    EXPECT_EQ(acc.misses, 0);
    EXPECT_EQ(acc.mismatches, 0);
    EXPECT_EQ(acc.ground_truth, 10);
    EXPECT_EQ(mota(acc), 1.0);
    EXPECT_EQ(motp(acc), 1.0);
}

TEST(Clear, FormulaFixtureOfPointEight) {
    const auto gt = ten_by_ten_gt();
    std::vector<TrackRow> hyp;
    for (const auto& g : gt) {
        const int object = g.track_id - 1;
        if (object == 0 && g.frame_id >= 1 && g.frame_id <= 5) continue;  // 5 misses
        TrackRow h = g;
        if (object >= 5 && g.frame_id >= 5) h.track_id += 100;            // 5 id switches
        hyp.push_back(h);
    }
    for (int k = 0; k < 10; ++k) hyp.push_back(row(9, 500 + k, square(150.0 * k, 800)));  // 10 fps
    const auto acc = evaluate_tracks(gt, hyp);
    EXPECT_EQ(acc.false_positives, 10);
    EXPECT_EQ(acc.misses, 5);
    EXPECT_EQ(acc.mismatches, 5);
    EXPECT_EQ(acc.ground_truth, 100);
    EXPECT_NEAR(mota(acc), 0.8, 1e-12);
}

TEST(Clear, IdSwapCountsTwoMismatches) {
    std::vector<TrackRow> gt, hyp;
    for (int f = 0; f < 10; ++f) {
        gt.push_back(row(f, 1, square(0, 0)));
        gt.push_back(row(f, 2, square(500, 0)));
        const bool swapped = f >= 5;
        hyp.push_back(row(f, swapped ? 2 : 1, square(0, 0)));
        hyp.push_back(row(f, swapped ? 1 : 2, square(500, 0)));
    }
    const auto acc = evaluate_tracks(gt, hyp);
    EXPECT_EQ(acc.mismatches, 2);
    EXPECT_EQ(acc.false_positives, 0);
    EXPECT_EQ(acc.misses, 0);
}

TEST(Clear, CarryOverKeepsPairWhileOverlapping) {
    // A hypothesis that drifts but stays above the gate keeps its pairing even
    // when another hypothesis overlaps the ground truth better.
    MetricsAccumulator acc;
    correspond_frame({{1, square(0, 0)}}, {{7, square(0, 0)}}, acc);
    correspond_frame({{1, square(0, 0)}}, {{7, square(10, 0)}, {8, square(0, 0)}}, acc);
    EXPECT_EQ(acc.mismatches, 0);
    EXPECT_EQ(acc.false_positives, 1);
    EXPECT_EQ(acc.last_match.at(1), 7);
}

TEST(Clear, GateRejectsWeakOverlap) {
    MetricsAccumulator acc;
    correspond_frame({{1, {0, 0, 10, 10}}}, {{1, {5, 0, 15, 10}}}, acc);
    EXPECT_EQ(acc.misses, 1);
    EXPECT_EQ(acc.false_positives, 1);
    EXPECT_EQ(acc.correspondences, 0);
}

TEST(Clear, DuplicateIdsRejected) {
    MetricsAccumulator acc;
    try {
        correspond_frame({{1, square(0, 0)}, {1, square(200, 0)}}, {}, acc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
    }
}

TEST(Mota, NegativeAndErrorContracts) {
    MetricsAccumulator acc;
    try {
        mota(acc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyGroundTruth);
    }
    try {
        motp(acc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoCorrespondences);
    }
    acc.false_positives = 200;
    acc.ground_truth = 100;
    EXPECT_EQ(mota(acc), -1.0);
}

TEST(Motp, FixedOverlapFixture) {
    std::vector<TrackRow> gt, hyp;
    for (int f = 0; f < 20; ++f) {
        gt.push_back(row(f, 1, {0, 0, 100, 100}));
        hyp.push_back(row(f, 1, {0, 0, 61.65, 100}));
    }
    const auto acc = evaluate_tracks(gt, hyp);
    EXPECT_NEAR(motp(acc), 0.6165, 1e-12);
}

TEST(Clear, RelabelingHypothesesLeavesScoresUnchanged) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jitter(-20.0, 20.0);
    std::uniform_int_distribution<int> coin(0, 9);
    const auto gt = ten_by_ten_gt();
    std::vector<TrackRow> hyp;
    for (const auto& g : gt) {
        if (coin(rng) == 0) continue;
        TrackRow h = g;
        h.x_min += jitter(rng);
        h.track_id = coin(rng) == 0 ? 50 + coin(rng) : g.track_id;
        hyp.push_back(h);
    }
    auto relabeled = hyp;
    for (auto& r : relabeled) r.track_id = 1000 - 3 * r.track_id;
    const auto a = evaluate_tracks(gt, hyp), b = evaluate_tracks(gt, relabeled);
    EXPECT_EQ(mota(a), mota(b));
    EXPECT_EQ(motp(a), motp(b));
    EXPECT_EQ(a.mismatches, b.mismatches);
}

TEST(Clear, MotaIsOneExactlyWithoutErrors) {
    const auto gt = ten_by_ten_gt();
    auto hyp = gt;
    EXPECT_EQ(mota(evaluate_tracks(gt, hyp)), 1.0);
    hyp.pop_back();
    EXPECT_LT(mota(evaluate_tracks(gt, hyp)), 1.0);
}

TEST(DetectionPrf, Examples) {
    const auto gt = ten_by_ten_gt();
    const auto same = detection_prf(gt, gt);
    EXPECT_EQ(same.precision, 1.0);
    EXPECT_EQ(same.recall, 1.0);
    EXPECT_EQ(same.f1, 1.0);

    const auto empty = detection_prf(gt, {});
    EXPECT_EQ(empty.precision, 0.0);
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.f1, 0.0);

    std::vector<TrackRow> g, h;
    for (int i = 0; i < 10; ++i) g.push_back(row(0, i, square(150.0 * i, 0)));
    for (int i = 0; i < 9; ++i) h.push_back(row(0, i, square(150.0 * i, 0)));
    h.push_back(row(0, 9, square(0, 700)));
    const auto s = detection_prf(g, h);
    EXPECT_EQ(s.true_positives, 9);
    EXPECT_NEAR(s.precision, 0.9, 1e-15);
    EXPECT_NEAR(s.recall, 0.9, 1e-15);
    EXPECT_NEAR(s.f1, 0.9, 1e-15);
}

TEST(GatedMatching, PrefersCardinalityThenOverlap) {
    // Greedy best-first would take the 0.9 pair and strand gt 1.
    const std::vector<BoundingBox> gt{{0, 0, 100, 100}, {30, 0, 130, 100}};
    const std::vector<BoundingBox> hyp{{5, 0, 105, 100}, {-25, 0, 75, 100}};
    const auto pairs = gated_iou_matching(gt, hyp, 0.5);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_TRUE(std::find(pairs.begin(), pairs.end(), std::pair<std::size_t, std::size_t>{0, 1}) != pairs.end());
    EXPECT_TRUE(std::find(pairs.begin(), pairs.end(), std::pair<std::size_t, std::size_t>{1, 0}) != pairs.end());
    EXPECT_EQ(pairs.size(), 2u);
}
