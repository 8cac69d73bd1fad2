#pragma once

#include <map>
#include <vector>

#include "courttrack/geometry.hpp"
#include "courttrack/io.hpp"

namespace courttrack {

/// Intersection over union; 0 for disjoint or zero-area boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

struct LabeledBox {
    int id = 0;
    BoundingBox box;
};

/// CLEAR-MOT running counts.
struct MetricsAccumulator {
    long long false_positives = 0;
    long long misses = 0;
    long long mismatches = 0;
    long long ground_truth = 0;
    long long correspondences = 0;
    double iou_sum = 0.0;
    long long frames = 0;
    /// Last hypothesis each ground-truth id was matched to.
    std::map<int, int> last_match;

    MetricsAccumulator& operator+=(const MetricsAccumulator& other);
};

/// One frame of CLEAR-MOT bookkeeping: keep last frame's pairs that still
/// overlap by `iou_gate`, pair the rest by maximum-cardinality minimum total
/// (1 - IoU) (exhaustive up to 8x8, greedy best-first beyond), count a mismatch
/// when a ground-truth id's hypothesis changes. Throws DuplicateId.
void correspond_frame(const std::vector<LabeledBox>& gt, const std::vector<LabeledBox>& hyp,
                      MetricsAccumulator& acc, double iou_gate = 0.5);

/// Throws EmptyGroundTruth when no ground truth boxes were seen.
double mota(const MetricsAccumulator& acc);
/// Throws NoCorrespondences when nothing was matched.
double motp(const MetricsAccumulator& acc);

/// Frame-by-frame accumulation over the union of frame ids.
MetricsAccumulator evaluate_tracks(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                                   double iou_gate = 0.5);

struct DetectionScores {
    long long true_positives = 0;
    long long false_positives = 0;
    long long false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Identity-free gated matching per frame. Undefined ratios are reported as 0.
DetectionScores detection_prf(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                              double iou_gate = 0.5);

/// Pairs (gt index, hyp index) with IoU >= gate, maximizing the number of pairs
/// and then minimizing total (1 - IoU).
std::vector<std::pair<std::size_t, std::size_t>> gated_iou_matching(const std::vector<BoundingBox>& gt,
                                                                    const std::vector<BoundingBox>& hyp,
                                                                    double iou_gate);

} // namespace courttrack
