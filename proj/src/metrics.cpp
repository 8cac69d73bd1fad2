#include "courttrack/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "courttrack/error.hpp"

namespace courttrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

MetricsAccumulator& MetricsAccumulator::operator+=(const MetricsAccumulator& other) {
    false_positives += other.false_positives;
    misses += other.misses;
    mismatches += other.mismatches;
    ground_truth += other.ground_truth;
    correspondences += other.correspondences;
    iou_sum += other.iou_sum;
    frames += other.frames;
    return *this;
}

std::vector<std::pair<std::size_t, std::size_t>> gated_iou_matching(const std::vector<BoundingBox>& gt,
                                                                    const std::vector<BoundingBox>& hyp,
                                                                    double iou_gate) {
    const std::size_t ng = gt.size(), nh = hyp.size();
    std::vector<double> overlap(ng * nh);
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t h = 0; h < nh; ++h) overlap[g * nh + h] = iou(gt[g], hyp[h]);
    auto ok = [&](std::size_t g, std::size_t h) { return overlap[g * nh + h] >= iou_gate; };

    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (ng == 0 || nh == 0) return out;

    constexpr std::size_t kExhaustiveLimit = 8;
    if (ng <= kExhaustiveLimit && nh <= kExhaustiveLimit) {
        const bool permute_hyp = ng <= nh;
        const std::size_t span = permute_hyp ? nh : ng;
        const std::size_t pairs = std::min(ng, nh);
        std::vector<std::size_t> perm(span);
        std::iota(perm.begin(), perm.end(), 0);
        std::size_t best_count = 0;
        double best_cost = 0.0;
        std::vector<std::size_t> best_perm = perm;
        do {
            std::size_t count = 0;
            double cost = 0.0;
            for (std::size_t i = 0; i < pairs; ++i) {
                const std::size_t g = permute_hyp ? i : perm[i];
                const std::size_t h = permute_hyp ? perm[i] : i;
                if (ok(g, h)) {
                    ++count;
                    cost += 1.0 - overlap[g * nh + h];
                }
            }
            if (count > best_count || (count == best_count && count > 0 && cost < best_cost)) {
                best_count = count;
                best_cost = cost;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (std::size_t i = 0; i < pairs; ++i) {
            const std::size_t g = permute_hyp ? i : best_perm[i];
            const std::size_t h = permute_hyp ? best_perm[i] : i;
            if (ok(g, h)) out.emplace_back(g, h);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t h = 0; h < nh; ++h)
            if (ok(g, h)) candidates.emplace_back(1.0 - overlap[g * nh + h], g, h);
    std::sort(candidates.begin(), candidates.end());
    std::vector<bool> gt_used(ng), hyp_used(nh);
    for (const auto& [cost, g, h] : candidates) {
        if (gt_used[g] || hyp_used[h]) continue;
        gt_used[g] = hyp_used[h] = true;
        out.emplace_back(g, h);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void check_unique(const std::vector<LabeledBox>& boxes, const char* what) {
    std::set<int> seen;
    for (const auto& b : boxes) {
        if (!seen.insert(b.id).second) {
            throw Error(ErrorCode::DuplicateId, std::string("duplicate ") + what + " id " + std::to_string(b.id));
        }
    }
}

} // namespace

void correspond_frame(const std::vector<LabeledBox>& gt, const std::vector<LabeledBox>& hyp, MetricsAccumulator& acc,
                      double iou_gate) {
    check_unique(gt, "ground-truth");
    check_unique(hyp, "hypothesis");

    std::vector<bool> gt_done(gt.size()), hyp_done(hyp.size());
    long long matched = 0;
    auto record = [&](std::size_t g, std::size_t h) {
        gt_done[g] = hyp_done[h] = true;
        acc.iou_sum += iou(gt[g].box, hyp[h].box);
        ++matched;
    };

    // Carry over last frame's pairs that still overlap.
    for (std::size_t g = 0; g < gt.size(); ++g) {
        auto last = acc.last_match.find(gt[g].id);
        if (last == acc.last_match.end()) continue;
        for (std::size_t h = 0; h < hyp.size(); ++h) {
            if (!hyp_done[h] && hyp[h].id == last->second && iou(gt[g].box, hyp[h].box) >= iou_gate) {
                record(g, h);
                break;
            }
        }
    }

    std::vector<std::size_t> gt_left, hyp_left;
    std::vector<BoundingBox> gt_boxes, hyp_boxes;
    for (std::size_t g = 0; g < gt.size(); ++g) {
        if (!gt_done[g]) {
            gt_left.push_back(g);
            gt_boxes.push_back(gt[g].box);
        }
    }
    for (std::size_t h = 0; h < hyp.size(); ++h) {
        if (!hyp_done[h]) {
            hyp_left.push_back(h);
            hyp_boxes.push_back(hyp[h].box);
        }
    }
    for (const auto& [gi, hi] : gated_iou_matching(gt_boxes, hyp_boxes, iou_gate)) {
        const std::size_t g = gt_left[gi], h = hyp_left[hi];
        auto [it, inserted] = acc.last_match.try_emplace(gt[g].id, hyp[h].id);
        if (!inserted && it->second != hyp[h].id) {
            ++acc.mismatches;
            it->second = hyp[h].id;
        }
        record(g, h);
    }

    acc.correspondences += matched;
    acc.ground_truth += static_cast<long long>(gt.size());
    acc.misses += static_cast<long long>(gt.size()) - matched;
    acc.false_positives += static_cast<long long>(hyp.size()) - matched;
    acc.frames += 1;
}

double mota(const MetricsAccumulator& acc) {
    if (acc.ground_truth <= 0) throw Error(ErrorCode::EmptyGroundTruth, "MOTA needs ground truth boxes");
    return 1.0 - static_cast<double>(acc.false_positives + acc.misses + acc.mismatches) /
                     static_cast<double>(acc.ground_truth);
}

double motp(const MetricsAccumulator& acc) {
    if (acc.correspondences <= 0) throw Error(ErrorCode::NoCorrespondences, "MOTP needs at least one match");
    return acc.iou_sum / static_cast<double>(acc.correspondences);
}

namespace {

std::map<int, std::vector<LabeledBox>> by_frame(const std::vector<TrackRow>& rows) {
    std::map<int, std::vector<LabeledBox>> out;
    for (const auto& r : rows) out[r.frame_id].push_back({r.track_id, r.bbox()});
    return out;
}

} // namespace

MetricsAccumulator evaluate_tracks(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                                   double iou_gate) {
    const auto gt_frames = by_frame(gt);
    const auto hyp_frames = by_frame(hyp);
    std::set<int> frame_ids;
    for (const auto& [f, _] : gt_frames) frame_ids.insert(f);
    for (const auto& [f, _] : hyp_frames) frame_ids.insert(f);

    MetricsAccumulator acc;
    static const std::vector<LabeledBox> kNone;
    for (int f : frame_ids) {
        auto g = gt_frames.find(f);
        auto h = hyp_frames.find(f);
        correspond_frame(g == gt_frames.end() ? kNone : g->second, h == hyp_frames.end() ? kNone : h->second, acc,
                         iou_gate);
    }
    return acc;
}

DetectionScores detection_prf(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp, double iou_gate) {
    std::map<int, std::pair<std::vector<BoundingBox>, std::vector<BoundingBox>>> frames;
    for (const auto& r : gt) frames[r.frame_id].first.push_back(r.bbox());
    for (const auto& r : hyp) frames[r.frame_id].second.push_back(r.bbox());

    DetectionScores s;
    for (const auto& [f, boxes] : frames) {
        const auto pairs = gated_iou_matching(boxes.first, boxes.second, iou_gate);
        const auto tp = static_cast<long long>(pairs.size());
        s.true_positives += tp;
        s.false_negatives += static_cast<long long>(boxes.first.size()) - tp;
        s.false_positives += static_cast<long long>(boxes.second.size()) - tp;
    }
    const auto ratio = [](long long num, long long den) {
        return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    s.precision = ratio(s.true_positives, s.true_positives + s.false_positives);
    s.recall = ratio(s.true_positives, s.true_positives + s.false_negatives);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

} // namespace courttrack
