#include "courttrack/detection.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "courttrack/error.hpp"

namespace courttrack {

Skeleton empty_skeleton() {
    Skeleton s{};
    for (int i = 0; i < kNumParts; ++i) s[static_cast<std::size_t>(i)].part_id = i;
    return s;
}

BoundingBox derive_bbox(const Skeleton& keypoints) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    BoundingBox box{inf, inf, -inf, -inf};
    bool any = false;
    for (const Keypoint& kp : keypoints) {
        if (!kp.present) continue;
        any = true;
        box.x_min = std::min(box.x_min, kp.x);
        box.y_min = std::min(box.y_min, kp.y);
        box.x_max = std::max(box.x_max, kp.x);
        box.y_max = std::max(box.y_max, kp.y);
    }
    if (!any) throw Error(ErrorCode::NoPartsPresent, "no keypoint is present");
    return box;
}

Detection Detection::create(int frame_id, int detection_id, const Skeleton& keypoints,
                            std::shared_ptr<const PartFeatureSet> features, std::optional<std::string> feat_ref) {
    if (frame_id < 0) throw Error(ErrorCode::InvalidArgument, "negative frame id");
    for (int i = 0; i < kNumParts; ++i) {
        const Keypoint& kp = keypoints[static_cast<std::size_t>(i)];
        if (kp.part_id != i) {
            throw Error(ErrorCode::InvalidArgument, "keypoint " + std::to_string(i) + " carries part id " +
                                                        std::to_string(kp.part_id));
        }
        if (kp.present && !(kp.confidence >= 0.0 && kp.confidence <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "confidence outside [0,1] for part " + std::to_string(i));
        }
    }
    Detection d;
    d.frame_id = frame_id;
    d.detection_id = detection_id;
    d.keypoints = keypoints;
    d.bbox = derive_bbox(keypoints);
    d.features = std::move(features);
    d.feat_ref = std::move(feat_ref);
    return d;
}

bool same_content(const Detection& a, const Detection& b) {
    if (a.frame_id != b.frame_id || a.detection_id != b.detection_id || a.bbox != b.bbox ||
        a.feat_ref != b.feat_ref) {
        return false;
    }
    for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
        const Keypoint& ka = a.keypoints[i];
        const Keypoint& kb = b.keypoints[i];
        if (ka.present != kb.present) return false;
        if (ka.present && ka != kb) return false;
    }
    if (static_cast<bool>(a.features) != static_cast<bool>(b.features)) return false;
    return !a.features || *a.features == *b.features;
}

PartSet shared_parts(const Detection& a, const Detection& b, double conf_threshold) {
    PartSet s;
    for (int k = 0; k < kNumParts; ++k) {
        const Keypoint& ka = a.keypoints[static_cast<std::size_t>(k)];
        const Keypoint& kb = b.keypoints[static_cast<std::size_t>(k)];
        if (ka.present && kb.present && ka.confidence >= conf_threshold && kb.confidence >= conf_threshold) {
            s.insert(k);
        }
    }
    return s;
}

std::size_t Sequence::detection_count() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.detections.size();
    return n;
}

const SequenceFrame* Sequence::find_frame(int frame_id) const {
    auto it = std::lower_bound(frames.begin(), frames.end(), frame_id,
                               [](const SequenceFrame& f, int id) { return f.meta.frame_id < id; });
    if (it == frames.end() || it->meta.frame_id != frame_id) return nullptr;
    return &*it;
}

void validate(const Sequence& seq) {
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto& f = seq.frames[i];
        if (i > 0 && f.meta.frame_id <= seq.frames[i - 1].meta.frame_id) {
            throw Error(ErrorCode::InvalidArgument, "frame ids must strictly increase");
        }
        if (f.meta.width <= 0 || f.meta.height <= 0) {
            throw Error(ErrorCode::InvalidArgument,
                        "frame " + std::to_string(f.meta.frame_id) + " has a non-positive size");
        }
        std::set<int> ids;
        for (const auto& d : f.detections) {
            if (d.frame_id != f.meta.frame_id) {
                throw Error(ErrorCode::InvalidArgument, "detection filed under the wrong frame");
            }
            if (!ids.insert(d.detection_id).second) {
                throw Error(ErrorCode::InvalidArgument, "duplicate detection id " + std::to_string(d.detection_id) +
                                                            " in frame " + std::to_string(f.meta.frame_id));
            }
        }
    }
}

} // namespace courttrack
