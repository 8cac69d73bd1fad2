#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "courttrack/body_parts.hpp"
#include "courttrack/geometry.hpp"
#include "courttrack/part_features.hpp"

namespace courttrack {

/// One pose-estimator part estimate. When `present` is false the remaining
/// fields carry no meaning.
struct Keypoint {
    int part_id = 0;
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
    bool present = false;

    Point2 position() const { return {x, y}; }

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

using Skeleton = std::array<Keypoint, kNumParts>;

/// Skeleton with every part absent and part ids filled in.
Skeleton empty_skeleton();

/// Axis-aligned min/max over the present keypoints. Throws NoPartsPresent.
BoundingBox derive_bbox(const Skeleton& keypoints);

struct Detection {
    int frame_id = 0;
    int detection_id = 0;
    Skeleton keypoints{};
    BoundingBox bbox{};
    std::shared_ptr<const PartFeatureSet> features;
    std::optional<std::string> feat_ref;

    /// Validates the skeleton (part ids in order, confidences in [0,1]) and
    /// derives the bounding box.
    static Detection create(int frame_id, int detection_id, const Skeleton& keypoints,
                            std::shared_ptr<const PartFeatureSet> features = nullptr,
                            std::optional<std::string> feat_ref = std::nullopt);
};

bool same_content(const Detection& a, const Detection& b);

/// Parts present in both detections with confidence >= threshold on each side.
PartSet shared_parts(const Detection& a, const Detection& b, double conf_threshold = 0.3);

struct FrameMeta {
    int frame_id = 0;
    int width = 0;
    int height = 0;
    std::optional<std::string> image_path;
    /// BGR, 8-bit, 3 channels. Empty unless loaded or rendered.
    cv::Mat image;
};

struct SequenceFrame {
    FrameMeta meta;
    std::vector<Detection> detections;
};

struct Sequence {
    std::vector<SequenceFrame> frames;
    double fps_effective = 4.0;

    std::size_t detection_count() const;
    const SequenceFrame* find_frame(int frame_id) const;
};

/// Throws InvalidArgument unless frame ids strictly increase, sizes are
/// positive, and detection ids are unique within each frame.
void validate(const Sequence& seq);

} // namespace courttrack
