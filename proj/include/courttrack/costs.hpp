#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "courttrack/body_parts.hpp"
#include "courttrack/detection.hpp"
#include "courttrack/part_features.hpp"

namespace courttrack {

/// Side of the square neighborhood of grid cells sampled around a keypoint.
class NeighborhoodSpec {
public:
    /// Throws InvalidArgument unless size is 1, 2 or 3.
    explicit NeighborhoodSpec(int size = 2);
    int size() const { return size_; }

    friend bool operator==(const NeighborhoodSpec&, const NeighborhoodSpec&) = default;

private:
    int size_;
};

enum class SecondaryCost { Deep, Color };

/// How the exponentiated dot products are normalized. `PairSet` divides by the
/// sum over every (cell, cell') pair of the part; `PerRow` divides by the sum over
/// the second detection's cells for a fixed first-detection cell.
enum class SimilarityNormalization { PairSet, PerRow };

struct TrackerConfig {
    double alpha = 0.2;
    NeighborhoodSpec neighborhood{2};
    LayerSpec layer = LayerSpec::b4c2();
    double conf_threshold = 0.3;
    SecondaryCost secondary = SecondaryCost::Deep;
    PartSet part_subset = PartSet::all();
    SimilarityNormalization similarity = SimilarityNormalization::PairSet;
    /// Matches costing more than this are rejected. 1.0 never rejects.
    double cost_gate = 1.0;
    bool stabilize = false;

    /// Throws InvalidArgument on out-of-range values.
    void validate() const;
    /// Non-fatal configuration hazards (e.g. the singleton-softmax degeneracy).
    std::vector<std::string> warnings() const;
    bool needs_features() const { return alpha < 1.0 && secondary == SecondaryCost::Deep; }
    bool needs_images() const { return alpha < 1.0 && secondary == SecondaryCost::Color; }
};

/// Normalized centroid distance: |c_a - c_b| / sqrt(w^2 + h^2).
double centroid_cost(const BoundingBox& a, const BoundingBox& b, const FrameMeta& frame);

/// Mean RGB Euclidean distance over 3x3 pixel patches around shared keypoints,
/// scaled by 1 / (255 sqrt 3) so the result lies in [0, 1]. Patch pixels are
/// clamped to the image. Throws EmptySharedParts or MissingImage.
double color_cost(const Detection& a, const Detection& b, const cv::Mat& image_a, const cv::Mat& image_b,
                  double conf_threshold = 0.3);

/// Square crop of side equal to the bbox height, centered on the bbox, that the
/// feature extractor resizes to 224 x 224.
struct CropGeometry {
    static constexpr double kTargetSide = 224.0;

    Point2 center;
    double side = 0.0;

    Point2 origin() const { return {center.x - 0.5 * side, center.y - 0.5 * side}; }
};

/// Throws InvalidArgument for a zero-height bbox.
CropGeometry crop_geometry(const BoundingBox& bbox);

/// Fractional grid coordinate of a frame pixel, clamped to the crop.
Point2 grid_coordinate(Point2 p, const CropGeometry& g, const LayerSpec& layer);

/// Cells sampled around `p`: nearest cell (1), floor/ceil square (2), or the 3x3
/// block around the nearest cell (3); clamped to the grid, deduplicated, sorted.
std::vector<GridCell> map_to_grid(Point2 p, const CropGeometry& g, const LayerSpec& layer,
                                  const NeighborhoodSpec& n);

/// Softmax similarity of every (cell, cell') pair. `vectors_a` and `vectors_b`
/// are the unit vectors sampled in the two neighborhoods. Result is row-major
/// |a| x |b|.
std::vector<double> dl_similarity(std::span<const std::vector<float>* const> vectors_a,
                                  std::span<const std::vector<float>* const> vectors_b,
                                  SimilarityNormalization normalization = SimilarityNormalization::PairSet);

/// Mean over shared parts of the best pair similarity. This is a similarity;
/// the matcher consumes 1 - dl_cost. Throws EmptySharedParts or MissingFeatures.
double dl_cost(const Detection& a, const Detection& b, const TrackerConfig& cfg);

/// A detection as seen by the cost functions: the box used for the geometric
/// term may come from a stabilized frame while keypoints stay in image space.
struct Observation {
    const Detection* detection = nullptr;
    BoundingBox placed_box;
    const cv::Mat* image = nullptr;

    static Observation of(const Detection& det, const cv::Mat* image = nullptr) {
        return {&det, det.bbox, image};
    }
};

struct FusedCost {
    double value = 0.0;
    double geometric = 0.0;
    std::optional<double> secondary;  ///< Unset when alpha == 1 or no shared parts.
    bool geometric_only = false;      ///< Set when the shared part set was empty.
};

/// alpha * centroid_cost + (1 - alpha) * secondary, with secondary either
/// 1 - dl_cost or color_cost. Falls back to the geometric term (flagged) when
/// the shared part set is empty.
FusedCost combined_cost(const Observation& a, const Observation& b, const TrackerConfig& cfg,
                        const FrameMeta& frame);
double combined_cost(const Detection& a, const Detection& b, const TrackerConfig& cfg, const FrameMeta& frame);

} // namespace courttrack
