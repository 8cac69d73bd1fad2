#pragma once

#include <optional>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "courttrack/detection.hpp"
#include "courttrack/geometry.hpp"

namespace courttrack {

struct LineSegment {
    Point2 p0;
    Point2 p1;

    double length() const { return norm(p1 - p0); }
    /// Undirected orientation in [0, pi).
    double orientation() const;
};

enum class Border { Left, Right, Top, Bottom };

/// Infinite line clipped to the frame, described by its two border crossings.
struct BoundaryLine {
    double theta = 0.0;  ///< [0, pi)
    Point2 a;
    Point2 b;
    Border border_a = Border::Left;
    Border border_b = Border::Right;
    double support = 0.0;
    /// +1 when the court lies where normal . p >= offset, -1 for the other side.
    /// Unset means "infer from the other boundaries".
    std::optional<int> court_side;

    /// Unit normal (-sin theta, cos theta) and offset such that the line is
    /// { p : normal . p = offset }.
    Point2 normal() const;
    double offset() const;
    bool spans_left_right() const;
};

/// Line through `p` with orientation `theta`, clipped to a w x h frame.
/// Returns nullopt if the line misses the frame.
std::optional<BoundaryLine> clip_to_frame(Point2 p, double theta, int width, int height);

struct SegmentDetectorOptions {
    double grad_threshold = 20.0;
    double min_length = 30.0;
    /// Region growing accepts pixels whose orientation is within this angle.
    double angle_tolerance = 22.5 * 3.14159265358979323846 / 180.0;
    /// Minimum fraction of aligned pixels inside the fitted rectangle.
    double min_density = 0.5;
};

/// Gradient-orientation region growing followed by rectangle fitting.
/// Orientation is taken modulo pi so both edges of a thin stroke grow into one
/// region. Deterministic for a fixed image.
std::vector<LineSegment> detect_segments(const cv::Mat& bgr, const SegmentDetectorOptions& options = {});

/// Merges segments whose orientation differs by at most `angle_tol` and whose
/// extended border crossings lie within `border_tol`. Support is conserved.
std::vector<BoundaryLine> join_segments(const std::vector<LineSegment>& segments, double angle_tol,
                                        double border_tol, const FrameMeta& frame);

struct DominantOrientations {
    std::optional<double> sideline;
    std::optional<double> baseline;
};

/// Support-weighted winner among lines crossing both lateral borders
/// (sidelines) and among the rest (baselines). Throws NoSidelineCandidate when
/// there are no lines at all.
DominantOrientations dominant_orientations(const std::vector<BoundaryLine>& lines);

/// Hue interval in degrees (wraps when hue_min > hue_max) plus saturation and
/// value floors in [0, 1].
struct HsvFilter {
    double hue_min = 120.0;
    double hue_max = 150.0;
    double sat_min = 0.0;
    double val_min = 0.0;

    bool accepts(double hue, double sat, double val) const;
};

/// Per-pixel filter mask (CV_8U, 255 where accepted).
cv::Mat hsv_mask(const cv::Mat& bgr, const HsvFilter& filter);

enum class BoundaryKind { Sideline, Baseline };

/// Which band difference the sweep maximizes. `Absolute` scores
/// |before - after|; the signed variants require filter pixels to dominate the
/// band before (above/left of) or after (below/right of) the candidate.
enum class SweepPolarity { Absolute, FilterBefore, FilterAfter };

struct SweepOptions {
    double offset = 25.0;
    double step = 12.0;
    SweepPolarity polarity = SweepPolarity::Absolute;
    /// Sweep from the bottom/right end instead; only changes tie-breaking and
    /// the order of `scores`.
    bool reverse = false;
};

struct SweepResult {
    BoundaryLine line;
    std::size_t index = 0;         ///< Position in sweep order.
    long long count_before = 0;    ///< Filter pixels in the band above/left.
    long long count_after = 0;     ///< Filter pixels in the band below/right.
    long long difference = 0;
    long long band_area = 0;       ///< Pixels of one band inside the frame.
    bool low_confidence = false;   ///< difference < 5% of band_area
    std::vector<long long> scores;
};

/// Slides a line of the given orientation across the frame in `step` px
/// increments along its normal and scores the two `offset`-wide bands on each
/// side by filter-pixel count. Throws DegenerateImage when no candidate fits.
SweepResult sweep_boundary(const cv::Mat& bgr, double orientation, const HsvFilter& filter,
                           BoundaryKind kind, const SweepOptions& options = {});
/// Same sweep on a precomputed filter mask.
SweepResult sweep_mask(const cv::Mat& mask, double orientation, BoundaryKind kind,
                       const SweepOptions& options = {});

struct CourtPolygon {
    std::vector<Point2> vertices;

    double area() const;
    /// Boundary-inclusive point membership.
    bool contains(Point2 p, double eps = 1e-9) const;
};

/// Intersection of the frame rectangle with the court-side half-plane of each
/// boundary. A missing baseline leaves the lateral frame borders in place.
/// Throws EmptyPolygon when the intersection has no area.
CourtPolygon court_polygon(const BoundaryLine& top_side, const BoundaryLine& bottom_side,
                           const std::optional<BoundaryLine>& baseline, const FrameMeta& frame);

CourtPolygon frame_polygon(const FrameMeta& frame);

/// Keeps detections whose bbox bottom-center lies inside or on the polygon.
std::vector<Detection> filter_by_court(const std::vector<Detection>& detections,
                                       const CourtPolygon& polygon);

} // namespace courttrack
