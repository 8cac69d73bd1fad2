#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "courttrack/detection.hpp"
#include "courttrack/geometry.hpp"

namespace courttrack {

/// 3x3 projective map, stored with unit Frobenius norm and a non-negative
/// bottom-right entry (largest-magnitude entry positive when that is zero), so
/// equal maps compare equal up to rounding.
class Homography {
public:
    Homography() : Homography(Eigen::Matrix3d::Identity()) {}
    /// Throws Singular if |det| is negligible relative to the matrix scale.
    explicit Homography(const Eigen::Matrix3d& m);

    static Homography identity() { return {}; }
    static Homography translation(double tx, double ty);
    static Homography scaling(double sx, double sy);

    const Eigen::Matrix3d& matrix() const { return m_; }

    /// Projective action. Throws PointAtInfinity when |w| < 1e-12.
    Point2 apply(Point2 p) const;

    /// Maximum absolute entry difference after normalization.
    double distance(const Homography& other) const;

private:
    Eigen::Matrix3d m_;
    /// m_ rescaled so the bottom-right entry is 1 (when non-zero); keeps the
    /// identity and pure translations exact under apply().
    Eigen::Matrix3d action_;
};

/// apply(compose(a, b), p) == apply(a, apply(b, p)).
Homography compose(const Homography& a, const Homography& b);
Homography invert(const Homography& h);

struct Correspondence {
    Point2 src;
    Point2 dst;
};

double reprojection_error(const Homography& h, const Correspondence& c);

/// Normalized DLT least squares. Throws DegenerateConfiguration for fewer than
/// four pairs, collinear minimal samples, or a rank-deficient system.
Homography estimate_dlt(std::span<const Correspondence> pairs);

struct RansacOptions {
    double inlier_tol = 2.0;
    int iterations = 500;
    std::uint64_t seed = 0;
};

struct RansacResult {
    Homography homography;
    std::vector<bool> inliers;
    std::size_t inlier_count = 0;
    /// False when the consensus set is no larger than a minimal sample.
    bool reliable = false;
};

RansacResult estimate_ransac(std::span<const Correspondence> pairs, const RansacOptions& options);

/// Detection with every keypoint mapped through `h` and the box re-derived.
Detection transform(const Detection& det, const Homography& h);

/// Sequence expressed in frame-0 coordinates. `original` is kept untouched and
/// `to_reference[i]` maps frame i of `original` into `stabilized`.
struct StabilizedSequence {
    Sequence original;
    Sequence stabilized;
    std::vector<Homography> to_reference;
};

/// `pair_homographies[i]` maps points of frame i+1 into frame i (the
/// motion-compensating direction); the composition to frame 0 is accumulated.
StabilizedSequence stabilize(const Sequence& seq, std::span<const Homography> pair_homographies);

} // namespace courttrack
