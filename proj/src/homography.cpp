#include "courttrack/homography.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "courttrack/error.hpp"

namespace courttrack {
namespace {

constexpr double kConditionFloor = 1e-12;

Eigen::Matrix3d normalized(const Eigen::Matrix3d& m) {
    const double f = m.norm();
    if (!(f > 0.0) || !std::isfinite(f)) throw Error(ErrorCode::Singular, "zero or non-finite homography");
    Eigen::Matrix3d out = m / f;
    double sign_ref = out(2, 2);
    if (sign_ref == 0.0) {
        Eigen::Index r = 0, c = 0;
        out.cwiseAbs().maxCoeff(&r, &c);
        sign_ref = out(r, c);
    }
    if (sign_ref < 0.0) out = -out;
    return out;
}

bool collinear(Point2 a, Point2 b, Point2 c) {
    const double area2 = std::abs(cross(b - a, c - a));
    const double scale = std::max({norm(b - a), norm(c - a), norm(c - b), 1e-300});
    return area2 <= 1e-9 * scale * scale;
}

bool has_collinear_triple(std::span<const Point2> pts) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            for (std::size_t k = j + 1; k < pts.size(); ++k)
                if (collinear(pts[i], pts[j], pts[k])) return true;
    return false;
}

/// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d hartley_transform(std::span<const Point2> pts) {
    Point2 c{0.0, 0.0};
    for (Point2 p : pts) c = c + p;
    c = (1.0 / static_cast<double>(pts.size())) * c;
    double mean_dist = 0.0;
    for (Point2 p : pts) mean_dist += norm(p - c);
    mean_dist /= static_cast<double>(pts.size());
    if (mean_dist <= 0.0) throw Error(ErrorCode::DegenerateConfiguration, "all points coincide");
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0, -s * c.x, 0, s, -s * c.y, 0, 0, 1;
    return t;
}

Point2 project(const Eigen::Matrix3d& m, Point2 p) {
    const Eigen::Vector3d v = m * Eigen::Vector3d(p.x, p.y, 1.0);
    return {v.x() / v.z(), v.y() / v.z()};
}

} // namespace

Homography::Homography(const Eigen::Matrix3d& m) : m_(normalized(m)) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m_);
    const auto& s = svd.singularValues();
    if (!(s(2) > kConditionFloor * s(0))) throw Error(ErrorCode::Singular, "homography is not invertible");
    action_ = m_(2, 2) != 0.0 ? Eigen::Matrix3d(m_ / m_(2, 2)) : m_;
}

Homography Homography::translation(double tx, double ty) {
    Eigen::Matrix3d m;
    m << 1, 0, tx, 0, 1, ty, 0, 0, 1;
    return Homography(m);
}

Homography Homography::scaling(double sx, double sy) {
    Eigen::Matrix3d m;
    m << sx, 0, 0, 0, sy, 0, 0, 0, 1;
    return Homography(m);
}

Point2 Homography::apply(Point2 p) const {
    const Eigen::Vector3d v = action_ * Eigen::Vector3d(p.x, p.y, 1.0);
    const double w = (m_.row(2) * Eigen::Vector3d(p.x, p.y, 1.0))(0);
    if (std::abs(w) < 1e-12) throw Error(ErrorCode::PointAtInfinity, "point maps to infinity");
    return {v.x() / v.z(), v.y() / v.z()};
}

double Homography::distance(const Homography& other) const {
    return (m_ - other.m_).cwiseAbs().maxCoeff();
}

Homography compose(const Homography& a, const Homography& b) { return Homography(a.matrix() * b.matrix()); }

Homography invert(const Homography& h) { return Homography(h.matrix().inverse()); }

double reprojection_error(const Homography& h, const Correspondence& c) {
    const Eigen::Vector3d v = h.matrix() * Eigen::Vector3d(c.src.x, c.src.y, 1.0);
    if (std::abs(v.z()) < 1e-12) return std::numeric_limits<double>::infinity();
    return std::hypot(v.x() / v.z() - c.dst.x, v.y() / v.z() - c.dst.y);
}

Homography estimate_dlt(std::span<const Correspondence> pairs) {
    const std::size_t n = pairs.size();
    if (n < 4) throw Error(ErrorCode::DegenerateConfiguration, "need at least 4 correspondences");

    std::vector<Point2> src(n), dst(n);
    for (std::size_t i = 0; i < n; ++i) {
        src[i] = pairs[i].src;
        dst[i] = pairs[i].dst;
    }
    if (n == 4 && (has_collinear_triple(src) || has_collinear_triple(dst))) {
        throw Error(ErrorCode::DegenerateConfiguration, "three of four points are collinear");
    }

    const Eigen::Matrix3d ts = hartley_transform(src);
    const Eigen::Matrix3d td = hartley_transform(dst);

    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = project(ts, src[i]);
        const Point2 q = project(td, dst[i]);
        const auto r = static_cast<Eigen::Index>(2 * i);
        a.row(r) << -p.x, -p.y, -1, 0, 0, 0, q.x * p.x, q.x * p.y, q.x;
        a.row(r + 1) << 0, 0, 0, -p.x, -p.y, -1, q.y * p.x, q.y * p.y, q.y;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    // One-dimensional null space needed: the 8th singular value must stay clear of zero.
    if (!(s(7) > 1e-10 * s(0))) {
        throw Error(ErrorCode::DegenerateConfiguration, "correspondences do not determine a homography");
    }
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    try {
        return Homography(td.inverse() * hn * ts);
    } catch (const Error&) {
        throw Error(ErrorCode::DegenerateConfiguration, "estimated homography is singular");
    }
}

RansacResult estimate_ransac(std::span<const Correspondence> pairs, const RansacOptions& options) {
    const std::size_t n = pairs.size();
    if (n < 4) throw Error(ErrorCode::DegenerateConfiguration, "need at least 4 correspondences");

    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    auto count_inliers = [&](const Homography& h) {
        std::size_t c = 0;
        for (const auto& p : pairs) c += reprojection_error(h, p) <= options.inlier_tol ? 1 : 0;
        return c;
    };

    std::optional<Homography> best;
    std::size_t best_count = 0;
    for (int it = 0; it < options.iterations; ++it) {
        std::array<std::size_t, 4> idx{};
        for (std::size_t k = 0; k < 4; ++k) {
            bool fresh = false;
            while (!fresh) {
                idx[k] = pick(rng);
                fresh = std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx[k]) ==
                        idx.begin() + static_cast<std::ptrdiff_t>(k);
            }
        }
        const std::array<Correspondence, 4> sample{pairs[idx[0]], pairs[idx[1]], pairs[idx[2]], pairs[idx[3]]};
        Homography h;
        try {
            h = estimate_dlt(sample);
        } catch (const Error&) {
            continue;
        }
        const std::size_t c = count_inliers(h);
        if (!best || c > best_count) {
            best = h;
            best_count = c;
            if (c == n) break;
        }
    }
    if (!best) throw Error(ErrorCode::DegenerateConfiguration, "no minimal sample produced a model");

    std::vector<Correspondence> consensus;
    for (const auto& p : pairs) {
        if (reprojection_error(*best, p) <= options.inlier_tol) consensus.push_back(p);
    }
    Homography refined = *best;
    try {
        refined = estimate_dlt(consensus);
    } catch (const Error&) {
        // Keep the minimal-sample model when the consensus set cannot be refit.
    }

    RansacResult result;
    result.homography = refined;
    result.inliers.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.inliers[i] = reprojection_error(refined, pairs[i]) <= options.inlier_tol;
        result.inlier_count += result.inliers[i] ? 1 : 0;
    }
    result.reliable = result.inlier_count > 4;
    return result;
}

Detection transform(const Detection& det, const Homography& h) {
    Detection out = det;
    for (Keypoint& kp : out.keypoints) {
        if (!kp.present) continue;
        const Point2 p = h.apply(kp.position());
        kp.x = p.x;
        kp.y = p.y;
    }
    out.bbox = derive_bbox(out.keypoints);
    return out;
}

StabilizedSequence stabilize(const Sequence& seq, std::span<const Homography> pair_homographies) {
    const std::size_t frames = seq.frames.size();
    if (frames > 0 && pair_homographies.size() != frames - 1) {
        throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(frames - 1) + " pair homographies, got " +
                                                    std::to_string(pair_homographies.size()));
    }
    StabilizedSequence out;
    out.original = seq;
    out.stabilized = seq;
    out.to_reference.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        out.to_reference.push_back(i == 0 ? Homography::identity()
                                          : compose(out.to_reference[i - 1], pair_homographies[i - 1]));
        for (Detection& d : out.stabilized.frames[i].detections) d = transform(d, out.to_reference[i]);
    }
    return out;
}

} // namespace courttrack
