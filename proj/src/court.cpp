#include "courttrack/court.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <opencv2/imgproc.hpp>

#include "courttrack/error.hpp"

namespace courttrack {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
    a = std::fmod(a, kPi);
    if (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

double angle_diff(double a, double b) {
    const double d = std::fabs(wrap_pi(a) - wrap_pi(b));
    return std::min(d, kPi - d);
}

} // namespace

double LineSegment::orientation() const {
    const Point2 d = p1 - p0;
    return wrap_pi(std::atan2(d.y, d.x));
}

Point2 BoundaryLine::normal() const { return {-std::sin(theta), std::cos(theta)}; }

double BoundaryLine::offset() const { return dot(normal(), a); }

bool BoundaryLine::spans_left_right() const {
    return (border_a == Border::Left && border_b == Border::Right) ||
           (border_a == Border::Right && border_b == Border::Left);
}

std::optional<BoundaryLine> clip_to_frame(Point2 p, double theta, int width, int height) {
    theta = wrap_pi(theta);
    const Point2 d{std::cos(theta), std::sin(theta)};
    const double w = width, h = height;
    constexpr double kEps = 1e-9;

    struct Hit {
        double t;
        Point2 q;
        Border border;
    };
    std::vector<Hit> hits;
    auto try_x = [&](double x, Border border) {
        if (std::fabs(d.x) < 1e-15) return;
        const double t = (x - p.x) / d.x;
        const double y = p.y + t * d.y;
        if (y >= -kEps && y <= h + kEps) hits.push_back({t, {x, std::clamp(y, 0.0, h)}, border});
    };
    auto try_y = [&](double y, Border border) {
        if (std::fabs(d.y) < 1e-15) return;
        const double t = (y - p.y) / d.y;
        const double x = p.x + t * d.x;
        if (x >= -kEps && x <= w + kEps) hits.push_back({t, {std::clamp(x, 0.0, w), y}, border});
    };
    // Lateral borders first so that a crossing through a corner is labelled
    // Left/Right.
    try_x(0.0, Border::Left);
    try_x(w, Border::Right);
    try_y(0.0, Border::Top);
    try_y(h, Border::Bottom);

    std::vector<Hit> unique;
    for (const Hit& hit : hits) {
        const bool dup = std::any_of(unique.begin(), unique.end(),
                                     [&](const Hit& u) { return norm(u.q - hit.q) < 1e-7; });
        if (!dup) unique.push_back(hit);
    }
    if (unique.size() < 2) return std::nullopt;
    const auto [lo, hi] = std::minmax_element(unique.begin(), unique.end(),
                                              [](const Hit& x, const Hit& y) { return x.t < y.t; });
    BoundaryLine line;
    line.theta = theta;
    line.a = lo->q;
    line.b = hi->q;
    line.border_a = lo->border;
    line.border_b = hi->border;
    return line;
}

std::vector<LineSegment> detect_segments(const cv::Mat& bgr, const SegmentDetectorOptions& options) {
    if (bgr.empty()) throw Error(ErrorCode::InvalidArgument, "detect_segments: empty image");
    cv::Mat gray;
    if (bgr.channels() == 3) {
        cv::cvtColor(bgr, gray, cv::COLOR_BGR2GRAY);
    } else {
        gray = bgr;
    }
    gray.convertTo(gray, CV_64F);
    // Light smoothing so aliased staircase edges keep a coherent orientation.
    cv::GaussianBlur(gray, gray, cv::Size(0, 0), 1.0);
    cv::Mat gx, gy;
    cv::Sobel(gray, gx, CV_64F, 1, 0, 3, 0.25);
    cv::Sobel(gray, gy, CV_64F, 0, 1, 3, 0.25);

    const int w = gray.cols, h = gray.rows;
    std::vector<double> mag(static_cast<std::size_t>(w) * h);
    std::vector<double> angle(mag.size());
    std::vector<std::size_t> seeds;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double dx = gx.at<double>(y, x), dy = gy.at<double>(y, x);
            mag[i] = std::hypot(dx, dy);
            // Level-line direction, perpendicular to the gradient.
            angle[i] = wrap_pi(std::atan2(dy, dx) + kPi / 2);
            if (mag[i] >= options.grad_threshold) seeds.push_back(i);
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    std::vector<char> used(mag.size(), 0);
    std::vector<LineSegment> out;
    std::vector<std::size_t> region;
    for (std::size_t seed : seeds) {
        if (used[seed]) continue;
        region.clear();
        region.push_back(seed);
        used[seed] = 1;
        double c2 = std::cos(2 * angle[seed]), s2 = std::sin(2 * angle[seed]);
        double region_angle = angle[seed];
        for (std::size_t head = 0; head < region.size(); ++head) {
            const int px = static_cast<int>(region[head] % w), py = static_cast<int>(region[head] / w);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = px + dx, ny = py + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                    if (used[j] || mag[j] < options.grad_threshold) continue;
                    if (angle_diff(angle[j], region_angle) > options.angle_tolerance) continue;
                    used[j] = 1;
                    region.push_back(j);
                    c2 += std::cos(2 * angle[j]);
                    s2 += std::sin(2 * angle[j]);
                    region_angle = wrap_pi(0.5 * std::atan2(s2, c2));
                }
            }
        }
        if (region.size() < 2) continue;

        double wsum = 0.0, cx = 0.0, cy = 0.0;
        for (std::size_t i : region) {
            wsum += mag[i];
            cx += mag[i] * static_cast<double>(i % w);
            cy += mag[i] * static_cast<double>(i / w);
        }
        cx /= wsum;
        cy /= wsum;
        // Rectangle axis from the weighted inertia of the region.
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t i : region) {
            const double rx = static_cast<double>(i % w) - cx, ry = static_cast<double>(i / w) - cy;
            sxx += mag[i] * rx * rx;
            syy += mag[i] * ry * ry;
            sxy += mag[i] * rx * ry;
        }
        const double axis = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        const Point2 dir{std::cos(axis), std::sin(axis)};
        const Point2 perp{-dir.y, dir.x};
        double lo = 0.0, hi = 0.0, plo = 0.0, phi = 0.0;
        for (std::size_t i : region) {
            const Point2 r{static_cast<double>(i % w) - cx, static_cast<double>(i / w) - cy};
            lo = std::min(lo, dot(r, dir));
            hi = std::max(hi, dot(r, dir));
            plo = std::min(plo, dot(r, perp));
            phi = std::max(phi, dot(r, perp));
        }
        const double length = hi - lo;
        const double width = std::max(1.0, phi - plo + 1.0);
        if (length < options.min_length) continue;
        if (static_cast<double>(region.size()) / ((length + 1.0) * width) < options.min_density) continue;
        const Point2 c{cx, cy};
        out.push_back({c + lo * dir, c + hi * dir});
    }
    return out;
}

std::vector<BoundaryLine> join_segments(const std::vector<LineSegment>& segments, double angle_tol,
                                        double border_tol, const FrameMeta& frame) {
    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return segments[a].length() > segments[b].length(); });

    std::vector<BoundaryLine> lines;
    for (std::size_t idx : order) {
        const LineSegment& s = segments[idx];
        Point2 mid = 0.5 * (s.p0 + s.p1);
        mid.x = std::clamp(mid.x, 0.0, static_cast<double>(frame.width));
        mid.y = std::clamp(mid.y, 0.0, static_cast<double>(frame.height));
        auto line = clip_to_frame(mid, s.orientation(), frame.width, frame.height);
        if (!line) continue;
        line->support = s.length();

        bool merged = false;
        for (BoundaryLine& l : lines) {
            if (angle_diff(l.theta, line->theta) > angle_tol) continue;
            const double same = std::max(norm(l.a - line->a), norm(l.b - line->b));
            const double swapped = std::max(norm(l.a - line->b), norm(l.b - line->a));
            if (std::min(same, swapped) <= border_tol) {
                l.support += line->support;
                merged = true;
                break;
            }
        }
        if (!merged) lines.push_back(*line);
    }
    return lines;
}

DominantOrientations dominant_orientations(const std::vector<BoundaryLine>& lines) {
    if (lines.empty()) throw Error(ErrorCode::NoSidelineCandidate, "no boundary lines");
    constexpr double kVoteTolerance = 2.0 * kPi / 180.0;
    auto winner = [&](bool sideline) -> std::optional<double> {
        std::optional<double> best;
        double best_vote = -1.0;
        for (const auto& l : lines) {
            if (l.spans_left_right() != sideline) continue;
            double vote = 0.0;
            for (const auto& m : lines) {
                if (m.spans_left_right() == sideline && angle_diff(l.theta, m.theta) <= kVoteTolerance) {
                    vote += m.support;
                }
            }
            if (vote > best_vote) {
                best_vote = vote;
                best = l.theta;
            }
        }
        return best;
    };
    return {winner(true), winner(false)};
}

bool HsvFilter::accepts(double hue, double sat, double val) const {
    const bool hue_ok = hue_min <= hue_max ? (hue >= hue_min && hue <= hue_max) : (hue >= hue_min || hue <= hue_max);
    return hue_ok && sat >= sat_min && val >= val_min;
}

cv::Mat hsv_mask(const cv::Mat& bgr, const HsvFilter& filter) {
    if (bgr.empty() || bgr.type() != CV_8UC3) throw Error(ErrorCode::InvalidArgument, "hsv_mask expects 8-bit BGR");
    // Colors repeat heavily in court images; memoize by packed BGR value.
    std::vector<std::int8_t> memo(1u << 24, -1);
    cv::Mat mask(bgr.rows, bgr.cols, CV_8U);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        auto* out = mask.ptr<std::uint8_t>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            const cv::Vec3b px = row[x];
            const std::uint32_t key = (static_cast<std::uint32_t>(px[2]) << 16) | (px[1] << 8) | px[0];
            if (memo[key] < 0) {
                const double r = px[2] / 255.0, g = px[1] / 255.0, b = px[0] / 255.0;
                const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
                const double delta = mx - mn;
                double hue = 0.0;
                if (delta > 0.0) {
                    if (mx == r) {
                        hue = 60.0 * std::fmod((g - b) / delta, 6.0);
                    } else if (mx == g) {
                        hue = 60.0 * ((b - r) / delta + 2.0);
                    } else {
                        hue = 60.0 * ((r - g) / delta + 4.0);
                    }
                    if (hue < 0.0) hue += 360.0;
                }
                const double sat = mx > 0.0 ? delta / mx : 0.0;
                memo[key] = filter.accepts(hue, sat, mx) ? 1 : 0;
            }
            out[x] = memo[key] ? 255 : 0;
        }
    }
    return mask;
}

namespace {

/// Row-wise prefix sums of a binary mask for band counting.
struct MaskIntegral {
    int width = 0;
    int height = 0;
    std::vector<long long> prefix;  // (width + 1) entries per row

    explicit MaskIntegral(const cv::Mat& mask) : width(mask.cols), height(mask.rows) {
        prefix.assign(static_cast<std::size_t>(width + 1) * height, 0);
        for (int y = 0; y < height; ++y) {
            const auto* row = mask.ptr<std::uint8_t>(y);
            long long* p = &prefix[static_cast<std::size_t>(y) * (width + 1)];
            for (int x = 0; x < width; ++x) p[x + 1] = p[x] + (row[x] ? 1 : 0);
        }
    }

    long long count(int y, long x0, long x1) const {  // [x0, x1)
        x0 = std::clamp<long>(x0, 0, width);
        x1 = std::clamp<long>(x1, 0, width);
        if (x1 <= x0) return 0;
        const long long* p = &prefix[static_cast<std::size_t>(y) * (width + 1)];
        return p[x1] - p[x0];
    }
};

struct BandCount {
    long long filter = 0;
    long long area = 0;
};

/// Pixels whose centers satisfy lo <= n . (x + 0.5, y + 0.5) < hi.
BandCount band(const MaskIntegral& m, Point2 n, double lo, double hi) {
    BandCount out;
    for (int y = 0; y < m.height; ++y) {
        const double c = n.y * (y + 0.5);
        long x0 = 0, x1 = 0;
        if (std::fabs(n.x) < 1e-12) {
            if (c < lo || c >= hi) continue;
            x0 = 0;
            x1 = m.width;
        } else if (n.x > 0.0) {
            x0 = static_cast<long>(std::ceil((lo - c) / n.x - 0.5));
            x1 = static_cast<long>(std::ceil((hi - c) / n.x - 0.5));
        } else {
            x0 = static_cast<long>(std::floor((hi - c) / n.x - 0.5)) + 1;
            x1 = static_cast<long>(std::floor((lo - c) / n.x - 0.5)) + 1;
        }
        x0 = std::clamp<long>(x0, 0, m.width);
        x1 = std::clamp<long>(x1, 0, m.width);
        if (x1 <= x0) continue;
        out.filter += m.count(y, x0, x1);
        out.area += x1 - x0;
    }
    return out;
}

} // namespace

SweepResult sweep_mask(const cv::Mat& mask, double orientation, BoundaryKind kind, const SweepOptions& options) {
    if (mask.empty() || mask.type() != CV_8U) throw Error(ErrorCode::DegenerateImage, "sweep needs a non-empty mask");
    if (!(options.offset > 0.0) || !(options.step > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sweep offset and step must be positive");
    }
    const double theta = wrap_pi(orientation);
    // Sweep axis: downwards for sidelines, rightwards for baselines.
    Point2 n{-std::sin(theta), std::cos(theta)};
    const bool flip = kind == BoundaryKind::Sideline ? (n.y < 0.0 || (n.y == 0.0 && n.x < 0.0))
                                                     : (n.x < 0.0 || (n.x == 0.0 && n.y < 0.0));
    if (flip) n = -1.0 * n;

    const double w = mask.cols, h = mask.rows;
    double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min;
    for (Point2 corner : {Point2{0, 0}, Point2{w, 0}, Point2{0, h}, Point2{w, h}}) {
        s_min = std::min(s_min, dot(n, corner));
        s_max = std::max(s_max, dot(n, corner));
    }
    std::vector<double> candidates;
    if (!options.reverse) {
        for (double s = s_min + options.offset; s + options.offset <= s_max + 1e-9; s += options.step) {
            candidates.push_back(s);
        }
    } else {
        for (double s = s_max - options.offset; s - options.offset >= s_min - 1e-9; s -= options.step) {
            candidates.push_back(s);
        }
    }
    if (candidates.empty()) throw Error(ErrorCode::DegenerateImage, "frame too small for the sweep bands");

    const MaskIntegral integral(mask);
    SweepResult result;
    long long best = std::numeric_limits<long long>::min();
    BandCount best_before, best_after;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const double s = candidates[k];
        const BandCount before = band(integral, n, s - options.offset, s);
        const BandCount after = band(integral, n, s, s + options.offset);
        long long score = 0;
        switch (options.polarity) {
        case SweepPolarity::Absolute: score = std::llabs(before.filter - after.filter); break;
        case SweepPolarity::FilterBefore: score = before.filter - after.filter; break;
        case SweepPolarity::FilterAfter: score = after.filter - before.filter; break;
        }
        result.scores.push_back(score);
        if (score > best) {
            best = score;
            result.index = k;
            best_before = before;
            best_after = after;
        }
    }
    const double s = candidates[result.index];
    auto line = clip_to_frame(s * n, theta, mask.cols, mask.rows);
    if (!line) throw Error(ErrorCode::DegenerateImage, "best sweep line misses the frame");
    result.line = *line;
    result.line.support = 0.0;
    // Filter pixels mark the court; it lies on the side with more of them.
    const int side_along_n = best_after.filter >= best_before.filter ? 1 : -1;
    result.line.court_side = flip ? -side_along_n : side_along_n;
    result.count_before = best_before.filter;
    result.count_after = best_after.filter;
    result.difference = best;
    result.band_area = best_before.area;
    result.low_confidence = static_cast<double>(std::llabs(best)) < 0.05 * static_cast<double>(result.band_area);
    return result;
}

SweepResult sweep_boundary(const cv::Mat& bgr, double orientation, const HsvFilter& filter, BoundaryKind kind,
                           const SweepOptions& options) {
    if (bgr.empty()) throw Error(ErrorCode::DegenerateImage, "sweep needs a non-empty image");
    return sweep_mask(hsv_mask(bgr, filter), orientation, kind, options);
}

double CourtPolygon::area() const {
    double twice = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        twice += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    }
    return 0.5 * std::fabs(twice);
}

bool CourtPolygon::contains(Point2 p, double eps) const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices[i], b = vertices[(i + 1) % n];
        const Point2 ab = b - a;
        const double len2 = dot(ab, ab);
        const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
        if (norm(p - (a + t * ab)) <= eps) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices[i], b = vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

namespace {

/// Keeps the part of `poly` where side * (normal . p - offset) >= 0.
std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, Point2 normal, double offset, int side) {
    std::vector<Point2> out;
    const std::size_t n = poly.size();
    auto value = [&](Point2 p) { return side * (dot(normal, p) - offset); };
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 cur = poly[i], nxt = poly[(i + 1) % n];
        const double vc = value(cur), vn = value(nxt);
        if (vc >= 0.0) out.push_back(cur);
        if ((vc >= 0.0) != (vn >= 0.0)) {
            const double t = vc / (vc - vn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

int infer_side(const BoundaryLine& line, Point2 ref) {
    const double v = dot(line.normal(), ref) - line.offset();
    if (std::fabs(v) < 1e-9) throw Error(ErrorCode::EmptyPolygon, "boundary lines coincide");
    return v > 0.0 ? 1 : -1;
}

} // namespace

CourtPolygon frame_polygon(const FrameMeta& frame) {
    const double w = frame.width, h = frame.height;
    return {{{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}}};
}

CourtPolygon court_polygon(const BoundaryLine& top_side, const BoundaryLine& bottom_side,
                           const std::optional<BoundaryLine>& baseline, const FrameMeta& frame) {
    if (frame.width <= 0 || frame.height <= 0) throw Error(ErrorCode::InvalidArgument, "frame size must be positive");
    const Point2 top_mid = 0.5 * (top_side.a + top_side.b);
    const Point2 bottom_mid = 0.5 * (bottom_side.a + bottom_side.b);
    const int top = top_side.court_side.value_or(0) != 0 ? *top_side.court_side : infer_side(top_side, bottom_mid);
    const int bottom =
        bottom_side.court_side.value_or(0) != 0 ? *bottom_side.court_side : infer_side(bottom_side, top_mid);

    std::vector<Point2> poly = frame_polygon(frame).vertices;
    poly = clip_half_plane(poly, top_side.normal(), top_side.offset(), top);
    poly = clip_half_plane(poly, bottom_side.normal(), bottom_side.offset(), bottom);
    if (baseline) {
        const int base = baseline->court_side.value_or(0) != 0 ? *baseline->court_side
                                                               : infer_side(*baseline, 0.5 * (top_mid + bottom_mid));
        poly = clip_half_plane(poly, baseline->normal(), baseline->offset(), base);
    }

    CourtPolygon out;
    for (const Point2& p : poly) {
        if (out.vertices.empty() || norm(out.vertices.back() - p) > 1e-9) out.vertices.push_back(p);
    }
    while (out.vertices.size() > 1 && norm(out.vertices.front() - out.vertices.back()) <= 1e-9) {
        out.vertices.pop_back();
    }
    if (out.vertices.size() < 3 || out.area() < 1e-9) throw Error(ErrorCode::EmptyPolygon, "court polygon is empty");
    return out;
}

std::vector<Detection> filter_by_court(const std::vector<Detection>& detections, const CourtPolygon& polygon) {
    std::vector<Detection> out;
    for (const auto& d : detections) {
        if (polygon.contains(d.bbox.bottom_center())) out.push_back(d);
    }
    return out;
}

} // namespace courttrack
