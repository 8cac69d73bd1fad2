#pragma once

#include <algorithm>
#include <cmath>

namespace courttrack {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

/// Axis-aligned box in pixel coordinates, inclusive min/max corners.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point2 centroid() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
    /// Feet position of a standing player.
    Point2 bottom_center() const { return {0.5 * (x_min + x_max), y_max}; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

} // namespace courttrack
