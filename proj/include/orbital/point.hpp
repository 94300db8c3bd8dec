#pragma once

#include <cmath>

namespace orbital {

/// A point of the state space, restricted here to R^1 or R^2. For
/// one-dimensional measures y is fixed at zero.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline bool lex_less(const Point& a, const Point& b) noexcept {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
}

inline bool point_finite(const Point& p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double max_norm_dist(const Point& a, const Point& b) noexcept {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

inline double dot(const Point& a, const Point& b) noexcept {
    return a.x * b.x + a.y * b.y;
}

}  // namespace orbital
