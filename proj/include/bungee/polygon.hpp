#pragma once

#include <span>
#include <vector>

#include "bungee/point.hpp"

namespace bungee::polygon {

inline double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline int orientation_sign(Point o, Point a, Point b) {
    const double c = cross(o, a, b);
    return (c > 0.0) - (c < 0.0);
}

inline bool on_segment(Point p, Point a, Point b) {
    return std::fmin(a.x, b.x) <= p.x && p.x <= std::fmax(a.x, b.x) && std::fmin(a.y, b.y) <= p.y &&
           p.y <= std::fmax(a.y, b.y);
}

/// Closed segments [a,b] and [c,d] share a point.
inline bool segments_intersect(Point a, Point b, Point c, Point d) {
    const int o1 = orientation_sign(a, b, c), o2 = orientation_sign(a, b, d);
    const int o3 = orientation_sign(c, d, a), o4 = orientation_sign(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

inline Box bounds(std::span<const Point> poly) {
    Box b{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
    for (const Point& p : poly) b = b.united({p.x, p.y, p.x, p.y});
    return b;
}

/// Even-odd ray casting; the polygon is implicitly closed.
inline bool contains(std::span<const Point> poly, Point p) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

/// True when two simple closed polygons share no point (boundaries included).
inline bool disjoint(std::span<const Point> p, std::span<const Point> q) {
    if (p.size() < 3 || q.size() < 3) return true;
    const Box bp = bounds(p), bq = bounds(q);
    if (!bp.overlaps(bq)) return true;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Point a = p[i], b = p[(i + 1) % p.size()];
        const Box eb{std::fmin(a.x, b.x), std::fmin(a.y, b.y), std::fmax(a.x, b.x), std::fmax(a.y, b.y)};
        if (!eb.overlaps(bq)) continue;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const Point c = q[j], d = q[(j + 1) % q.size()];
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return !contains(p, q[0]) && !contains(q, p[0]);
}

}  // namespace bungee::polygon
