#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

// Used on the per-step helpers of the orbit loop.
#if defined(__GNUC__) || defined(__clang__)
#define BUNGEE_FORCE_INLINE [[gnu::always_inline]] inline
#else
#define BUNGEE_FORCE_INLINE inline
#endif

namespace bungee {

/// A point of the plane, identified with x + iy.
struct Point {
    double x = 0.0;
    double y = 0.0;

    constexpr Point() = default;
    constexpr Point(double x_, double y_) : x(x_), y(y_) {}

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator-(Point a) { return {-a.x, -a.y}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point a, Point b) = default;

    double modulus() const { return std::sqrt(x * x + y * y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }

    std::complex<double> as_complex() const { return {x, y}; }
    static Point from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned box; empty when lo > hi.
struct Box {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    bool contains(Point p, double slack = 0.0) const {
        return p.x >= x_min - slack && p.x <= x_max + slack && p.y >= y_min - slack &&
               p.y <= y_max + slack;
    }
    Box united(const Box& o) const {
        return {std::fmin(x_min, o.x_min), std::fmin(y_min, o.y_min), std::fmax(x_max, o.x_max),
                std::fmax(y_max, o.y_max)};
    }
    bool overlaps(const Box& o) const {
        return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
    }
};

/// Raised when a point lies outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace bungee
