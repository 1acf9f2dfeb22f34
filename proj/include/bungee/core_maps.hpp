#pragma once

// Elementary maps of the construction: the corridor map psi on the tapering
// strip T0 = {y > y0, |x| < 1/y}, the two bend maps from the rectangle
// A = [0,1] x [0,2] onto half-annuli, and the lower-half-plane perturbation g.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <type_traits>

#include "bungee/point.hpp"

namespace bungee {

struct StripParams {
    double y0 = 101.0;

    StripParams() = default;
    explicit StripParams(double y0_) : y0(y0_) {
        if (!(y0_ > 100.0) || !std::isfinite(y0_)) throw DomainError("strip height y0 must exceed 100");
    }
};

struct PerturbParams {
    double delta = 0.01;

    PerturbParams() = default;
    explicit PerturbParams(double delta_) : delta(delta_) {
        if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw DomainError("perturbation delta must be positive");
    }
};

enum class Membership { interior, boundary, outside };

/// Exact (epsilon-free) classification against the closed strip.
inline Membership in_strip(Point p, const StripParams& sp) {
    const double w = 1.0 / p.y;
    if (p.y > sp.y0 && std::fabs(p.x) < w) return Membership::interior;
    if (p.y >= sp.y0 && std::fabs(p.x) == w) return Membership::boundary;
    if (p.y == sp.y0 && std::fabs(p.x) <= w) return Membership::boundary;
    return Membership::outside;
}

/// The defining formula of psi with no domain check. Finite-difference probes
/// need to evaluate it slightly outside the strip.
inline Point psi_formula(Point p) {
    const double h = p.y + 1.0 / p.y - std::fabs(p.x);
    return {p.x * p.y / h, h};
}

inline Point psi_apply(Point p, const StripParams& sp) {
    if (in_strip(p, sp) == Membership::outside) throw DomainError("psi: point outside the closed strip");
    return psi_formula(p);
}

/// Closed-form inverse: x'y' = xy is invariant, so y solves y^2 - y'y + (1 - |xy|) = 0.
inline Point psi_inverse(Point q, const StripParams& sp) {
    if (in_strip(q, sp) == Membership::outside) throw DomainError("psi inverse: point outside the closed strip");
    const double u = std::min(std::fabs(q.x * q.y), 1.0);
    const double disc = q.y * q.y - 4.0 * (1.0 - u);
    if (disc < 0.0) throw DomainError("psi inverse: point not in the image of psi");
    double y = 0.5 * (q.y + std::sqrt(disc));
    if (y < sp.y0) {
        if (y < sp.y0 * (1.0 - 1e-12)) throw DomainError("psi inverse: point not in the image of psi");
        y = sp.y0;
    }
    return {std::copysign(u, q.x) / y, y};
}

namespace detail {
inline void require_in_rectangle(Point p) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 2.0))
        throw DomainError("bend map: point outside the rectangle [0,1] x [0,2]");
}

// Angle in (-pi/2, 3pi/2]; keeps both real-axis ends of a closed upper
// half-annulus on the correct side when rounding leaves Im slightly negative.
inline double upper_angle(double x, double y) {
    double a = std::atan2(y, x);
    if (a <= -0.5 * std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}
}  // namespace detail

/// nu_r(x+iy) = 3/2 + (x - 3/2) e^{-i pi y / 2}. Unchecked variant for inner loops.
inline Point nu_r_formula(Point p) {
    const double th = -0.5 * std::numbers::pi * p.y;
    const double r = p.x - 1.5;
    return {1.5 + r * std::cos(th), r * std::sin(th)};
}

/// nu_l(x+iy) = -1/2 + (x + 1/2) e^{i pi y / 2}.
inline Point nu_l_formula(Point p) {
    const double th = 0.5 * std::numbers::pi * p.y;
    const double r = p.x + 0.5;
    return {-0.5 + r * std::cos(th), r * std::sin(th)};
}

inline Point nu_r_inverse_formula(Point q) {
    const double dx = q.x - 1.5, dy = q.y;
    const double r = std::hypot(dx, dy);
    return {1.5 - r, 2.0 - 2.0 * detail::upper_angle(dx, dy) / std::numbers::pi};
}

inline Point nu_l_inverse_formula(Point q) {
    const double dx = q.x + 0.5, dy = q.y;
    const double r = std::hypot(dx, dy);
    return {r - 0.5, 2.0 * detail::upper_angle(dx, dy) / std::numbers::pi};
}

/// Rounding allowance for images of the rectangle's own edges.
inline constexpr double kAnnulusSlack = 1e-12;

inline Point nu_r_apply(Point p) {
    detail::require_in_rectangle(p);
    return nu_r_formula(p);
}

inline Point nu_l_apply(Point p) {
    detail::require_in_rectangle(p);
    return nu_l_formula(p);
}

inline Point nu_r_inverse(Point q) {
    const double r = std::hypot(q.x - 1.5, q.y);
    if (q.y < -kAnnulusSlack || r < 0.5 - kAnnulusSlack || r > 1.5 + kAnnulusSlack)
        throw DomainError("nu_r inverse: point outside the half-annulus");
    return nu_r_inverse_formula(q);
}

inline Point nu_l_inverse(Point q) {
    const double r = std::hypot(q.x + 0.5, q.y);
    if (q.y < -kAnnulusSlack || r < 0.5 - kAnnulusSlack || r > 1.5 + kAnnulusSlack)
        throw DomainError("nu_l inverse: point outside the half-annulus");
    return nu_l_inverse_formula(q);
}

/// Re(-z^2) above this overflows exp; such orbits are treated as escaped.
inline constexpr double kExpOverflowExponent = 700.0;

/// The perturbation g: identity on Im z >= 0, z - delta Im(z) e^{-z^2} on
/// -1 <= Im z < 0, z + delta e^{-z^2} below. nullopt is the escape sentinel.
inline std::optional<Point> g_apply(Point z, const PerturbParams& pp) {
    if (z.y >= 0.0) return z;
    const std::complex<double> w = z.as_complex();
    const std::complex<double> e2 = -(w * w);
    if (e2.real() > kExpOverflowExponent) return std::nullopt;
    const std::complex<double> e = std::exp(e2);
    const std::complex<double> out = (z.y >= -1.0) ? w - pp.delta * z.y * e : w + pp.delta * e;
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) return std::nullopt;
    return Point::from_complex(out);
}

// ---------------------------------------------------------------------------
// Local dilatation probe

struct Dilatation {
    double K = 1.0;    ///< largest sigma1/sigma2 over the probe's one-sided Jacobians; +inf if degenerate
    double det = 1.0;  ///< smallest Jacobian determinant seen
    int det_sign = 1;  ///< +1 all positive, -1 all negative, 0 mixed or degenerate
};

struct Jacobian2 {
    double a, b, c, d;  // [[a, b], [c, d]], columns are d/dx and d/dy

    double det() const { return a * d - b * c; }

    std::array<double, 2> singular_values() const {
        const double e = 0.5 * (a + d), f = 0.5 * (a - d);
        const double g = 0.5 * (c + b), h = 0.5 * (c - b);
        const double q = std::hypot(e, h), r = std::hypot(f, g);
        return {q + r, std::fabs(q - r)};
    }

    double dilatation() const {
        const auto [s1, s2] = singular_values();
        if (!(s1 > 0.0) || s2 <= s1 * 1e-14) return std::numeric_limits<double>::infinity();
        return s1 / s2;
    }
};

inline double default_fd_step(Point p) { return 1e-4 * std::max(1.0, p.modulus()); }

namespace detail {
template <class Map>
std::optional<Point> evaluate(const Map& map, Point p) {
    using R = std::invoke_result_t<const Map&, Point>;
    if constexpr (std::is_same_v<std::decay_t<R>, std::optional<Point>>) {
        return map(p);
    } else {
        return std::optional<Point>(map(p));
    }
}
}  // namespace detail

/// Finite-difference dilatation at p from the cross of four points at
/// distance `step`. Each quadrant (forward/backward in x, forward/backward in
/// y) gives a one-sided Jacobian; the result is the worst of the four, so the
/// probe sees both sides of a crease such as |x| = 0 in psi. Offsets are
/// the representable differences (p.x + step) - p.x, which makes the
/// identity report exactly K = 1.
template <class Map>
Dilatation local_dilatation(const Map& map, Point p, double step) {
    if (!(step > 0.0)) throw DomainError("local_dilatation: step must be positive");
    constexpr double inf = std::numeric_limits<double>::infinity();
    const Point px{p.x + step, p.y}, mx{p.x - step, p.y};
    const Point py{p.x, p.y + step}, my{p.x, p.y - step};
    const auto f0 = detail::evaluate(map, p);
    const auto fpx = detail::evaluate(map, px), fmx = detail::evaluate(map, mx);
    const auto fpy = detail::evaluate(map, py), fmy = detail::evaluate(map, my);
    if (!f0 || !fpx || !fmx || !fpy || !fmy) return {inf, 0.0, 0};

    const double hpx = px.x - p.x, hmx = p.x - mx.x;
    const double hpy = py.y - p.y, hmy = p.y - my.y;
    const Point dxf = (1.0 / hpx) * (*fpx - *f0), dxb = (1.0 / hmx) * (*f0 - *fmx);
    const Point dyf = (1.0 / hpy) * (*fpy - *f0), dyb = (1.0 / hmy) * (*f0 - *fmy);

    Dilatation out{1.0, inf, 1};
    bool any_pos = false, any_neg = false;
    for (const Point& dx : {dxf, dxb}) {
        for (const Point& dy : {dyf, dyb}) {
            const Jacobian2 j{dx.x, dy.x, dx.y, dy.y};
            const double k = j.dilatation();
            const double det = j.det();
            if (!(k <= out.K)) out.K = k;  // also propagates NaN as worst
            out.det = std::min(out.det, det);
            any_pos |= det > 0.0;
            any_neg |= det < 0.0;
            if (det == 0.0 || !std::isfinite(det)) any_pos = any_neg = true;
        }
    }
    if (std::isnan(out.K)) out.K = inf;
    out.det_sign = (any_pos && any_neg) ? 0 : (any_neg ? -1 : 1);
    return out;
}

template <class Map>
Dilatation local_dilatation(const Map& map, Point p) {
    return local_dilatation(map, p, default_fd_step(p));
}

}  // namespace bungee
