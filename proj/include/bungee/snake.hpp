#pragma once

// The coiled snake: T0 is cut by height into bends n = 1, 2, ..., each made of
// four pieces S1 (upward strip of height t_n), S2 (right-turning top bend),
// S3 (downward strip, half-turned) and S4 (bottom bend, half-turned). phi maps
// each piece rigidly or through a bend map; translations are found by gluing
// every piece's entry edge onto its predecessor's exit edge.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bungee/core_maps.hpp"
#include "bungee/point.hpp"
#include "bungee/polygon.hpp"

namespace bungee {

class TableExhausted : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class NotInSnake : public DomainError {
public:
    using DomainError::DomainError;
};

/// s_n and t_n, cached for n = 1 .. n_max + 1.
class SnakeSequences {
public:
    using HeightRule = std::function<double(int)>;

    /// `heights` overrides t_n = 2^n; only test code should need it.
    SnakeSequences(double y0, int n_max, HeightRule heights = {}) : y0_(y0) {
        if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
        const int count = n_max + 1;
        t_.resize(count);
        s_.resize(count);
        for (int n = 1; n <= count; ++n) t_[n - 1] = heights ? heights(n) : std::ldexp(1.0, n);
        s_[0] = y0;
        for (int n = 1; n < count; ++n) s_[n] = next_s(s_[n - 1], t_[n - 1]);
    }

    /// One step of the recurrence, evaluated left to right as displayed:
    /// s + 2t + 4/(s+t) + 4/(s + 2t + 4/(s+t)).
    static double next_s(double s, double t) {
        const double c = s + 2.0 * t + 4.0 / (s + t);
        return c + 4.0 / c;
    }

    double y0() const { return y0_; }
    int capacity() const { return static_cast<int>(s_.size()); }
    double s(int n) const { return s_.at(check(n)); }
    double t(int n) const { return t_.at(check(n)); }

private:
    std::size_t check(int n) const {
        if (n < 1 || n > capacity()) throw TableExhausted("sequence index " + std::to_string(n) + " out of range");
        return static_cast<std::size_t>(n - 1);
    }

    double y0_;
    std::vector<double> s_;
    std::vector<double> t_;
};

enum class SegmentKind { S1 = 0, S2 = 1, S3 = 2, S4 = 3 };

inline const char* to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::S1: return "S1";
        case SegmentKind::S2: return "S2";
        case SegmentKind::S3: return "S3";
        case SegmentKind::S4: return "S4";
    }
    return "?";
}

struct SegmentRef {
    int n = 1;
    SegmentKind kind = SegmentKind::S1;

    friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
    std::size_t index() const { return 4 * static_cast<std::size_t>(n - 1) + static_cast<std::size_t>(kind); }
    static SegmentRef from_index(std::size_t i) {
        return {static_cast<int>(i / 4) + 1, static_cast<SegmentKind>(i % 4)};
    }
};

enum class Orientation { upright, half_turn };
enum class Bend { none, right, left };

/// v -> translation + R (post_scale * nu(scale * (v + pre_translation)))
/// where nu is the selected bend map (or nothing) and R the orientation.
struct PlacementTransform {
    Bend bend = Bend::none;
    Point pre_translation{};
    double scale = 1.0;
    double post_scale = 1.0;
    Orientation orientation = Orientation::upright;
    Point translation{};

    BUNGEE_FORCE_INLINE Point local(Point p) const {
        Point v = p;
        if (bend != Bend::none) {
            const Point w{(p.x + pre_translation.x) * scale, (p.y + pre_translation.y) * scale};
            const Point b = bend == Bend::right ? nu_r_formula(w) : nu_l_formula(w);
            v = {b.x * post_scale, b.y * post_scale};
        }
        return orientation == Orientation::half_turn ? -v : v;
    }

    BUNGEE_FORCE_INLINE Point apply(Point p) const { return local(p) + translation; }

    Point inverse(Point q) const {
        Point v = q - translation;
        if (orientation == Orientation::half_turn) v = -v;
        if (bend != Bend::none) {
            const Point w{v.x / post_scale, v.y / post_scale};
            const Point a = bend == Bend::right ? nu_r_inverse_formula(w) : nu_l_inverse_formula(w);
            v = {a.x / scale - pre_translation.x, a.y / scale - pre_translation.y};
        }
        return v;
    }
};

struct SegmentRecord {
    SegmentRef ref;
    double y_lo = 0.0;
    double y_hi = 0.0;
    PlacementTransform placement;
    Box image_bbox;

    /// Straightened-coordinate distance from the closed piece {y_lo <= y <= y_hi, |x| <= 1/y}.
    double violation(Point p) const {
        const double dy = std::max({0.0, y_lo - p.y, p.y - y_hi});
        const double yc = std::clamp(p.y, y_lo, y_hi);
        const double dx = std::max(0.0, std::fabs(p.x) - 1.0 / yc);
        return std::max(dx, dy);
    }

    Point clamp(Point p) const {
        const double y = std::clamp(p.y, y_lo, y_hi);
        const double w = 1.0 / y;
        return {std::clamp(p.x, -w, w), y};
    }
};

struct Located {
    Point w;  ///< straightened preimage
    SegmentRef ref;
};

class SnakeGeometry {
public:
    static constexpr int kDefaultMaxBends = 24;

    explicit SnakeGeometry(StripParams sp = {}, int n_max = kDefaultMaxBends,
                           SnakeSequences::HeightRule heights = {})
        : params_(sp), n_max_(n_max), seq_(sp.y0, n_max, std::move(heights)) {}

    SnakeGeometry(const SnakeGeometry&) = delete;
    SnakeGeometry& operator=(const SnakeGeometry&) = delete;

    const StripParams& params() const { return params_; }
    const SnakeSequences& sequences() const { return seq_; }
    int n_max() const { return n_max_; }

    int bends_built() const {
        std::shared_lock lock(mutex_);
        return static_cast<int>(table_.size() / 4);
    }

    /// (s_n, t_n); n may reach n_max + 1, whose s is the top of a full table.
    std::pair<double, double> sequences_get(int n) const { return {seq_.s(n), seq_.t(n)}; }

    void ensure_bends(int n) {
        if (n > n_max_) throw TableExhausted("snake table capped at " + std::to_string(n_max_) + " bends");
        {
            std::shared_lock lock(mutex_);
            if (static_cast<int>(table_.size() / 4) >= n) return;
        }
        std::unique_lock lock(mutex_);
        while (static_cast<int>(table_.size() / 4) < n) append_bend_locked();
    }

    void build_all() { ensure_bends(n_max_); }

    /// Straightened height of the built table's top (y0 when empty).
    double top() const {
        std::shared_lock lock(mutex_);
        return table_.empty() ? params_.y0 : table_.back().y_hi;
    }

    void ensure_height(double y) {
        int n = bends_built();
        while (n < n_max_ && top() < y) ensure_bends(++n);
        if (top() < y) throw TableExhausted("height beyond the snake table cap");
    }

    std::size_t segment_count() const {
        std::shared_lock lock(mutex_);
        return table_.size();
    }

    SegmentRecord segment(std::size_t i) const {
        std::shared_lock lock(mutex_);
        return table_.at(i);
    }

    std::vector<SegmentRecord> segments() const {
        std::shared_lock lock(mutex_);
        return {table_.begin(), table_.end()};
    }

    /// Index of the piece containing height y; a shared boundary belongs to the lower piece.
    std::size_t index_of_height(double y) {
        if (!(y >= params_.y0)) throw DomainError("height below the strip");
        ensure_height(y);
        std::shared_lock lock(mutex_);
        auto it = std::lower_bound(table_.begin(), table_.end(), y,
                                   [](const SegmentRecord& r, double v) { return r.y_hi < v; });
        return static_cast<std::size_t>(it - table_.begin());
    }

    SegmentRef segment_of_height(double y) { return SegmentRef::from_index(index_of_height(y)); }

    Point phi_apply(Point p) {
        if (in_strip(p, params_) == Membership::outside) throw DomainError("phi: point outside the closed strip");
        const std::size_t i = index_of_height(p.y);
        std::shared_lock lock(mutex_);
        return table_[i].placement.apply(p);
    }

    /// Point location in the built table. `hint` names a piece to try first.
    std::optional<Located> try_phi_inverse(Point q, std::size_t hint = 0) const {
        std::shared_lock lock(mutex_);
        if (table_.empty() || !bounds_.contains(q, 1e-12 * (1.0 + std::fabs(q.y)))) return std::nullopt;
        if (hint < table_.size()) {
            const SegmentRecord& r = table_[hint];
            if (r.image_bbox.contains(q)) {
                const Point w = r.placement.inverse(q);
                if (r.violation(w) == 0.0) return Located{w, r.ref};
            }
        }
        const SegmentRecord* best = nullptr;
        Point best_w;
        double best_v = 0.0;
        for (const SegmentRecord& r : table_) {
            if (!r.image_bbox.contains(q, 1e-12 * (1.0 + std::fabs(q.y)))) continue;
            const Point w = r.placement.inverse(q);
            const double v = r.violation(w);
            if (!best || v < best_v) {
                best = &r;
                best_w = w;
                best_v = v;
                if (v == 0.0) break;
            }
        }
        if (!best) return std::nullopt;
        if (best_v > acceptance_tolerance(best_w)) return std::nullopt;
        return Located{best->clamp(best_w), best->ref};
    }

    Located phi_inverse(Point q) const {
        auto r = try_phi_inverse(q);
        if (!r) throw NotInSnake("point is not in the snake image");
        return *r;
    }

    /// Bounding box of all built images.
    Box image_bounds() const {
        std::shared_lock lock(mutex_);
        return bounds_;
    }

    static double acceptance_tolerance(Point w) { return 1e-9 + 2e-15 * std::fabs(w.y); }

private:
    // Caller holds the unique lock.
    void append_bend_locked() {
        const int n = static_cast<int>(table_.size() / 4) + 1;
        const double s = seq_.s(n), t = seq_.t(n);
        const double a = s + t;                     // S1 | S2
        const double b = a + 4.0 / a;               // S2 | S3
        const double c = s + 2.0 * t + 4.0 / a;     // S3 | S4, as in the recurrence
        const double s_next = seq_.s(n + 1);        // S4 | next S1

        auto glue = [this](PlacementTransform& pt, double y_entry) {
            if (table_.empty()) return;  // S1 of the first bend is the identity
            const Point e{0.0, y_entry};
            pt.translation = table_.back().placement.apply(e) - pt.local(e);
        };
        auto push = [this](SegmentKind kind, int n_, double lo, double hi, PlacementTransform pt) {
            SegmentRecord r{{n_, kind}, lo, hi, pt, image_box(pt, lo, hi)};
            bounds_ = table_.empty() ? r.image_bbox : bounds_.united(r.image_bbox);
            table_.push_back(r);
        };

        PlacementTransform p1;
        glue(p1, s);
        push(SegmentKind::S1, n, s, a, p1);

        PlacementTransform p2{Bend::right, {1.0 / a, -a}, 0.5 * a, 2.0 / a, Orientation::upright, {}};
        glue(p2, a);
        push(SegmentKind::S2, n, a, b, p2);

        PlacementTransform p3{Bend::none, {}, 1.0, 1.0, Orientation::half_turn, {}};
        glue(p3, b);
        push(SegmentKind::S3, n, b, c, p3);

        PlacementTransform p4{Bend::left, {1.0 / c, -c}, 0.5 * c, 2.0 / c, Orientation::half_turn, {}};
        glue(p4, c);
        push(SegmentKind::S4, n, c, s_next, p4);
    }

    static Box image_box(const PlacementTransform& pt, double lo, double hi) {
        Box local;
        if (pt.bend == Bend::none) {
            local = {-1.0 / lo, lo, 1.0 / lo, hi};
        } else {
            // bounding box of the whole target half-annulus
            const double x0 = pt.bend == Bend::right ? 0.0 : -2.0;
            local = {x0 * pt.post_scale, 0.0, (x0 + 3.0) * pt.post_scale, 1.5 * pt.post_scale};
        }
        if (pt.orientation == Orientation::half_turn)
            local = {-local.x_max, -local.y_max, -local.x_min, -local.y_min};
        return {local.x_min + pt.translation.x, local.y_min + pt.translation.y, local.x_max + pt.translation.x,
                local.y_max + pt.translation.y};
    }

    StripParams params_;
    int n_max_;
    SnakeSequences seq_;
    mutable std::shared_mutex mutex_;
    std::deque<SegmentRecord> table_;
    Box bounds_{};
};

// ---------------------------------------------------------------------------
// Geometric verifiers

/// Largest disagreement between the two placements meeting at each shared height.
inline double verify_gluing(SnakeGeometry& snake, int n_max, int samples_per_edge) {
    if (n_max <= 0 || samples_per_edge <= 0) return 0.0;
    snake.ensure_bends(n_max);
    const auto table = snake.segments();
    const std::size_t count = 4 * static_cast<std::size_t>(n_max);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const SegmentRecord& lo = table[i];
        const SegmentRecord& hi = table[i + 1];
        const double y = lo.y_hi;
        const double w = 1.0 / y;
        for (int k = 0; k < samples_per_edge; ++k) {
            const double f = samples_per_edge == 1 ? 0.5 : static_cast<double>(k) / (samples_per_edge - 1);
            const Point p{-w + 2.0 * w * f, y};
            worst = std::max(worst, distance(lo.placement.apply(p), hi.placement.apply(p)));
        }
    }
    return worst;
}

/// Image of a piece's boundary, `per_side` samples on each of its four sides.
inline std::vector<Point> image_outline(const SegmentRecord& r, int per_side) {
    std::vector<Point> out;
    out.reserve(4 * static_cast<std::size_t>(per_side));
    auto y_at = [&](int k) { return r.y_lo + (r.y_hi - r.y_lo) * k / per_side; };
    for (int k = 0; k < per_side; ++k) {  // bottom, left to right
        const double w = 1.0 / r.y_lo;
        out.push_back(r.placement.apply({-w + 2.0 * w * k / per_side, r.y_lo}));
    }
    for (int k = 0; k < per_side; ++k) {  // right wall, upward
        const double y = y_at(k);
        out.push_back(r.placement.apply({1.0 / y, y}));
    }
    for (int k = 0; k < per_side; ++k) {  // top, right to left
        const double w = 1.0 / r.y_hi;
        out.push_back(r.placement.apply({w - 2.0 * w * k / per_side, r.y_hi}));
    }
    for (int k = 0; k < per_side; ++k) {  // left wall, downward
        const double y = y_at(per_side - k);
        out.push_back(r.placement.apply({-1.0 / y, y}));
    }
    return out;
}

struct DisjointLine {
    int n = 0;
    double s = 0.0;
    double t = 0.0;
    bool analytic = false;   ///< t_n < s_n, equivalently 2/s_n < 4/(s_n + t_n) is implied
    bool geometric = false;  ///< phi(S1_n), phi(S3_n), phi(S1_{n+1}) pairwise disjoint
    int samples_per_side = 0;
};

struct DisjointReport {
    std::vector<DisjointLine> lines;
    bool all_pass() const {
        return std::all_of(lines.begin(), lines.end(), [](const DisjointLine& l) { return l.analytic && l.geometric; });
    }
};

inline bool strips_separated(double s, double t) { return t < s; }

inline DisjointReport verify_disjoint(SnakeGeometry& snake, int n_max) {
    DisjointReport rep;
    if (n_max <= 0) return rep;
    const int built = std::min(n_max + 1, snake.n_max());
    snake.ensure_bends(built);
    const auto table = snake.segments();

    auto verdict = [&](int n, int per_side) {
        std::vector<std::vector<Point>> outlines;
        outlines.push_back(image_outline(table[SegmentRef{n, SegmentKind::S1}.index()], per_side));
        outlines.push_back(image_outline(table[SegmentRef{n, SegmentKind::S3}.index()], per_side));
        if (n + 1 <= built) outlines.push_back(image_outline(table[SegmentRef{n + 1, SegmentKind::S1}.index()], per_side));
        for (std::size_t i = 0; i < outlines.size(); ++i)
            for (std::size_t j = i + 1; j < outlines.size(); ++j)
                if (!polygon::disjoint(outlines[i], outlines[j])) return false;
        return true;
    };

    for (int n = 1; n <= n_max; ++n) {
        DisjointLine line;
        line.n = n;
        line.s = snake.sequences().s(n);
        line.t = snake.sequences().t(n);
        line.analytic = strips_separated(line.s, line.t);
        int per_side = 64;
        bool v = verdict(n, per_side);
        for (;;) {
            const bool next = verdict(n, 2 * per_side);
            per_side *= 2;
            if (next == v || per_side >= 1024) {
                v = next;
                break;
            }
            v = next;
        }
        line.geometric = v;
        line.samples_per_side = per_side;
        rep.lines.push_back(line);
    }
    return rep;
}

/// sup |Re| over image bounding boxes of the first n_max bends.
inline double real_part_bound(SnakeGeometry& snake, int n_max) {
    if (n_max <= 0) return 1.0 / snake.params().y0;
    snake.ensure_bends(n_max);
    const auto table = snake.segments();
    double bound = 0.0;
    for (std::size_t i = 0; i < 4 * static_cast<std::size_t>(n_max); ++i)
        bound = std::max({bound, std::fabs(table[i].image_bbox.x_min), std::fabs(table[i].image_bbox.x_max)});
    return bound;
}

/// One structured text record per piece, fields in a fixed order.
inline std::string format_segment_record(const SegmentRecord& r) {
    const PlacementTransform& p = r.placement;
    const char* bend = p.bend == Bend::none ? "none" : (p.bend == Bend::right ? "nu_r" : "nu_l");
    const char* orient = p.orientation == Orientation::upright ? "upright" : "half_turn";
    char buf[768];
    std::snprintf(buf, sizeof buf,
                  "segment n=%d kind=%s y_lo=%.17g y_hi=%.17g bend=%s pre_tx=%.17g pre_ty=%.17g scale=%.17g "
                  "post_scale=%.17g orientation=%s tx=%.17g ty=%.17g bbox=%.17g,%.17g,%.17g,%.17g",
                  r.ref.n, to_string(r.ref.kind), r.y_lo, r.y_hi, bend, p.pre_translation.x, p.pre_translation.y,
                  p.scale, p.post_scale, orient, p.translation.x, p.translation.y, r.image_bbox.x_min,
                  r.image_bbox.y_min, r.image_bbox.x_max, r.image_bbox.y_max);
    return buf;
}

}  // namespace bungee
