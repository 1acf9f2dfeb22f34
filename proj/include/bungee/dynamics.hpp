#pragma once

// Global plane maps and orbit classification.
//
//   f = phi o psi o phi^-1 on the snake image, an explicit displacement blend
//       on the rectangle R = {0 < y < y0, |x| < 1/y0}, the identity elsewhere;
//   h = g o f.
//
// Inside the snake f is conjugate to psi, which keeps u = xy fixed and moves
// the straightened height by y <- y + (1 - |u|)/y. iterate_orbit exploits this
// (the fast path) and only maps through phi to measure the orbit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bungee/core_maps.hpp"
#include "bungee/snake.hpp"

namespace bungee {

enum class MapKind { identity, psi, f, g, h };

inline const char* to_string(MapKind m) {
    switch (m) {
        case MapKind::identity: return "identity";
        case MapKind::psi: return "psi";
        case MapKind::f: return "f";
        case MapKind::g: return "g";
        case MapKind::h: return "h";
    }
    return "?";
}

inline MapKind parse_map_kind(const std::string& s) {
    if (s == "identity") return MapKind::identity;
    if (s == "psi") return MapKind::psi;
    if (s == "f") return MapKind::f;
    if (s == "g") return MapKind::g;
    if (s == "h") return MapKind::h;
    throw std::invalid_argument("unknown map '" + s + "' (expected identity, psi, f, g or h)");
}

struct GlobalMapConfig {
    StripParams strip;
    std::shared_ptr<SnakeGeometry> snake;
    PerturbParams perturb;
    MapKind which = MapKind::f;

    /// Config with a fresh snake built on `strip`.
    static GlobalMapConfig make(MapKind which, StripParams strip = {}, PerturbParams perturb = {},
                                int n_max = SnakeGeometry::kDefaultMaxBends) {
        GlobalMapConfig cfg;
        cfg.strip = strip;
        cfg.perturb = perturb;
        cfg.which = which;
        if (which == MapKind::f || which == MapKind::h) cfg.snake = std::make_shared<SnakeGeometry>(strip, n_max);
        return cfg;
    }
};

/// A validated, ready-to-evaluate map. The snake table is built in full on
/// construction, so evaluation never grows it and is safe to share across threads.
class GlobalMap {
public:
    explicit GlobalMap(GlobalMapConfig cfg) : cfg_(std::move(cfg)) {
        const bool needs_snake = cfg_.which == MapKind::f || cfg_.which == MapKind::h;
        if (needs_snake) {
            if (!cfg_.snake) throw std::invalid_argument("map f/h needs a snake geometry");
            if (cfg_.snake->params().y0 != cfg_.strip.y0)
                throw std::invalid_argument("snake geometry built for a different y0");
            cfg_.snake->build_all();
            table_ = cfg_.snake->segments();
        }
    }

    const GlobalMapConfig& config() const { return cfg_; }
    MapKind kind() const { return cfg_.which; }
    double y0() const { return cfg_.strip.y0; }
    const std::vector<SegmentRecord>& table() const { return table_; }
    SnakeGeometry& snake() const { return *cfg_.snake; }

    bool in_rectangle_R(Point z) const { return z.y > 0.0 && z.y < y0() && std::fabs(z.x) < 1.0 / y0(); }

    /// Displacement blend over R: zero at y = 0 and on |x| = 1/y0, psi at y = y0.
    Point blend(Point z) const {
        const Point base{z.x, y0()};
        const Point d = psi_formula(base) - base;
        return z + (z.y / y0()) * d;
    }

    /// phi on the prebuilt table (lower piece on a shared height).
    Point phi(Point w) const {
        auto it = std::lower_bound(table_.begin(), table_.end(), w.y,
                                   [](const SegmentRecord& r, double v) { return r.y_hi < v; });
        if (it == table_.end()) throw TableExhausted("orbit left the built snake table");
        return it->placement.apply(w);
    }

    Point f(Point z, std::size_t* hint = nullptr) const {
        if (auto loc = cfg_.snake->try_phi_inverse(z, hint ? *hint : 0)) {
            if (hint) *hint = loc->ref.index();
            return phi(psi_formula(loc->w));
        }
        if (in_rectangle_R(z)) return blend(z);
        return z;
    }

    std::optional<Point> h(Point z, std::size_t* hint = nullptr) const {
        return g_apply(f(z, hint), cfg_.perturb);
    }

    /// nullopt is the escape sentinel (exp overflow in g).
    std::optional<Point> apply(Point z, std::size_t* hint = nullptr) const {
        switch (cfg_.which) {
            case MapKind::identity: return z;
            case MapKind::psi: return psi_apply(z, cfg_.strip);
            case MapKind::f: return f(z, hint);
            case MapKind::g: return g_apply(z, cfg_.perturb);
            case MapKind::h: return h(z, hint);
        }
        return z;
    }

    std::optional<Point> operator()(Point z) const {
        if (cfg_.which == MapKind::psi) return psi_formula(z);
        return apply(z);
    }

private:
    GlobalMapConfig cfg_;
    std::vector<SegmentRecord> table_;
};

inline Point f_apply(Point z, const GlobalMapConfig& cfg) {
    GlobalMapConfig c = cfg;
    c.which = MapKind::f;
    return GlobalMap(c).f(z);
}

inline std::optional<Point> h_apply(Point z, const GlobalMapConfig& cfg) {
    GlobalMapConfig c = cfg;
    c.which = MapKind::h;
    return GlobalMap(c).h(z);
}

// ---------------------------------------------------------------------------
// Classification

struct ClassifierConfig {
    std::uint64_t max_steps = 50'000'000;
    double escape_radius = 1e6;
    double bounded_radius = 1e4;
    double high_threshold = 200.0;
    double low_threshold = 110.0;
    std::uint64_t min_oscillations = 4;

    void validate() const {
        if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
        if (!(low_threshold < high_threshold)) throw std::invalid_argument("low threshold must be below high threshold");
        if (!(high_threshold < escape_radius)) throw std::invalid_argument("high threshold must be below escape radius");
        if (!(bounded_radius < escape_radius)) throw std::invalid_argument("bounded radius must be below escape radius");
    }
};

enum class OrbitLabel { escaping, bounded, bungee, undecided };

inline const char* to_string(OrbitLabel l) {
    switch (l) {
        case OrbitLabel::escaping: return "ESCAPING";
        case OrbitLabel::bounded: return "BOUNDED";
        case OrbitLabel::bungee: return "BUNGEE";
        case OrbitLabel::undecided: return "UNDECIDED";
    }
    return "?";
}

enum class Crossing { up, down };

struct OscillationEvent {
    std::uint64_t step = 0;
    Crossing direction = Crossing::up;
};

struct TrailPoint {
    std::uint64_t step = 0;
    Point z;
};

struct OrbitRecord {
    std::uint64_t steps_taken = 0;
    double max_modulus = 0.0;
    double last_modulus = 0.0;
    Point last_point;
    std::vector<OscillationEvent> events;
    std::vector<double> oscillation_maxima;  ///< one per completed up-then-down excursion
    bool escaped = false;     ///< passed escape_radius, or g overflowed
    bool fixed_point = false; ///< orbit became exactly stationary; the rest is known
    bool exhausted = false;   ///< orbit climbed past the built snake table
    OrbitLabel label = OrbitLabel::undecided;
    std::vector<TrailPoint> trail;
};

/// Decision rules, in precedence order: ESCAPING, BUNGEE, BOUNDED, UNDECIDED.
inline OrbitLabel classify(const OrbitRecord& r, const ClassifierConfig& cc) {
    cc.validate();
    if (r.escaped) return OrbitLabel::escaping;
    const auto& m = r.oscillation_maxima;
    if (m.size() >= cc.min_oscillations && std::adjacent_find(m.begin(), m.end(), std::greater_equal<>()) == m.end())
        return OrbitLabel::bungee;
    const bool observed_all = r.fixed_point || r.steps_taken >= cc.max_steps;
    if (observed_all && r.max_modulus <= cc.bounded_radius) return OrbitLabel::bounded;
    return OrbitLabel::undecided;
}

enum class PathMode { fast, direct };

struct IterateOptions {
    PathMode path = PathMode::fast;
    bool record_trail = false;
    std::size_t max_trail_points = 100'000;
};

namespace detail {

class OrbitTracker {
public:
    OrbitTracker(const ClassifierConfig& cc, const IterateOptions& opt, OrbitRecord& rec)
        : rec_(rec),
          trail_(opt.record_trail),
          high2_(cc.high_threshold * cc.high_threshold),
          low2_(cc.low_threshold * cc.low_threshold),
          escape2_(cc.escape_radius * cc.escape_radius) {
        stride_ = std::max<std::uint64_t>(1, (cc.max_steps + opt.max_trail_points - 1) / opt.max_trail_points);
    }

    void start(Point z0) {
        const double m2 = norm2(z0);
        max2_ = m2;
        rec_.last_point = z0;
        above_ = m2 > high2_;
        if (trail_) rec_.trail.push_back({0, z0});
        check_escape(m2);
    }

    /// False once the orbit has escaped. Thresholds are compared on squared moduli.
    BUNGEE_FORCE_INLINE bool observe(std::uint64_t step, Point z) {
        const double m2 = norm2(z);
        rec_.steps_taken = step;
        rec_.last_point = z;
        if (m2 > max2_) max2_ = m2;
        if (!above_) {
            if (m2 > high2_) {
                above_ = armed_ = true;
                excursion_max2_ = m2;
                rec_.events.push_back({step, Crossing::up});
            }
        } else {
            if (m2 > excursion_max2_) excursion_max2_ = m2;
            if (m2 < low2_) {
                above_ = false;
                rec_.events.push_back({step, Crossing::down});
                if (armed_) rec_.oscillation_maxima.push_back(std::sqrt(excursion_max2_));
                armed_ = false;
            }
        }
        if (trail_ && step % stride_ == 0) rec_.trail.push_back({step, z});
        return check_escape(m2);
    }

    void escape_sentinel(std::uint64_t step) {
        rec_.steps_taken = step;
        sentinel_ = true;
        rec_.escaped = true;
    }

    /// Writes the modulus summaries; call once iteration stops.
    void finish() {
        if (sentinel_) {
            rec_.max_modulus = rec_.last_modulus = std::numeric_limits<double>::infinity();
        } else {
            rec_.max_modulus = std::sqrt(max2_);
            rec_.last_modulus = rec_.last_point.modulus();
        }
    }

private:
    BUNGEE_FORCE_INLINE static double norm2(Point z) { return z.x * z.x + z.y * z.y; }

    BUNGEE_FORCE_INLINE bool check_escape(double m2) {
        if (m2 > escape2_ || !std::isfinite(m2)) rec_.escaped = true;
        return !rec_.escaped;
    }

    OrbitRecord& rec_;
    bool trail_;
    double high2_, low2_, escape2_;
    std::uint64_t stride_ = 1;
    bool above_ = false;
    bool armed_ = false;
    bool sentinel_ = false;
    double max2_ = 0.0;
    double excursion_max2_ = 0.0;
};

// Straightened iteration of psi from step `step`; `image` maps (index, w) to the plane.
template <class Image>
void run_straightened(Point w, std::uint64_t step, const ClassifierConfig& cc, OrbitTracker& tr, OrbitRecord& rec,
                      Image&& image) {
    const double u = std::clamp(w.x * w.y, -1.0, 1.0);
    const double c = 1.0 - std::fabs(u);
    double y = w.y;
    double r = 1.0 / y;  // one division per step serves both the update and x = u/y
    while (step < cc.max_steps) {
        const double next = y + c * r;
        if (next == y) {
            rec.fixed_point = true;
            return;
        }
        y = next;
        r = 1.0 / y;
        ++step;
        std::optional<Point> z = image(Point{u * r, y});
        if (!z) {
            rec.exhausted = true;
            return;
        }
        if (!tr.observe(step, *z)) return;
    }
}

}  // namespace detail

/// Iterates the selected map from z0 under the classifier's budget and labels the orbit.
inline OrbitRecord iterate_orbit(Point z0, const GlobalMap& map, const ClassifierConfig& cc,
                                 const IterateOptions& opt = {}) {
    cc.validate();
    OrbitRecord rec;
    detail::OrbitTracker tr(cc, opt, rec);
    tr.start(z0);
    if (rec.escaped) {
        tr.finish();
        rec.label = classify(rec, cc);
        return rec;
    }

    const bool fast = opt.path == PathMode::fast;
    if (map.kind() == MapKind::psi) {
        if (in_strip(z0, map.config().strip) == Membership::outside) throw DomainError("psi orbit must start in the closed strip");
        if (fast) {
            detail::run_straightened(z0, 0, cc, tr, rec, [](Point w) { return std::optional<Point>(w); });
            tr.finish();
            rec.label = classify(rec, cc);
            return rec;
        }
    }

    const bool snake_map = map.kind() == MapKind::f || map.kind() == MapKind::h;
    std::size_t hint = 0;
    Point z = z0;
    std::uint64_t step = 0;
    while (step < cc.max_steps) {
        if (fast && snake_map && z.y >= 0.0) {
            if (auto loc = map.snake().try_phi_inverse(z, hint)) {
                const auto& table = map.table();
                std::size_t idx = loc->ref.index();
                detail::run_straightened(loc->w, step, cc, tr, rec, [&](Point w) -> std::optional<Point> {
                    while (w.y > table[idx].y_hi) {
                        if (++idx >= table.size()) return std::nullopt;
                    }
                    return table[idx].placement.apply(w);
                });
                tr.finish();
                rec.label = classify(rec, cc);
                return rec;
            }
        }
        std::optional<Point> next;
        try {
            next = map.apply(z, &hint);
        } catch (const TableExhausted&) {
            rec.exhausted = true;
            break;
        }
        ++step;
        if (!next) {
            tr.escape_sentinel(step);
            break;
        }
        if (!tr.observe(step, *next)) break;
        if (*next == z) {
            rec.fixed_point = true;
            break;
        }
        z = *next;
    }
    tr.finish();
    rec.label = classify(rec, cc);
    return rec;
}

/// Orbit export: header line, then one delimited record per retained step.
inline void write_orbit_csv(std::ostream& os, const OrbitRecord& rec) {
    os << "step,x,y,modulus\n";
    char buf[160];
    for (const TrailPoint& t : rec.trail) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(t.step), t.z.x,
                      t.z.y, t.z.modulus());
        os << buf;
    }
}

}  // namespace bungee
