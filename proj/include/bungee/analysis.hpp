#pragma once

// Batch verification: distortion sweeps, the axis escape law, conjugacy and
// gluing checks, and the evidence bundle for a point of the bungee-set
// boundary in the upper half-plane where h is not chaotic.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "bungee/core_maps.hpp"
#include "bungee/dynamics.hpp"
#include "bungee/parallel.hpp"
#include "bungee/snake.hpp"

namespace bungee {

/// Radical-inverse low-discrepancy sequence.
inline double halton(std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

struct Region {
    enum class Kind { rectangle, strip_band };
    Kind kind = Kind::rectangle;
    double x_min = 0.0, x_max = 0.0;  ///< rectangle only
    double y_min = 0.0, y_max = 0.0;

    static Region rectangle(double x0, double x1, double y0, double y1) {
        return {Kind::rectangle, x0, x1, y0, y1};
    }
    /// {y_min <= y <= y_max, |x| <= 1/y}, sampled in (x*y, y).
    static Region strip_band(double y0, double y1) { return {Kind::strip_band, 0.0, 0.0, y0, y1}; }

    Point sample(int i, int j, int nx, int ny) const {
        const double fx = nx == 1 ? 0.5 : static_cast<double>(i) / (nx - 1);
        const double fy = ny == 1 ? 0.5 : static_cast<double>(j) / (ny - 1);
        const double y = y_min + (y_max - y_min) * fy;
        if (kind == Kind::strip_band) return {(-1.0 + 2.0 * fx) / y, y};
        return {x_min + (x_max - x_min) * fx, y};
    }

    std::string describe() const {
        char buf[160];
        if (kind == Kind::strip_band)
            std::snprintf(buf, sizeof buf, "strip band y in [%g, %g], |x| <= 1/y", y_min, y_max);
        else
            std::snprintf(buf, sizeof buf, "[%g, %g] x [%g, %g]", x_min, x_max, y_min, y_max);
        return buf;
    }
};

struct DistortionReport {
    MapKind map = MapKind::identity;
    Region region;
    int nx = 0, ny = 0;
    double step = 0.0;  ///< 0 means the per-point default step
    std::size_t samples = 0;
    std::size_t nonfinite = 0;
    double sup_K = 1.0;
    double median_K = 1.0;
    double q99_K = 1.0;
    double min_K = 1.0;
    double min_det = std::numeric_limits<double>::infinity();
    bool det_positive = true;
    std::vector<double> K;  ///< kept when samples <= 10^6
};

inline DistortionReport distortion_sweep(const GlobalMap& map, const Region& region, int nx, int ny,
                                         double step = 0.0) {
    DistortionReport rep;
    rep.map = map.kind();
    rep.region = region;
    rep.nx = nx;
    rep.ny = ny;
    rep.step = step;
    const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<Dilatation> out(n);
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t j) {
        for (int i = 0; i < nx; ++i) {
            const Point p = region.sample(i, static_cast<int>(j), nx, ny);
            out[j * nx + i] = local_dilatation(map, p, step > 0.0 ? step : default_fd_step(p));
        }
    });

    std::vector<double> finite;
    finite.reserve(n);
    for (const Dilatation& d : out) {
        rep.min_det = std::min(rep.min_det, d.det);
        if (d.det_sign != 1) rep.det_positive = false;
        if (std::isfinite(d.K)) finite.push_back(d.K);
        else ++rep.nonfinite;
    }
    rep.samples = n;
    if (!finite.empty()) {
        std::vector<double> sorted = finite;
        std::sort(sorted.begin(), sorted.end());
        rep.min_K = sorted.front();
        rep.sup_K = sorted.back();
        rep.median_K = sorted[sorted.size() / 2];
        rep.q99_K = sorted[std::min(sorted.size() - 1, static_cast<std::size_t>(0.99 * sorted.size()))];
    }
    if (rep.nonfinite > 0) rep.sup_K = std::numeric_limits<double>::infinity();
    if (n <= 1'000'000) {
        rep.K.reserve(n);
        for (const Dilatation& d : out) rep.K.push_back(d.K);
    }
    return rep;
}

struct EscapeLawResult {
    double max_relative_violation = 0.0;  ///< worst excursion of y_k^2 - y0^2 - 2k outside [0, k/y0^2], over y_k^2
    std::vector<double> final_heights;
};

/// Runs psi along the imaginary axis and checks 0 <= y_k^2 - y0^2 - 2k <= k/y0^2 at every step.
inline EscapeLawResult escape_law_check(const std::vector<double>& y0_values, std::uint64_t steps) {
    if (steps < 1) throw std::invalid_argument("escape_law_check needs at least one step");
    EscapeLawResult res;
    for (double y0 : y0_values) {
        const StripParams sp(y0);
        Point z{0.0, y0};
        const double y0sq = y0 * y0;
        for (std::uint64_t k = 1; k <= steps; ++k) {
            z = psi_apply(z, sp);
            const double kk = static_cast<double>(k);
            const double d = z.y * z.y - y0sq - 2.0 * kk;
            const double v = std::max({0.0, -d, d - kk / y0sq});
            res.max_relative_violation = std::max(res.max_relative_violation, v / (z.y * z.y));
        }
        res.final_heights.push_back(z.y);
    }
    return res;
}

/// Largest |f(phi(w)) - phi(psi(w))| over `samples` straightened points in bends 1..n_max.
inline double conjugacy_defect(const GlobalMap& map, int n_max, std::size_t samples) {
    const auto& table = map.table();
    const std::size_t pieces = std::min<std::size_t>(table.size(), 4 * static_cast<std::size_t>(n_max));
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const SegmentRecord& r = table[k % pieces];
        const double y = r.y_lo + (r.y_hi - r.y_lo) * halton(k + 1, 2);
        const Point w{(-1.0 + 2.0 * halton(k + 1, 3)) / y, y};
        const Point direct = map.f(r.placement.apply(w));
        const Point defined = map.phi(psi_formula(w));
        worst = std::max(worst, distance(direct, defined));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Evidence bundle

struct Witness {
    std::string role;
    Point z;
    OrbitLabel expected = OrbitLabel::undecided;
    OrbitLabel label = OrbitLabel::undecided;
    std::uint64_t steps = 0;
    std::size_t oscillations = 0;
    double max_modulus = 0.0;

    bool holds() const { return label == expected; }
};

struct EvidenceOptions {
    Point bounded_witness{1.0 / 102.0, 102.0};
    Point bungee_witness{0.0, 101.5};
    Point escaping_witness{0.8, -3.0};
    /// Close pair at matched height: the wall point and one just inside.
    Point pair_wall{1.0 / 102.0, 102.0};
    Point pair_inside{1.0 / 102.0 - 9e-4, 102.0};
    /// The inside point moves at rate (1 - xy)/y, about 0.09/y, so it needs a longer budget.
    std::uint64_t pair_max_steps = 200'000'000;
};

struct EvidenceBundle {
    Witness bounded, bungee, escaping;
    Witness pair_bounded, pair_bungee;
    double pair_separation = 0.0;
    ClassifierConfig witness_config;
    ClassifierConfig pair_config;

    bool complete() const {
        return bounded.holds() && bungee.holds() && escaping.holds() && pair_bounded.holds() && pair_bungee.holds() &&
               pair_separation < 1e-3 && bounded.z.y > 0.0 && bungee.z.y > 0.0 && escaping.z.y < 0.0 &&
               pair_bounded.z.y > 0.0 && pair_bungee.z.y > 0.0;
    }
};

inline Witness classify_witness(const GlobalMap& map, const ClassifierConfig& cc, std::string role, Point z,
                                OrbitLabel expected) {
    const OrbitRecord rec = iterate_orbit(z, map, cc);
    return {std::move(role), z, expected, rec.label, rec.steps_taken, rec.oscillation_maxima.size(), rec.max_modulus};
}

inline EvidenceBundle evidence_bundle(const GlobalMapConfig& cfg, const ClassifierConfig& cc,
                                      const EvidenceOptions& opt = {}) {
    GlobalMapConfig hc = cfg;
    hc.which = MapKind::h;
    const GlobalMap h(hc);
    EvidenceBundle b;
    b.witness_config = cc;
    b.pair_config = cc;
    b.pair_config.max_steps = std::max(cc.max_steps, opt.pair_max_steps);
    b.bounded = classify_witness(h, cc, "bounded", opt.bounded_witness, OrbitLabel::bounded);
    b.bungee = classify_witness(h, cc, "bungee", opt.bungee_witness, OrbitLabel::bungee);
    b.escaping = classify_witness(h, cc, "escaping", opt.escaping_witness, OrbitLabel::escaping);
    b.pair_bounded = classify_witness(h, b.pair_config, "pair-wall", opt.pair_wall, OrbitLabel::bounded);
    b.pair_bungee = classify_witness(h, b.pair_config, "pair-inside", opt.pair_inside, OrbitLabel::bungee);
    b.pair_separation = distance(opt.pair_wall, opt.pair_inside);
    return b;
}

// ---------------------------------------------------------------------------
// Verification report

struct ReportLine {
    bool pass = false;
    std::string text;
};

struct ReportSection {
    std::string name;
    std::vector<ReportLine> lines;
};

struct VerificationReport {
    std::vector<ReportSection> sections;

    bool all_pass() const {
        for (const auto& s : sections)
            for (const auto& l : s.lines)
                if (!l.pass) return false;
        return true;
    }

    void write(std::ostream& os) const {
        for (const auto& s : sections) {
            os << "[" << s.name << "]\n";
            for (const auto& l : s.lines) os << (l.pass ? "PASS " : "FAIL ") << l.text << "\n";
        }
        os << (all_pass() ? "RESULT PASS" : "RESULT FAIL") << "\n";
    }
};

struct VerifyOptions {
    StripParams strip;
    PerturbParams perturb;
    int n_max = 20;  ///< depth of the gluing and disjointness checks
    int table_bends = SnakeGeometry::kDefaultMaxBends;
    ClassifierConfig classifier;
    EvidenceOptions evidence;
};

namespace detail {
inline std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}
}  // namespace detail

inline VerificationReport run_verification(const VerifyOptions& opt) {
    using detail::fmt;
    VerificationReport rep;
    const int table_bends = std::max(opt.table_bends, opt.n_max + 1);
    auto cfg = GlobalMapConfig::make(MapKind::f, opt.strip, opt.perturb, table_bends);
    SnakeGeometry& snake = *cfg.snake;

    {
        ReportSection s{"gluing", {}};
        const double g = verify_gluing(snake, opt.n_max, 50);
        s.lines.push_back({g < 1e-9, fmt("max edge mismatch over %d bends, 50 samples/edge: %.3e (limit 1e-9)", opt.n_max, g)});
        rep.sections.push_back(std::move(s));
    }
    {
        ReportSection s{"disjointness", {}};
        for (const auto& l : verify_disjoint(snake, opt.n_max).lines)
            s.lines.push_back({l.analytic && l.geometric,
                               fmt("n=%d t_n=%.17g s_n=%.17g analytic=%s geometric=%s (%d samples/side)", l.n, l.t,
                                   l.s, l.analytic ? "true" : "false", l.geometric ? "true" : "false",
                                   l.samples_per_side)});
        rep.sections.push_back(std::move(s));
    }

    const GlobalMap f(cfg);
    {
        ReportSection s{"conjugacy", {}};
        const int depth = std::min(12, table_bends);
        const double d = conjugacy_defect(f, depth, 10'000);
        s.lines.push_back({d < 1e-8, fmt("max |f(phi(w)) - phi(psi(w))| over 10000 samples, bends 1..%d: %.3e (limit 1e-8)", depth, d)});
        rep.sections.push_back(std::move(s));
    }
    {
        ReportSection s{"distortion", {}};
        const GlobalMap psi(GlobalMapConfig::make(MapKind::psi, opt.strip, opt.perturb));
        const auto dp = distortion_sweep(psi, Region::strip_band(200.0, 1e4), 101, 101, 1e-6);
        s.lines.push_back({dp.sup_K <= 3.0 && dp.det_positive,
                           fmt("psi on %s: sup K = %.6f (limit 3.0), min det = %.3e", dp.region.describe().c_str(),
                               dp.sup_K, dp.min_det)});
        const GlobalMap g(GlobalMapConfig::make(MapKind::g, opt.strip, opt.perturb));
        const auto dg = distortion_sweep(g, Region::rectangle(-3.0, 3.0, -3.0, 0.0), 100, 100);
        s.lines.push_back({dg.sup_K < 2.0 && dg.det_positive,
                           fmt("g (delta=%g) on %s: sup K = %.6f (limit 2.0), min det = %.3e, non-finite %zu",
                               opt.perturb.delta, dg.region.describe().c_str(), dg.sup_K, dg.min_det, dg.nonfinite)});
        const auto di = distortion_sweep(f, Region::rectangle(2.0, 4.0, 2.0, 4.0), 50, 50);
        s.lines.push_back({di.sup_K == 1.0 && di.det_positive,
                           fmt("f on identity region %s: sup K = %.17g", di.region.describe().c_str(), di.sup_K)});
        const double y0 = opt.strip.y0;
        const double w = 1.0 / y0;
        const auto dr = distortion_sweep(f, Region::rectangle(-0.9 * w, 0.9 * w, 0.05 * y0, 0.95 * y0), 41, 41, 1e-6);
        s.lines.push_back({std::isfinite(dr.sup_K) && dr.det_positive,
                           fmt("f blend over R: sup K = %.6f, min det = %.3e", dr.sup_K, dr.min_det)});
        rep.sections.push_back(std::move(s));
    }
    {
        ReportSection s{"escape-law", {}};
        const auto a = escape_law_check({opt.strip.y0}, 1'000'000);
        s.lines.push_back({a.max_relative_violation < 1e-6,
                           fmt("y0=%g, 10^6 steps: relative violation %.3e, final height %.9f", opt.strip.y0,
                               a.max_relative_violation, a.final_heights[0])});
        const auto b = escape_law_check({1000.0}, 100'000);
        s.lines.push_back({b.max_relative_violation < 1e-8,
                           fmt("y0=1000, 10^5 steps: relative violation %.3e", b.max_relative_violation)});
        rep.sections.push_back(std::move(s));
    }
    {
        ReportSection s{"evidence", {}};
        const auto eb = evidence_bundle(cfg, opt.classifier, opt.evidence);
        for (const Witness* w : {&eb.bounded, &eb.bungee, &eb.escaping, &eb.pair_bounded, &eb.pair_bungee})
            s.lines.push_back({w->holds(), fmt("%s (%.17g, %.17g): %s (expected %s) after %llu steps, %zu oscillations",
                                                w->role.c_str(), w->z.x, w->z.y, to_string(w->label),
                                                to_string(w->expected), static_cast<unsigned long long>(w->steps),
                                                w->oscillations)});
        s.lines.push_back({eb.pair_separation < 1e-3, fmt("pair separation %.3e (limit 1e-3)", eb.pair_separation)});
        rep.sections.push_back(std::move(s));
    }
    return rep;
}

}  // namespace bungee
