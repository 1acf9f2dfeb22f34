// bungee_lab: orbit runs, classification rasters, verification suites and
// snake geometry dumps.
//
// Exit codes: 0 success / all PASS, 1 runtime or verification failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bungee/bungee.hpp"

namespace {

constexpr int kHardMaxBends = 40;

struct Settings {
    double y0 = 101.0;
    double delta = 0.01;
    int table_bends = bungee::SnakeGeometry::kDefaultMaxBends;
    bungee::ClassifierConfig cc;
};

std::vector<double> parse_list(const std::string& text, std::size_t count, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError(what, "expected " + std::to_string(count) + " comma-separated numbers");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != count)
        throw CLI::ValidationError(what, "expected " + std::to_string(count) + " comma-separated numbers");
    return out;
}

bungee::GlobalMapConfig map_config(const Settings& s, bungee::MapKind kind) {
    return bungee::GlobalMapConfig::make(kind, bungee::StripParams(s.y0), bungee::PerturbParams(s.delta), s.table_bends);
}

int run_orbit(const Settings& s, const std::string& map_name, const std::string& point, const std::string& out,
              const std::string& path) {
    const auto xy = parse_list(point, 2, "--point");
    const bungee::GlobalMap map(map_config(s, bungee::parse_map_kind(map_name)));
    bungee::IterateOptions opt;
    opt.record_trail = !out.empty();
    opt.path = path == "direct" ? bungee::PathMode::direct : bungee::PathMode::fast;
    const auto rec = bungee::iterate_orbit({xy[0], xy[1]}, map, s.cc, opt);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open " + out + " for writing");
        bungee::write_orbit_csv(os, rec);
    }
    std::printf("%s\n", bungee::to_string(rec.label));
    std::printf("map=%s start=%.17g,%.17g steps=%llu max_modulus=%.17g last=%.17g,%.17g oscillations=%zu "
                "events=%zu fixed_point=%s exhausted=%s\n",
                map_name.c_str(), xy[0], xy[1], static_cast<unsigned long long>(rec.steps_taken), rec.max_modulus,
                rec.last_point.x, rec.last_point.y, rec.oscillation_maxima.size(), rec.events.size(),
                rec.fixed_point ? "true" : "false", rec.exhausted ? "true" : "false");
    return 0;
}

int run_raster(const Settings& s, const std::string& map_name, const std::string& viewport, int width, int height,
               const std::string& out) {
    const auto v = parse_list(viewport, 4, "--viewport");
    bungee::RasterJob job;
    job.view = {v[0], v[1], v[2], v[3]};
    job.width = width;
    job.height = height;
    job.classifier = s.cc;
    try {
        job.validate();
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("raster", e.what());
    }
    const bungee::GlobalMap map(map_config(s, bungee::parse_map_kind(map_name)));
    const auto raster = bungee::render_raster(job, map);
    bungee::write_ppm(out, raster);
    std::printf("wrote %s (%dx%d) fnv1a64=%016llx escaping=%zu bounded=%zu bungee=%zu undecided=%zu\n", out.c_str(),
                width, height, static_cast<unsigned long long>(bungee::fnv1a64(raster.ppm())),
                raster.count(bungee::OrbitLabel::escaping), raster.count(bungee::OrbitLabel::bounded),
                raster.count(bungee::OrbitLabel::bungee), raster.count(bungee::OrbitLabel::undecided));
    return 0;
}

int run_verify(const Settings& s, int n_max) {
    bungee::VerifyOptions opt;
    opt.strip = bungee::StripParams(s.y0);
    opt.perturb = bungee::PerturbParams(s.delta);
    opt.n_max = n_max;
    opt.table_bends = s.table_bends;
    opt.classifier = s.cc;
    const auto rep = bungee::run_verification(opt);
    rep.write(std::cout);
    return rep.all_pass() ? 0 : 1;
}

int run_geometry(const Settings& s, int n_max) {
    bungee::SnakeGeometry snake(bungee::StripParams(s.y0), std::max(n_max, 0));
    if (n_max > 0) snake.ensure_bends(n_max);
    for (const auto& r : snake.segments()) std::printf("%s\n", bungee::format_segment_record(r).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasiregular dynamics lab: snake construction, orbit classification and verification"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key = value configuration file; flags override it");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "echo the effective configuration and exit")->configurable(false);

    Settings s;
    app.add_option("--y0", s.y0, "lower height of the strip (> 100)")->capture_default_str();
    app.add_option("--delta", s.delta, "perturbation amplitude of g (> 0)")->capture_default_str();
    app.add_option("--table-bends", s.table_bends, "bends in the snake table")
        ->check(CLI::Range(1, kHardMaxBends))
        ->capture_default_str();
    app.add_option("--max-steps", s.cc.max_steps, "orbit step budget")->capture_default_str();
    app.add_option("--escape-radius", s.cc.escape_radius, "ESCAPING once the modulus passes this")->capture_default_str();
    app.add_option("--bounded-radius", s.cc.bounded_radius, "BOUNDED if the whole budget stays within this")
        ->capture_default_str();
    app.add_option("--high", s.cc.high_threshold, "upper oscillation threshold")->capture_default_str();
    app.add_option("--low", s.cc.low_threshold, "lower oscillation threshold")->capture_default_str();
    app.add_option("--min-oscillations", s.cc.min_oscillations, "completed oscillations needed for BUNGEE")
        ->capture_default_str();

    auto* orbit = app.add_subcommand("orbit", "iterate and classify one orbit");
    std::string orbit_map = "f", orbit_point, orbit_out = "orbit.csv", orbit_path = "fast";
    orbit->add_option("--map", orbit_map, "identity, psi, f, g or h")->capture_default_str();
    orbit->add_option("--point", orbit_point, "start point x,y")->required();
    orbit->add_option("--out", orbit_out, "orbit export path (empty to skip)")->capture_default_str();
    orbit->add_option("--path", orbit_path, "fast or direct iteration")
        ->check(CLI::IsMember({"fast", "direct"}))
        ->capture_default_str();

    auto* raster = app.add_subcommand("raster", "classify a pixel grid and write a binary PPM");
    std::string raster_map = "f", viewport = "-0.05,0.05,100,106", raster_out = "raster.ppm";
    int width = 400, height = 400;
    raster->add_option("--map", raster_map, "identity, psi, f, g or h")->capture_default_str();
    raster->add_option("--viewport", viewport, "x_min,x_max,y_min,y_max")->capture_default_str();
    raster->add_option("--width", width, "pixels")->capture_default_str();
    raster->add_option("--height", height, "pixels")->capture_default_str();
    raster->add_option("--out", raster_out, "output image")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "run the verification suites");
    int verify_n_max = 20;
    verify->add_option("--n-max", verify_n_max, "depth of gluing and disjointness checks")
        ->check(CLI::Range(0, kHardMaxBends - 1))
        ->capture_default_str();

    auto* geometry = app.add_subcommand("geometry", "dump the snake segment table");
    int geometry_n_max = bungee::SnakeGeometry::kDefaultMaxBends;
    geometry->add_option("--n-max", geometry_n_max, "bends to dump")
        ->check(CLI::Range(0, kHardMaxBends))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        s.cc.validate();
        bungee::StripParams{s.y0};
        bungee::PerturbParams{s.delta};
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    }

    if (print_config) {
        std::cout << app.config_to_str(true, false);
        return 0;
    }

    try {
        if (*orbit) return run_orbit(s, orbit_map, orbit_point, orbit_out, orbit_path);
        if (*raster) return run_raster(s, raster_map, viewport, width, height, raster_out);
        if (*verify) return run_verify(s, verify_n_max);
        if (*geometry) return run_geometry(s, geometry_n_max);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const bungee::DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
