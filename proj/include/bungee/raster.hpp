#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bungee/dynamics.hpp"
#include "bungee/parallel.hpp"

namespace bungee {

struct Viewport {
    double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
};

using Rgb = std::array<std::uint8_t, 3>;

/// ESCAPING white, BOUNDED black, BUNGEE red, UNDECIDED gray.
inline Rgb palette(OrbitLabel l) {
    switch (l) {
        case OrbitLabel::escaping: return {255, 255, 255};
        case OrbitLabel::bounded: return {0, 0, 0};
        case OrbitLabel::bungee: return {255, 0, 0};
        case OrbitLabel::undecided: return {128, 128, 128};
    }
    return {128, 128, 128};
}

struct RasterJob {
    Viewport view;
    int width = 400;
    int height = 400;
    ClassifierConfig classifier;

    void validate() const {
        if (!(view.x_min < view.x_max) || !(view.y_min < view.y_max)) throw std::invalid_argument("empty viewport");
        if (width < 1 || height < 1) throw std::invalid_argument("raster size must be positive");
        if (static_cast<double>(width) * height > 1e8) throw std::invalid_argument("raster larger than 10^8 pixels");
        classifier.validate();
    }

    /// Centre of pixel (i, j); row 0 is the top of the viewport.
    Point pixel_center(int i, int j) const {
        return {view.x_min + (i + 0.5) * (view.x_max - view.x_min) / width,
                view.y_max - (j + 0.5) * (view.y_max - view.y_min) / height};
    }
};

struct Raster {
    int width = 0, height = 0;
    std::vector<OrbitLabel> labels;  ///< row-major, top row first

    std::size_t count(OrbitLabel l) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l)); }

    std::string ppm() const {
        std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        out.reserve(out.size() + labels.size() * 3);
        for (OrbitLabel l : labels) {
            const Rgb c = palette(l);
            out.append(reinterpret_cast<const char*>(c.data()), 3);
        }
        return out;
    }
};

/// `workers` 0 means thread_count().
inline Raster render_raster(const RasterJob& job, const GlobalMap& map, unsigned workers = 0) {
    job.validate();
    Raster r{job.width, job.height, std::vector<OrbitLabel>(static_cast<std::size_t>(job.width) * job.height)};
    parallel_for(static_cast<std::size_t>(job.height), [&](std::size_t j) {
        for (int i = 0; i < job.width; ++i) {
            OrbitLabel l = OrbitLabel::undecided;
            try {
                l = iterate_orbit(job.pixel_center(i, static_cast<int>(j)), map, job.classifier).label;
            } catch (const std::exception&) {
                // points outside a partial map's domain (psi off the strip) stay undecided
            }
            r.labels[j * job.width + i] = l;
        }
    }, workers ? workers : thread_count());
    return r;
}

inline void write_ppm(const std::string& path, const Raster& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    const std::string bytes = r.ppm();
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

/// 64-bit FNV-1a, used for golden-image checksums.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace bungee
