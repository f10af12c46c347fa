#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "owc/channel_optics.hpp"
#include "owc/rng.hpp"
#include "owc/wave_surface.hpp"

namespace owc::testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "owc_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
}

/// Reference sea state (10 m/s wind, 20 km fetch) on the default grid.
inline SurfaceRealization default_sea(std::uint64_t seed) {
    const SpectrumParams p = SpectrumParams::from_environment(9.8, 10.0, 2.0e4, 3.3);
    return realize_surface(p, SpectralGrid::default_for(p), seed);
}

/// Default optical constants with n_air = 1.
inline OpticalConstants unit_air() {
    OpticalConstants c;
    c.n_air = 1.0;
    return c;
}

/// Random link over `surf`: transmitter 5-15 m deep, receiver 30-60 m up
/// with up to 10 m horizontal offset, t in [0, 100) s.
struct RandomLink {
    Vec3 transmitter;
    Vec3 receiver;
    double t = 0.0;
};

inline RandomLink random_link(Rng& rng) {
    RandomLink l;
    l.transmitter = {0.0, 0.0, -rng.uniform(5.0, 15.0)};
    l.receiver = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(30.0, 60.0)};
    l.t = rng.uniform(0.0, 100.0);
    return l;
}

inline LinkGeometry link_geometry(const RandomLink& l, const SurfaceRealization& surf) {
    LinkGeometry g;
    g.transmitter = l.transmitter;
    g.receiver = l.receiver;
    g.tx_boresight = {0.0, 0.0, 1.0};
    g.rx_boresight = {0.0, 0.0, -1.0};
    g.t = l.t;
    g.surface = &surf;
    return g;
}

/// Within half a unit of the last quoted digit of `quoted`.
inline bool agrees_to_digits(double value, double quoted, int digits) {
    const double unit = std::pow(10.0, std::floor(std::log10(std::abs(quoted))) - (digits - 1));
    return std::abs(value - quoted) <= 0.5 * unit;
}

}  // namespace owc::testing
