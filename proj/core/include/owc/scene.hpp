#pragma once

#include <cstdint>

#include "owc/channel_optics.hpp"
#include "owc/config.hpp"
#include "owc/vec3.hpp"
#include "owc/wave_surface.hpp"

namespace owc {

/// One randomised link: a fresh sea, transceiver placement and start time.
struct Scene {
    int id = 0;
    std::uint64_t seed = 0;
    SurfaceRealization surface;
    Vec3 transmitter;
    Vec3 receiver;
    double t0 = 0.0;
    Vec3 initial_boresight;  // receiver, along the calm-sea path
    Vec3 initial_tx_boresight;
};

/// base ^ mix64(id); keeps sample seeds independent of generation order.
std::uint64_t sample_seed(std::uint64_t base_seed, int id);

/// Draws a scene from the configured box. Same (config, seed) gives the same scene.
Scene make_scene(const RunConfig& config, std::uint64_t seed, int id);

/// Receiver-to-refraction-point direction over a flat sea: the pointing a
/// link without any alignment would keep.
Vec3 calm_sea_direction(const Vec3& transmitter, const Vec3& receiver, const OpticalConstants& consts);

/// Link geometry of the scene at time t with the given boresights.
LinkGeometry scene_geometry(const Scene& scene, double t, const Vec3& tx_boresight, const Vec3& rx_boresight);

/// Camera at the receiver looking along `boresight` with the configured optics.
CameraModel scene_camera(const RunConfig& config, const Scene& scene, const Vec3& boresight);

}  // namespace owc
