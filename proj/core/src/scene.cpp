#include "owc/scene.hpp"

#include "owc/errors.hpp"
#include "owc/rng.hpp"

namespace owc {

std::uint64_t sample_seed(std::uint64_t base_seed, int id) {
    return base_seed ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(id)));
}

Vec3 calm_sea_direction(const Vec3& transmitter, const Vec3& receiver, const OpticalConstants& consts) {
    static const SurfaceRealization flat = SurfaceRealization::flat();
    LinkGeometry geom{transmitter, receiver, {0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}, 0.0, &flat};
    const RefractionSolution sol = solve_refraction_point(geom, consts);
    return normalize(sol.point - receiver);
}

Scene make_scene(const RunConfig& config, std::uint64_t seed, int id) {
    Rng rng(seed);
    Scene scene;
    scene.id = id;
    scene.seed = seed;
    const std::uint64_t surface_seed = rng.next_u64();
    const SceneBox& box = config.scene;
    const double depth = rng.uniform(box.tx_depth_min, box.tx_depth_max);
    const double ox = rng.uniform(-box.rx_offset_max, box.rx_offset_max);
    const double oy = rng.uniform(-box.rx_offset_max, box.rx_offset_max);
    const double height = rng.uniform(box.rx_height_min, box.rx_height_max);
    scene.t0 = rng.uniform(0.0, box.time_offset_max);
    scene.transmitter = {0.0, 0.0, -depth};
    scene.receiver = {ox, oy, height};
    scene.surface = realize_surface(config.resolved_spectrum(), config.spectral_grid(), surface_seed);
    scene.initial_boresight = calm_sea_direction(scene.transmitter, scene.receiver, config.optics);
    const Vec3 calm_point = scene.receiver + scene.initial_boresight * (scene.receiver.z / -scene.initial_boresight.z);
    scene.initial_tx_boresight = normalize(calm_point - scene.transmitter);
    return scene;
}

LinkGeometry scene_geometry(const Scene& scene, double t, const Vec3& tx_boresight, const Vec3& rx_boresight) {
    return {scene.transmitter, scene.receiver, tx_boresight, rx_boresight, t, &scene.surface};
}

CameraModel scene_camera(const RunConfig& config, const Scene& scene, const Vec3& boresight) {
    return CameraModel::look(scene.receiver, boresight, config.camera.focal_length, config.camera.pixel_pitch,
                             config.camera.rows, config.camera.cols);
}

}  // namespace owc
