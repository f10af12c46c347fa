#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "owc/channel_optics.hpp"
#include "owc/vec3.hpp"
#include "owc/wave_surface.hpp"

namespace owc {

/// Pinhole receiver camera. The screen lies in the plane through R spanned
/// by e_i (rows) and e_j (columns); the focus sits at F = R - f r_r.
struct CameraModel {
    Vec3 position;
    Vec3 boresight{0.0, 0.0, -1.0};
    double focal_length = 0.015;  // m
    double pixel_pitch = 1e-4;    // m
    int rows = 64;
    int cols = 64;
    Vec3 e_i{1.0, 0.0, 0.0};
    Vec3 e_j{0.0, 1.0, 0.0};

    /// Builds the screen basis from the boresight by Gram-Schmidt: against
    /// world-x for steep boresights (|r_z| >= 0.5), against world-up otherwise.
    /// e_j = e_i x r_r, so a straight-down camera has e_i = x, e_j = y.
    static CameraModel look(const Vec3& position, const Vec3& boresight, double focal_length = 0.015,
                            double pixel_pitch = 1e-4, int rows = 64, int cols = 64);

    Vec3 focus() const { return position - boresight * focal_length; }

    void validate() const;
};

enum class RayStage { screen, refracted };

struct TraceRay {
    Vec3 origin;
    Vec3 direction;  // unit
    RayStage stage = RayStage::screen;
};

/// Ray through screen pixel (i, j), 1-based, from the focus outwards.
/// Throws std::out_of_range for indices outside the screen.
TraceRay pixel_ray(const CameraModel& camera, int i, int j);

struct IntersectOptions {
    double march_step = 0.05;  // m
    double max_range = 500.0;  // m
    double tolerance = 1e-9;   // m, on |z - W|
};

/// First crossing of the ray with z = W(x, y, t) for k > 0, or nullopt on a miss.
///
/// When the summed slope bound along the ray is below |r_z| the crossing is
/// unique and a safeguarded Newton iteration inside the +-sum(A) slab finds it
/// directly. Otherwise the ray is marched with steps of at least `march_step`
/// (longer where a Lipschitz bound proves no crossing) and the first bracket
/// is refined the same way.
std::optional<Vec3> intersect_surface(const TraceRay& ray, const SurfaceRealization& surf, double t,
                                      const IntersectOptions& options = {});

struct Refracted {
    Vec3 direction;
    bool total_internal_reflection = false;
};

/// Vector Snell refraction of unit `incident` at a unit normal facing the
/// incident side (dot(incident, normal) < 0), eta = n_incident / n_transmitted.
Refracted refract(const Vec3& incident, const Vec3& normal, double eta);

/// Back-traced camera ray entering the water: ratio n_air / n_water at the
/// upward normal. Throws std::invalid_argument unless dot(ray_dir, normal_up) < 0.
Refracted refract_backward(const Vec3& ray_dir, const Vec3& normal_up, const OpticalConstants& consts);

/// Perpendicular distance from `point` to the ray's line.
double distance_to_line(const TraceRay& ray, const Vec3& point);

/// True when the source disc of radius r0 around `source` lies on the ray:
/// distance <= r0 (inclusive) and the source is ahead of the origin.
bool source_hit_test(const TraceRay& ray, const Vec3& source, double r0);

/// Ground truth attached to a rendered frame.
struct FrameTruth {
    Vec3 direction;  // unit, receiver -> refraction point
    RefractionSolution solution;
    GainBreakdown gain;
};

/// Rendered screen image, row-major (i along rows, j along columns).
struct IntensityFrame {
    int rows = 0;
    int cols = 0;
    std::vector<double> pixels;
    double t = 0.0;
    CameraModel camera;
    std::optional<FrameTruth> truth;

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * cols + col]; }
};

/// Sub-rectangle of the screen in 0-based pixel indices.
struct PixelWindow {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
};

struct RenderOptions {
    IntersectOptions intersect;
    SolverOptions solver;
    std::optional<PixelWindow> window;  // pixels outside stay 0
    int jobs = 1;                       // 0 = hardware concurrency
    bool fill_truth = true;
    std::optional<double> beacon_i0;    // overrides consts.i0 for the image only
};

/// Back-traces one ray per pixel: screen -> surface -> refracted -> source
/// disc test. Lit pixels hold I0 * G evaluated for that pixel's own path with
/// alpha_D = angle(r_t, -r1) and alpha_A = angle(r_r, r0).
IntensityFrame render(const CameraModel& camera, const LinkGeometry& geom, const OpticalConstants& consts,
                      const RenderOptions& options = {});

/// Intensity of a single pixel (1-based), as `render` computes it.
double render_pixel(const CameraModel& camera, const LinkGeometry& geom, const OpticalConstants& consts,
                    int i, int j, const IntersectOptions& options = {});

/// Forward check for a lit pixel: solves the local Fermat path from the
/// source centre to the focus seeded at the pixel's surface hit, projects it
/// through the focus onto the screen and returns the distance (m) to the
/// pixel's screen point. nullopt when the pixel ray misses the surface.
std::optional<double> reciprocity_error(const CameraModel& camera, const LinkGeometry& geom,
                                        const OpticalConstants& consts, int i, int j,
                                        const IntersectOptions& options = {});

/// 16-bit binary PGM (big-endian samples, maxval 65535) with linear min-max
/// scaling; writes `<path>.txt` holding the min and max used.
void write_pgm16(const std::filesystem::path& path, const IntensityFrame& frame);

}  // namespace owc
