#include "owc/vision_renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "owc/errors.hpp"
#include "parallel.hpp"

namespace owc {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct PixelTrace {
    TraceRay screen_ray;
    std::optional<Vec3> hit;
    double intensity = 0.0;
};

// Safeguarded Newton on f(k) = z_ray(k) - W(k) inside a bracket with
// f(lo) > 0 >= f(hi). Falls back to bisection whenever Newton leaves it.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double guess, double tol) {
    double k = std::clamp(guess, lo, hi);
    double best_k = k;
    double best_f = INFINITY;
    for (int it = 0; it < 200; ++it) {
        double df = 0.0;
        const double fk = f(k, df);
        if (std::abs(fk) < best_f) {
            best_f = std::abs(fk);
            best_k = k;
        }
        if (std::abs(fk) <= tol) break;
        if (fk > 0.0) {
            lo = k;
        } else {
            hi = k;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
        const double newton = df != 0.0 ? k - fk / df : NAN;
        k = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    }
    return best_k;
}

PixelTrace trace_pixel(const CameraModel& camera, const LinkGeometry& geom, const OpticalConstants& consts,
                       double i0, int i, int j, const IntersectOptions& options) {
    PixelTrace out;
    out.screen_ray = pixel_ray(camera, i, j);
    const SurfaceRealization& surf = *geom.surface;
    out.hit = intersect_surface(out.screen_ray, surf, geom.t, options);
    if (!out.hit) return out;

    const Vec3& b1 = *out.hit;
    const Vec3& r0 = out.screen_ray.direction;
    const Vec3 n_up = surface_normal_up(surf, b1.x, b1.y, geom.t);
    if (!(dot(r0, n_up) < 0.0)) return out;  // grazing hit
    const Refracted r1 = refract_backward(r0, n_up, consts);
    if (r1.total_internal_reflection) return out;
    const TraceRay refracted{b1, r1.direction, RayStage::refracted};
    if (!source_hit_test(refracted, geom.transmitter, consts.source_radius)) return out;

    const double alpha_d = angle_between(geom.tx_boresight, -r1.direction);
    const double alpha_a = angle_between(camera.boresight, r0);
    if (alpha_d >= kHalfPi || alpha_a >= kHalfPi) return out;
    const double theta_i = angle_between(-r1.direction, n_up);
    const double theta_t = angle_between(-r0, n_up);
    const double d_w = norm(geom.transmitter - b1);
    const double d_a = norm(camera.position - b1);
    out.intensity = i0 * gain_departure(alpha_d, consts) * gain_arrival(alpha_a, consts) *
                    gain_path(d_w, d_a, consts) * gain_fresnel(theta_i, theta_t, consts);
    return out;
}

void write_text_or_throw(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text) || !os.flush()) throw IoError("cannot write " + path.string());
}

}  // namespace

CameraModel CameraModel::look(const Vec3& position, const Vec3& boresight, double focal_length,
                              double pixel_pitch, int rows, int cols) {
    CameraModel cam;
    cam.position = position;
    cam.boresight = normalize(boresight);
    cam.focal_length = focal_length;
    cam.pixel_pitch = pixel_pitch;
    cam.rows = rows;
    cam.cols = cols;
    const Vec3 ref = std::abs(cam.boresight.z) >= 0.5 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    cam.e_i = normalize(ref - cam.boresight * dot(ref, cam.boresight));
    cam.e_j = normalize(cross(cam.e_i, cam.boresight));
    return cam;
}

void CameraModel::validate() const {
    if (!(focal_length > 0.0)) throw std::invalid_argument("camera focal_length must be > 0");
    if (!(pixel_pitch > 0.0)) throw std::invalid_argument("camera pixel_pitch must be > 0");
    if (rows < 8 || cols < 8) throw std::invalid_argument("camera needs at least 8 x 8 pixels");
    constexpr double tol = 1e-12;
    if (std::abs(norm(boresight) - 1.0) > tol || std::abs(norm(e_i) - 1.0) > tol ||
        std::abs(norm(e_j) - 1.0) > tol || std::abs(dot(e_i, e_j)) > tol || std::abs(dot(e_i, boresight)) > tol ||
        std::abs(dot(e_j, boresight)) > tol) {
        throw std::invalid_argument("camera basis is not orthonormal");
    }
}

TraceRay pixel_ray(const CameraModel& camera, int i, int j) {
    if (i < 1 || i > camera.rows || j < 1 || j > camera.cols) {
        throw std::out_of_range("pixel (" + std::to_string(i) + ", " + std::to_string(j) + ") outside the screen");
    }
    const double u = (i - 0.5 * camera.rows) * camera.pixel_pitch;
    const double v = (j - 0.5 * camera.cols) * camera.pixel_pitch;
    const Vec3 b0 = camera.position + camera.e_i * u + camera.e_j * v;
    return {b0, normalize(b0 - camera.focus()), RayStage::screen};
}

std::optional<Vec3> intersect_surface(const TraceRay& ray, const SurfaceRealization& surf, double t,
                                      const IntersectOptions& options) {
    const Vec3& b = ray.origin;
    const Vec3& r = ray.direction;
    auto f = [&](double k, double& df) {
        const SurfaceSample s = surf.sample(b.x + k * r.x, b.y + k * r.y, t);
        df = r.z - (s.dw_dx * r.x + s.dw_dy * r.y);
        return b.z + k * r.z - s.height;
    };
    const double amp = surf.amplitude_sum();
    const double slope = surf.slope_bound(r.x, r.y);
    const double max_range = options.max_range;

    double k_start = 0.0;
    double k_end = max_range;
    if (r.z < 0.0) {
        k_start = std::max(0.0, (b.z - amp) / -r.z);
        k_end = std::min(max_range, (b.z + amp) / -r.z);
    } else if (b.z > amp) {
        return std::nullopt;  // rising ray above every crest
    }
    if (k_start > max_range) return std::nullopt;

    double df = 0.0;
    double f_start = f(k_start, df);
    if (f_start <= 0.0) {
        // Origin already at or below the surface.
        if (k_start == 0.0 && std::abs(f_start) <= options.tolerance) return b;
        if (k_start == 0.0) return std::nullopt;
        return b + r * k_start;  // only when the slab top touches W exactly
    }

    if (r.z < 0.0 && slope < -r.z) {
        // f is strictly decreasing: one root, bracketed by the slab.
        const double f_end = f(k_end, df);
        if (f_end > 0.0) return std::nullopt;
        const double guess = b.z / -r.z;
        const double k = solve_bracketed(f, k_start, k_end, guess, 1e-3 * options.tolerance);
        return b + r * k;
    }

    const double lipschitz = std::abs(r.z) + slope;
    double k = k_start;
    double fk = f_start;
    while (k < k_end) {
        const double step = std::max(fk / lipschitz, options.march_step);
        const double k_next = std::min(k + step, k_end);
        const double f_next = f(k_next, df);
        if (f_next <= 0.0) {
            const double root = solve_bracketed(f, k, k_next, k - fk * (k_next - k) / (f_next - fk),
                                                1e-3 * options.tolerance);
            return b + r * root;
        }
        k = k_next;
        fk = f_next;
    }
    return std::nullopt;
}

Refracted refract(const Vec3& incident, const Vec3& normal, double eta) {
    const double cos_i = -dot(incident, normal);
    const double radicand = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
    if (radicand < 0.0) return {incident, true};
    return {normalize(incident * eta + normal * (eta * cos_i - std::sqrt(radicand))), false};
}

Refracted refract_backward(const Vec3& ray_dir, const Vec3& normal_up, const OpticalConstants& consts) {
    if (!(dot(ray_dir, normal_up) < 0.0)) {
        throw std::invalid_argument("refract_backward: ray must travel down through the upward normal");
    }
    return refract(ray_dir, normal_up, consts.n_air / consts.n_water);
}

double distance_to_line(const TraceRay& ray, const Vec3& point) {
    const Vec3 v = point - ray.origin;
    return norm(v - ray.direction * dot(ray.direction, v));
}

bool source_hit_test(const TraceRay& ray, const Vec3& source, double r0) {
    if (!(dot(ray.direction, source - ray.origin) > 0.0)) return false;
    // Inclusive boundary; the slack absorbs round-off of the projection.
    return distance_to_line(ray, source) <= r0 * (1.0 + 1e-12);
}

double render_pixel(const CameraModel& camera, const LinkGeometry& geom, const OpticalConstants& consts,
                    int i, int j, const IntersectOptions& options) {
    return trace_pixel(camera, geom, consts, consts.i0, i, j, options).intensity;
}

IntensityFrame render(const CameraModel& camera, const LinkGeometry& geom, const OpticalConstants& consts,
                      const RenderOptions& options) {
    camera.validate();
    geom.validate();
    IntensityFrame frame;
    frame.rows = camera.rows;
    frame.cols = camera.cols;
    frame.t = geom.t;
    frame.camera = camera;
    frame.pixels.assign(static_cast<std::size_t>(camera.rows) * camera.cols, 0.0);

    PixelWindow win = options.window.value_or(PixelWindow{0, 0, camera.rows, camera.cols});
    if (win.row0 < 0 || win.col0 < 0 || win.rows < 0 || win.cols < 0 || win.row0 + win.rows > camera.rows ||
        win.col0 + win.cols > camera.cols) {
        throw std::out_of_range("render window exceeds the screen");
    }
    const double i0 = options.beacon_i0.value_or(consts.i0);
    detail::parallel_for(static_cast<std::size_t>(win.rows), options.jobs, [&](std::size_t dr) {
        const int row = win.row0 + static_cast<int>(dr);
        for (int col = win.col0; col < win.col0 + win.cols; ++col) {
            frame.pixels[static_cast<std::size_t>(row) * camera.cols + col] =
                trace_pixel(camera, geom, consts, i0, row + 1, col + 1, options.intersect).intensity;
        }
    });

    if (options.fill_truth) {
        FrameTruth truth;
        truth.solution = solve_refraction_point(geom, consts, options.solver);
        truth.gain = gain_for_solution(geom, truth.solution, consts);
        truth.direction = normalize(truth.solution.point - geom.receiver);
        frame.truth = truth;
    }
    return frame;
}

std::optional<double> reciprocity_error(const CameraModel& camera, const LinkGeometry& geom,
                                        const OpticalConstants& consts, int i, int j,
                                        const IntersectOptions& options) {
    const TraceRay ray = pixel_ray(camera, i, j);
    const auto hit = intersect_surface(ray, *geom.surface, geom.t, options);
    if (!hit) return std::nullopt;
    const Vec3 focus = camera.focus();
    const RefractionSolution sol =
        refine_refraction_point(geom.transmitter, focus, *geom.surface, geom.t, consts, hit->x, hit->y);
    const Vec3 s = sol.point;
    const double denom = dot(focus - s, camera.boresight);
    if (denom == 0.0) return std::nullopt;
    const Vec3 p = s + (focus - s) * (dot(camera.position - s, camera.boresight) / denom);
    return norm(p - ray.origin);
}

void write_pgm16(const std::filesystem::path& path, const IntensityFrame& frame) {
    double lo = 0.0;
    double hi = 0.0;
    if (!frame.pixels.empty()) {
        const auto [mn, mx] = std::minmax_element(frame.pixels.begin(), frame.pixels.end());
        lo = *mn;
        hi = *mx;
    }
    std::string data = "P5\n" + std::to_string(frame.cols) + " " + std::to_string(frame.rows) + "\n65535\n";
    data.reserve(data.size() + 2 * frame.pixels.size());
    for (const double v : frame.pixels) {
        const double scaled = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(scaled, 0.0, 1.0) * 65535.0));
        data.push_back(static_cast<char>(q >> 8));
        data.push_back(static_cast<char>(q & 0xFF));
    }
    write_text_or_throw(path, data);
    char sidecar[128];
    std::snprintf(sidecar, sizeof sidecar, "min %.17g\nmax %.17g\n", lo, hi);
    std::filesystem::path side = path;
    side += ".txt";
    write_text_or_throw(side, sidecar);
}

}  // namespace owc
