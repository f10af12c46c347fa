#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "owc/vision_renderer.hpp"
#include "test_support.hpp"

using namespace owc;
using namespace owc::testing;

namespace {

constexpr double kPi = std::numbers::pi;

// Screen position (1-based, continuous) of a world point seen through the pinhole.
std::pair<double, double> project(const CameraModel& cam, const Vec3& p) {
    const Vec3 F = cam.position - cam.boresight * cam.focal_length;
    const Vec3 d = p - F;
    const Vec3 on_screen = F + d * (cam.focal_length / dot(d, cam.boresight)) - cam.position;
    return {dot(on_screen, cam.e_i) / cam.pixel_pitch + 0.5 * cam.rows,
            dot(on_screen, cam.e_j) / cam.pixel_pitch + 0.5 * cam.cols};
}

// Flat-sea crossing of T -> R by bisection along the horizontal line joining them.
Vec3 flat_crossing(const Vec3& T, const Vec3& R, double nw, double na) {
    const double X = std::hypot(R.x - T.x, R.y - T.y);
    double lo = 0.0;
    double hi = X;
    for (int i = 0; i < 200; ++i) {
        const double x = 0.5 * (lo + hi);
        const double f = nw * x / std::hypot(x, T.z) - na * (X - x) / std::hypot(X - x, R.z);
        (f > 0.0 ? hi : lo) = x;
    }
    const double s = X > 0.0 ? 0.5 * (lo + hi) / X : 0.0;
    return {T.x + s * (R.x - T.x), T.y + s * (R.y - T.y), 0.0};
}

}  // namespace

TEST_CASE("camera basis is orthonormal") {
    for (const Vec3& b : {Vec3{0, 0, -1}, normalize(Vec3{0.3, -0.2, -1}), normalize(Vec3{1, 0.5, -0.4})}) {
        const CameraModel c = CameraModel::look({0, 0, 40}, b);
        CHECK(std::abs(dot(c.e_i, c.e_j)) < 1e-12);
        CHECK(std::abs(dot(c.e_i, c.boresight)) < 1e-12);
        CHECK(std::abs(dot(c.e_j, c.boresight)) < 1e-12);
        CHECK(norm(c.e_i) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm(c.e_j) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const CameraModel down = CameraModel::look({0, 0, 40}, {0, 0, -1});
    CHECK(down.e_i.x == doctest::Approx(1.0));
    CHECK(down.e_j.y == doctest::Approx(1.0));
}

TEST_CASE("pixel rays") {
    const CameraModel c = CameraModel::look({1, 2, 40}, normalize(Vec3{0.1, 0.0, -1.0}));
    const TraceRay centre = pixel_ray(c, 32, 32);
    CHECK(norm(centre.direction - c.boresight) < 1e-12);
    const TraceRay next = pixel_ray(c, 33, 32);
    CHECK(angle_between(next.direction, c.boresight) == doctest::Approx(std::atan(1e-4 / 0.015)).epsilon(1e-12));
    CHECK(angle_between(next.direction, c.boresight) == doctest::Approx(6.666e-3).epsilon(1e-3));
    const TraceRay corner = pixel_ray(c, 64, 64);
    CHECK(angle_between(corner.direction, c.boresight) ==
          doctest::Approx(std::atan(1e-4 * std::hypot(32.0, 32.0) / 0.015)).epsilon(1e-12));
    CHECK_THROWS_AS(pixel_ray(c, 0, 1), std::out_of_range);
    CHECK_THROWS_AS(pixel_ray(c, 1, 65), std::out_of_range);
}

TEST_CASE("flat surface intersections") {
    const SurfaceRealization flat = SurfaceRealization::flat();
    const auto a = intersect_surface({{0, 0, 20}, {0, 0, -1}}, flat, 0.0);
    REQUIRE(a);
    CHECK(norm(*a) < 1e-12);
    const auto b = intersect_surface({{0, 0, 20}, normalize(Vec3{1, 0, -1})}, flat, 0.0);
    REQUIRE(b);
    CHECK(norm(*b - Vec3{20, 0, 0}) < 1e-9);
    CHECK_FALSE(intersect_surface({{0, 0, 20}, {0, 0, 1}}, flat, 0.0));
}

TEST_CASE("wavy intersections lie on the surface") {
    const SurfaceRealization sea = default_sea(12);
    Rng rng(13);
    for (int k = 0; k < 200; ++k) {
        const Vec3 o{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(20, 60)};
        const Vec3 d = normalize(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), -rng.uniform(0.3, 1.0)});
        const double t = rng.uniform(0, 100);
        const auto p = intersect_surface({o, d}, sea, t);
        REQUIRE(p);
        CHECK(std::abs(p->z - sea.height(p->x, p->y, t)) < 1e-9);
        // Nothing above the surface between the origin and the hit.
        const double k_hit = norm(*p - o);
        bool clear = true;
        for (int s = 1; s < 400; ++s) {
            const Vec3 q = o + d * (k_hit * s / 400.0);
            clear &= q.z > sea.height(q.x, q.y, t) - 1e-9;
        }
        CHECK(clear);
    }
}

TEST_CASE("backward refraction") {
    const OpticalConstants c = unit_air();
    const Refracted n = refract_backward({0, 0, -1}, {0, 0, 1}, c);
    CHECK_FALSE(n.total_internal_reflection);
    CHECK(norm(n.direction - Vec3{0, 0, -1}) < 1e-15);
    const Refracted o = refract_backward(normalize(Vec3{1, 0, -1}), {0, 0, 1}, c);
    CHECK(angle_between(o.direction, {0, 0, -1}) == doctest::Approx(std::asin(std::sin(kPi / 4) / 1.33)).epsilon(1e-12));
    CHECK(angle_between(o.direction, {0, 0, -1}) * 180 / kPi == doctest::Approx(32.12).epsilon(1e-3));
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 d = normalize(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), -rng.uniform(0.01, 1)});
        const Vec3 nrm = normalize(Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0});
        if (dot(d, nrm) >= 0.0) continue;
        CHECK(norm(refract_backward(d, nrm, c).direction) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(refract_backward({0, 0, 1}, {0, 0, 1}, c), std::invalid_argument);
    CHECK(refract({std::sin(1.2), 0, std::cos(1.2)}, {0, 0, -1}, 1.33).total_internal_reflection);
}

TEST_CASE("source disc test") {
    const TraceRay ray{{0, 0, 0}, {0, 0, -1}, RayStage::refracted};
    CHECK(source_hit_test(ray, {0, 0, -10}, 0.3));
    CHECK(distance_to_line(ray, {0.3, 0, -10}) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(source_hit_test(ray, {0.3, 0, -10}, 0.3));
    CHECK_FALSE(source_hit_test(ray, {0.31, 0, -10}, 0.3));
    CHECK(dot(Vec3{0, 0, 10} - ray.origin, ray.direction) < 0.0);
    CHECK_FALSE(source_hit_test(ray, {0, 0, 10}, 0.3));
}

TEST_CASE("flat-sea centroid follows the pinhole projection") {
    const SurfaceRealization flat = SurfaceRealization::flat();
    const OpticalConstants c;
    Rng rng(21);
    for (int k = 0; k < 5; ++k) {
        LinkGeometry g;
        g.transmitter = {rng.uniform(-4, 4), rng.uniform(-4, 4), -rng.uniform(6, 12)};
        g.receiver = {0, 0, 40};
        g.surface = &flat;
        const Vec3 S = flat_crossing(g.transmitter, g.receiver, c.n_water, c.n_air);
        g.tx_boresight = normalize(S - g.transmitter);
        g.rx_boresight = {0, 0, -1};
        const CameraModel cam = CameraModel::look(g.receiver, g.rx_boresight);
        const IntensityFrame f = render(cam, g, c);
        double w = 0.0;
        double ci = 0.0;
        double cj = 0.0;
        for (int r = 0; r < f.rows; ++r) {
            for (int col = 0; col < f.cols; ++col) {
                w += f.at(r, col);
                ci += f.at(r, col) * (r + 1);
                cj += f.at(r, col) * (col + 1);
            }
        }
        REQUIRE(w > 0.0);
        const auto [pi, pj] = project(cam, S);
        CHECK(std::hypot(ci / w - pi, cj / w - pj) < 1.0);
        REQUIRE(f.truth);
        CHECK(norm(f.truth->direction - normalize(S - g.receiver)) < 1e-9);
    }
}

TEST_CASE("calm vertical link lights the centre") {
    const SurfaceRealization flat = SurfaceRealization::flat();
    LinkGeometry g;
    g.transmitter = {0, 0, -10};
    g.receiver = {0, 0, 40};
    g.tx_boresight = {0, 0, 1};
    g.rx_boresight = {0, 0, -1};
    g.surface = &flat;
    const IntensityFrame f = render(CameraModel::look(g.receiver, g.rx_boresight), g, OpticalConstants{});
    int best_r = 0;
    int best_c = 0;
    for (int r = 0; r < f.rows; ++r) {
        for (int c = 0; c < f.cols; ++c) {
            if (f.at(r, c) > f.at(best_r, best_c)) {
                best_r = r;
                best_c = c;
            }
        }
    }
    CHECK(best_r + 1 == 32);
    CHECK(best_c + 1 == 32);

    g.transmitter = {200, 0, -10};
    g.tx_boresight = normalize(Vec3{0, 0, 1});
    const IntensityFrame dark = render(CameraModel::look(g.receiver, g.rx_boresight), g, OpticalConstants{});
    for (const double v : dark.pixels) CHECK(v == 0.0);
}

TEST_CASE("frames do not depend on the worker count") {
    const SurfaceRealization sea = default_sea(40);
    Rng rng(41);
    LinkGeometry g = link_geometry(random_link(rng), sea);
    const RefractionSolution s = solve_refraction_point(g, OpticalConstants{});
    g.tx_boresight = normalize(s.point - g.transmitter);
    g.rx_boresight = normalize(s.point - g.receiver);
    const CameraModel cam = CameraModel::look(g.receiver, g.rx_boresight);
    RenderOptions o;
    o.window = PixelWindow{16, 16, 32, 32};
    o.jobs = 1;
    const IntensityFrame a = render(cam, g, OpticalConstants{}, o);
    o.jobs = 3;
    const IntensityFrame b = render(cam, g, OpticalConstants{}, o);
    CHECK(a.pixels == b.pixels);
    int lit = 0;
    for (const double v : a.pixels) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
        lit += v > 0.0;
    }
    CHECK(lit > 0);
    CHECK(a.at(0, 0) == 0.0);  // outside the window
    CHECK(render_pixel(cam, g, OpticalConstants{}, 33, 33) == a.at(32, 32));
}

TEST_CASE("lit pixels are reciprocal") {
    const OpticalConstants c;
    int lit = 0;
    int ok = 0;
    Rng rng(55);
    for (int k = 0; k < 4; ++k) {
        const SurfaceRealization sea = default_sea(60 + k);
        LinkGeometry g = link_geometry(random_link(rng), sea);
        const RefractionSolution s = solve_refraction_point(g, c);
        g.tx_boresight = normalize(s.point - g.transmitter);
        g.rx_boresight = normalize(s.point - g.receiver);
        const CameraModel cam = CameraModel::look(g.receiver, g.rx_boresight);
        RenderOptions o;
        o.window = PixelWindow{16, 16, 32, 32};
        const IntensityFrame f = render(cam, g, c, o);
        for (int r = 0; r < f.rows; ++r) {
            for (int col = 0; col < f.cols; ++col) {
                if (f.at(r, col) <= 0.0) continue;
                ++lit;
                const auto e = reciprocity_error(cam, g, c, r + 1, col + 1);
                ok += e && *e <= 2.0 * cam.pixel_pitch;
            }
        }
    }
    REQUIRE(lit > 0);
    CHECK(ok >= 0.95 * lit);
}

TEST_CASE("16-bit PGM output") {
    const auto dir = scratch_dir("pgm");
    IntensityFrame f;
    f.rows = 2;
    f.cols = 3;
    f.pixels = {0.0, 1.0, 2.0, 3.0, 4.0, 4.0};
    write_pgm16(dir / "f.pgm", f);
    const std::string bytes = slurp(dir / "f.pgm");
    const std::string header = "P5\n3 2\n65535\n";
    REQUIRE(bytes.substr(0, header.size()) == header);
    REQUIRE(bytes.size() == header.size() + 12);
    const auto sample = [&](int k) {
        return static_cast<unsigned char>(bytes[header.size() + 2 * k]) * 256 +
               static_cast<unsigned char>(bytes[header.size() + 2 * k + 1]);
    };
    CHECK(sample(0) == 0);
    CHECK(sample(4) == 65535);
    CHECK(sample(2) == 32768);
    CHECK(slurp(dir / "f.pgm.txt").find("min 0") != std::string::npos);
}
