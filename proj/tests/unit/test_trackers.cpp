#include <doctest.h>

#include <cmath>
#include <string>

#include "owc/errors.hpp"
#include "owc/trackers.hpp"
#include "test_support.hpp"

using namespace owc;
using namespace owc::testing;

#ifndef OWC_FIXTURE_DIR
#error "OWC_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

const std::filesystem::path kFixtures = OWC_FIXTURE_DIR;

Grid blob(int rows, int cols, double r0, double c0, double sigma) {
    Grid g(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            g.at(r, c) = static_cast<float>(std::exp(-((r - r0) * (r - r0) + (c - c0) * (c - c0)) / (2 * sigma * sigma)));
        }
    }
    return g;
}

}  // namespace

TEST_CASE("mean-shift on an all-zero frame stays put") {
    const MeanShiftState s = meanshift_step(Grid(16, 16), {5.5, 7.25, 6.0, 30, 0.05, 0});
    CHECK(s.row == 5.5);
    CHECK(s.col == 7.25);
    CHECK(s.iterations == 0);
}

TEST_CASE("mean-shift converges onto a single bright pixel") {
    Grid g(32, 32);
    g.at(12, 14) = 1.0F;
    const MeanShiftState s = meanshift_step(g, {9.0, 11.0, 6.0, 30, 0.05, 0});
    CHECK(s.row == doctest::Approx(12.0));
    CHECK(s.col == doctest::Approx(14.0));
}

TEST_CASE("first mean-shift step lands on the weighted centroid") {
    Grid g(32, 32);
    g.at(10, 10) = 2.0F;
    g.at(10, 13) = 1.0F;
    const MeanShiftState s = meanshift_step(g, {10.0, 11.0, 6.0, 1, 0.05, 0});
    CHECK(s.row == doctest::Approx(10.0));
    CHECK(s.col == doctest::Approx((2.0 * 10 + 1.0 * 13) / 3.0));
    CHECK(s.iterations == 1);
}

TEST_CASE("mean-shift is translation equivariant") {
    const MeanShiftState a = meanshift_step(blob(48, 48, 20.3, 18.7, 2.0), {17.0, 16.0, 6.0, 30, 1e-6, 0});
    const MeanShiftState b = meanshift_step(blob(48, 48, 25.3, 21.7, 2.0), {22.0, 19.0, 6.0, 30, 1e-6, 0});
    CHECK(b.row - a.row == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(b.col - a.col == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("pixel and direction mappings invert each other") {
    const CameraModel cam = CameraModel::look({2, -1, 45}, normalize(Vec3{0.05, -0.1, -1}));
    CHECK(norm(pixel_to_direction(32, 32, cam) - cam.boresight) < 1e-12);
    const Vec3 right = pixel_to_direction(33, 32, cam);
    CHECK(angle_between(right, cam.boresight) == doctest::Approx(std::atan(1e-4 / 0.015)).epsilon(1e-12));
    CHECK(dot(right - cam.boresight, cam.e_i) > 0.0);
    for (int i = 1; i <= 64; i += 9) {
        for (int j = 1; j <= 64; j += 7) {
            CHECK(norm(pixel_to_direction(i, j, cam) - pixel_ray(cam, i, j).direction) < 1e-12);
            const auto p = direction_to_pixel(pixel_ray(cam, i, j).direction, cam);
            REQUIRE(p);
            CHECK(p->first == doctest::Approx(i).epsilon(1e-9));
            CHECK(p->second == doctest::Approx(j).epsilon(1e-9));
        }
    }
    CHECK_FALSE(direction_to_pixel(-cam.boresight, cam));
}

TEST_CASE("oracle on a flat vertical scene looks straight down") {
    const SurfaceRealization flat = SurfaceRealization::flat();
    LinkGeometry g;
    g.transmitter = {0, 0, -10};
    g.receiver = {0, 0, 50};
    g.tx_boresight = {0, 0, 1};
    g.rx_boresight = {0, 0, -1};
    g.surface = &flat;
    const TrackerOutput o = oracle_track(g, OpticalConstants{});
    CHECK(norm(o.y_hat - Vec3{0, 0, -1}) < 1e-12);
    CHECK(o.confidence == 1.0);
}

TEST_CASE("tracker specs") {
    CHECK(parse_tracker_spec("oracle").kind == TrackerSpec::Kind::oracle);
    CHECK(parse_tracker_spec(" none ").kind == TrackerSpec::Kind::none);
    const TrackerSpec f = parse_tracker_spec("file:out/predictions.csv");
    CHECK(f.kind == TrackerSpec::Kind::file);
    CHECK(f.path == "out/predictions.csv");
    CHECK(f.id() == "file:predictions.csv");
    CHECK(parse_tracker_list("oracle,meanshift,none").size() == 3);
    try {
        parse_tracker_spec("kalman");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("oracle") != std::string::npos);
        CHECK(msg.find("meanshift") != std::string::npos);
        CHECK(msg.find("file:<path>") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_tracker_list("oracle,oracle"), ConfigError);
    CHECK_THROWS_AS(parse_tracker_spec("file:"), ConfigError);
}

TEST_CASE("prediction files replay renormalised rows by id") {
    const Predictions p = read_predictions(kFixtures / "predictions_3.csv");
    REQUIRE(p.size() == 3);
    CHECK(p.at(0) == Vec3{0.6, 0.0, -0.8});
    CHECK(p.at(1) == Vec3{0.6, 0.8, 0.0});
    CHECK(p.at(2) == Vec3{0.0, 0.0, -1.0});
    auto tracker = make_tracker(parse_tracker_spec("file:" + (kFixtures / "predictions_3.csv").string()), {});
    for (int id = 0; id < 3; ++id) {
        const std::vector<TrackerFrame> frames(4);
        const auto out = track_sequence(*tracker, {id, {0, 0, -1}}, frames);
        for (const TrackerOutput& o : out) {
            CHECK(o.y_hat == p.at(id));
            CHECK(norm(o.y_hat) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    try {
        require_prediction_ids(p, std::vector<int>{0, 1, 2, 5, 9});
        FAIL("expected MissingPredictionsError");
    } catch (const MissingPredictionsError& e) {
        CHECK(e.ids() == std::vector<int>{5, 9});
        CHECK(std::string(e.what()).find("5, 9") != std::string::npos);
    }
    const std::vector<TrackerFrame> one(1);
    CHECK_THROWS_AS(track_sequence(*tracker, {7, {0, 0, -1}}, one), MissingPredictionsError);
}

TEST_CASE("malformed prediction files name the file") {
    const auto dir = scratch_dir("predictions");
    spit(dir / "bad.csv", "id,y1,y2,y3\n0,0,0,0\n");
    try {
        read_predictions(dir / "bad.csv");
        FAIL("expected an IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    }
    spit(dir / "short.csv", "id,y1,y2\n0,1,0\n");
    CHECK_THROWS_AS(read_predictions(dir / "short.csv"), IoError);
    CHECK_THROWS_AS(read_predictions(dir / "absent.csv"), IoError);
}

TEST_CASE("no-alignment keeps the initial pointing") {
    NoAlignmentTracker t;
    const std::vector<TrackerFrame> frames(5);
    const Vec3 init = normalize(Vec3{0.1, 0.2, -1});
    for (const TrackerOutput& o : track_sequence(t, {0, init}, frames)) CHECK(o.y_hat == init);
    CHECK_THROWS(track_sequence(t, {0, init}, std::vector<TrackerFrame>{}));
}

TEST_CASE("mean-shift tracker follows a beacon blob") {
    const CameraModel cam = CameraModel::look({0, 0, 40}, {0, 0, -1});
    MeanShiftTracker t;
    std::vector<Grid> images;
    std::vector<TrackerFrame> frames;
    for (int k = 0; k < 3; ++k) images.push_back(blob(32, 32, 10.0 + k, 20.0 - k, 1.5));
    for (int k = 0; k < 3; ++k) {
        TrackerFrame f;
        f.index = k;
        f.image = &images[static_cast<std::size_t>(k)];
        f.crop_row0 = 16;
        f.crop_col0 = 16;
        f.camera = cam;
        frames.push_back(f);
    }
    const auto out = track_sequence(t, {0, cam.boresight}, frames);
    for (int k = 0; k < 3; ++k) {
        const Vec3 expected = pixel_to_direction(16 + 10.0 + k + 1, 16 + 20.0 - k + 1, cam);
        CHECK(angle_between(out[static_cast<std::size_t>(k)].y_hat, expected) < 0.1 * std::atan(1e-4 / 0.015));
    }
}
