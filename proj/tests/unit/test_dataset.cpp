#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "owc/dataset.hpp"
#include "owc/errors.hpp"
#include "owc/scene.hpp"
#include "test_support.hpp"

using namespace owc;
using namespace owc::testing;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.dataset.samples = 6;
    c.dataset.frames_per_sample = 3;
    c.seed = 5;
    c.jobs = 2;
    return c;
}

}  // namespace

TEST_CASE("split arithmetic") {
    CHECK(split_counts(10) == SplitCounts{7, 1, 2});
    CHECK(split_counts(200) == SplitCounts{140, 30, 30});
    CHECK(split_counts(1) == SplitCounts{0, 0, 1});
    const auto s = assign_splits(200);
    CHECK(std::count(s.begin(), s.end(), Split::train) == 140);
    CHECK(std::count(s.begin(), s.end(), Split::val) == 30);
    CHECK(std::count(s.begin(), s.end(), Split::test) == 30);
    CHECK(assign_splits(200) == s);
}

TEST_CASE("preprocess crops the centre and normalises") {
    std::vector<double> raw(64 * 64, 0.0);
    raw[16 * 64 + 16] = 5.0;  // 1-based (17, 17): first retained pixel
    raw[47 * 64 + 47] = 2.5;  // 1-based (48, 48): last retained pixel
    raw[15 * 64 + 15] = 9.0;  // outside the crop
    const Grid g = preprocess(raw, 64, 64, 32, 32);
    REQUIRE(g.rows == 32);
    CHECK(g.at(0, 0) == 1.0F);
    CHECK(g.at(31, 31) == 0.5F);
    CHECK(*std::max_element(g.data.begin(), g.data.end()) == 1.0F);
    const Grid z = preprocess(std::vector<double>(64 * 64, 0.0), 64, 64, 32, 32);
    CHECK(std::all_of(z.data.begin(), z.data.end(), [](float v) { return v == 0.0F; }));
    CHECK_THROWS(preprocess(raw, 64, 64, 65, 32));
    CHECK(crop_offset(64, 32) == 16);
}

TEST_CASE("noise injection") {
    Grid g(64, 64, 0.5F);
    Rng a(1);
    CHECK(inject_noise(g, std::numeric_limits<double>::infinity(), a) == g);
    Rng b(2);
    const Grid n = inject_noise(g, 20.0, b);
    double s = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double d = n.data[i] - g.data[i];
        s += d;
        ss += d * d;
    }
    const double m = s / g.data.size();
    const double sd = std::sqrt(ss / g.data.size() - m * m);
    CHECK(std::abs(sd - 0.1) < 0.015);
    Rng c(2);
    CHECK(inject_noise(g, 20.0, c) == n);
    Grid zero(8, 8, 0.0F);
    Rng d(3);
    const Grid clamped = inject_noise(zero, 0.0, d);
    CHECK(std::all_of(clamped.data.begin(), clamped.data.end(), [](float v) { return v >= 0.0F; }));
}

TEST_CASE("augmentation") {
    Sample s;
    Grid f(32, 32, 0.0F);
    f.at(10, 12) = 1.0F;
    s.frames = {f, f};
    s.label = {0, 0, -1};
    Rng rng(4);
    const Sample same = augment_with(s, 0.0, 0, 0, 0.0, rng);
    CHECK(same.frames == s.frames);
    const Sample moved = augment_with(s, 0.0, 0, 5, 0.0, rng);
    CHECK(moved.frames[1].at(10, 17) == 1.0F);
    CHECK(moved.frames[0].at(10, 12) == 0.0F);
    CHECK(moved.label == s.label);

    // A marker 6 px right of the centre rotated by 5 degrees.
    Grid c(33, 33, 0.0F);
    c.at(16, 22) = 1.0F;
    Sample r;
    r.frames = {c};
    const Sample rot = augment_with(r, 5.0, 0, 0, 0.0, rng);
    double w = 0.0;
    double cr = 0.0;
    double cc = 0.0;
    for (int i = 0; i < 33; ++i) {
        for (int j = 0; j < 33; ++j) {
            w += rot.frames[0].at(i, j);
            cr += rot.frames[0].at(i, j) * i;
            cc += rot.frames[0].at(i, j) * j;
        }
    }
    const double th = 5.0 * std::numbers::pi / 180.0;
    CHECK(std::hypot(cr / w - (16 + 6 * std::sin(th)), cc / w - (16 + 6 * std::cos(th))) < 1.0);
}

TEST_CASE("generated samples are labelled by the refraction solve") {
    const RunConfig c = small_config();
    const Sample s = generate_sample(c, 3);
    REQUIRE(s.frames.size() == 3);
    CHECK(norm(s.label) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.t == doctest::Approx(s.meta.t0 + 2.0 / 60.0).epsilon(1e-15));
    const Scene scene = make_scene(c, s.meta.seed, 3);
    const LinkGeometry g = scene_geometry(scene, s.t, scene.initial_tx_boresight, scene.initial_boresight);
    const RefractionSolution sol = solve_refraction_point(g, c.optics, c.solver);
    CHECK(angle_between(normalize(sol.point - scene.receiver), s.label) < 1e-9);
    for (const Grid& f : s.frames) {
        CHECK(f.rows == 32);
        CHECK(std::all_of(f.data.begin(), f.data.end(), [](float v) { return v >= 0.0F && v <= 1.0F; }));
    }
    CHECK(generate_sample(c, 3).frames == s.frames);
}

TEST_CASE("datasets round trip and are deterministic") {
    const RunConfig c = small_config();
    const auto a = scratch_dir("dataset_a");
    const auto b = scratch_dir("dataset_b");
    const DatasetManifest m = generate_dataset(c, a);
    RunConfig serial = c;
    serial.jobs = 1;
    generate_dataset(serial, b);
    CHECK(m.counts == split_counts(6));
    for (const std::string& f : m.files) {
        if (f == "config.cfg") continue;  // records jobs
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    const Dataset d = load_dataset(a);
    CHECK(d.manifest.n_t == 3);
    CHECK(d.train.size() + d.val.size() + d.test.size() == 6);
    std::set<int> ids;
    for (const Sample* s : d.select("all")) ids.insert(s->id);
    CHECK(ids.size() == 6);
    for (const Sample* s : d.select("all")) {
        const Sample fresh = generate_sample(c, s->id);
        CHECK(fresh.frames == s->frames);
        CHECK(norm(s->label - fresh.label) < 1e-8);
        CHECK(s->meta.seed == fresh.meta.seed);
        CHECK(s->meta.receiver == fresh.meta.receiver);
    }
    CHECK(slurp(a / "labels_train.csv").rfind("id,y1,y2,y3,t,sx,sy,sz,g_total\n", 0) == 0);
    CHECK(std::filesystem::file_size(a / "frames_test.bin") == d.test.size() * 3 * 32 * 32 * 4);
}

TEST_CASE("corrupt datasets are reported by file") {
    const RunConfig c = small_config();
    const auto a = scratch_dir("dataset_bad");
    generate_dataset(c, a);
    std::filesystem::resize_file(a / "frames_train.bin", 10);
    try {
        load_dataset(a);
        FAIL("expected an IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("frames_train.bin") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset(a / "nowhere"), IoError);
}
