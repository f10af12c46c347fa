#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "test_support.hpp"

using namespace owc::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int rc = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    ::unsetenv("OWC_SEED");
    args.insert(args.begin(), "owcsim");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int rc = owc::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {rc, out.str(), err.str()};
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

// Ten samples of two frames, generated once.
const fs::path& small_dataset() {
    static const fs::path dir = [] {
        const fs::path d = scratch_dir("cli_dataset");
        const Run r = run({"gen", "--samples", "10", "--frames-per-sample", "2", "--seed", "7", "--out", d.string()});
        REQUIRE(r.rc == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("gen reports the split and echoes the configuration") {
    const fs::path dir = scratch_dir("cli_gen");
    const Run r = run({"gen", "--samples", "10", "--frames-per-sample", "2", "--seed", "7", "--out", dir.string()});
    REQUIRE(r.rc == 0);
    CHECK(contains(r.out, "# effective configuration"));
    CHECK(contains(r.out, "seed = 7\n"));
    CHECK(contains(r.out, "train=7 val=1 test=2"));
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "effective.cfg"));
    for (const char* split : {"train", "val", "test"}) {
        CHECK(fs::exists(dir / ("frames_" + std::string(split) + ".bin")));
        CHECK(fs::exists(dir / ("labels_" + std::string(split) + ".csv")));
    }
    CHECK(slurp(dir / "frames_test.bin") == slurp(small_dataset() / "frames_test.bin"));
    CHECK(slurp(dir / "labels_train.csv") == slurp(small_dataset() / "labels_train.csv"));
}

TEST_CASE("configuration errors exit with 2") {
    const fs::path dir = scratch_dir("cli_config");
    Run r = run({"gen", "--config", (dir / "absent.cfg").string(), "--out", dir.string()});
    CHECK(r.rc == 2);
    CHECK(contains(r.err, "absent.cfg"));

    spit(dir / "bad.cfg", "samples = 4\nwind = 3\n");
    r = run({"gen", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
    CHECK(r.rc == 2);
    CHECK(contains(r.err, "wind"));

    r = run({"gen", "--samples", "0", "--out", dir.string()});
    CHECK(r.rc == 2);
    CHECK(contains(r.err, "samples"));

    r = run({"track", "--dataset", small_dataset().string(), "--trackers", "kalman", "--out", dir.string()});
    CHECK(r.rc == 2);
    CHECK(contains(r.err, "meanshift"));

    r = run({"sweep", "--dataset", small_dataset().string(), "--snr", "", "--out", dir.string()});
    CHECK(r.rc == 2);

    r = run({"track", "--dataset", small_dataset().string(), "--live", "--trackers", "oracle"});
    CHECK(r.rc == 2);

    CHECK(run({"frobnicate"}).rc == 2);
    CHECK(run({"gen", "--no-such-flag", "1"}).rc == 2);
    CHECK(run({"--help"}).rc == 0);
}

TEST_CASE("missing dataset directories exit with 3") {
    const fs::path dir = scratch_dir("cli_io");
    const Run r = run({"track", "--dataset", (dir / "nowhere").string(), "--trackers", "oracle", "--out", dir.string()});
    CHECK(r.rc == 3);
    CHECK(contains(r.err, "nowhere"));
}

TEST_CASE("prediction files without every id exit with 4") {
    const fs::path dir = scratch_dir("cli_predictions");
    spit(dir / "predictions.csv", "id,y1,y2,y3\n0,0,0,-1\n");
    const Run r = run({"track", "--dataset", small_dataset().string(), "--trackers",
                       "file:" + (dir / "predictions.csv").string(), "--out", dir.string()});
    CHECK(r.rc == 4);
    CHECK(contains(r.err, "6"));
}

TEST_CASE("track writes scores and trace files and reruns byte for byte") {
    const fs::path a = scratch_dir("cli_track_a");
    const fs::path b = scratch_dir("cli_track_b");
    const std::vector<std::string> common{"track", "--dataset", small_dataset().string(), "--trackers", "oracle,meanshift,none"};
    std::vector<std::string> args = common;
    args.insert(args.end(), {"--out", a.string()});
    const Run ra = run(args);
    REQUIRE(ra.rc == 0);
    args = common;
    args.insert(args.end(), {"--out", b.string()});
    REQUIRE(run(args).rc == 0);
    const std::string scores = slurp(a / "scores.csv");
    CHECK(lines(scores) == 1 + 3 * 2);
    CHECK(lines(slurp(a / "trace.csv")) == 1 + 3 * 2);
    CHECK(scores == slurp(b / "scores.csv"));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    CHECK(fs::exists(a / "scores.gp"));
    CHECK(contains(ra.out, "oracle: n=2"));
}

TEST_CASE("sweep writes one row per tracker and snr") {
    const fs::path a = scratch_dir("cli_sweep_a");
    const fs::path b = scratch_dir("cli_sweep_b");
    REQUIRE(run({"sweep", "--dataset", small_dataset().string(), "--eval-split", "all", "--out", a.string()}).rc == 0);
    REQUIRE(run({"sweep", "--dataset", small_dataset().string(), "--eval-split", "all", "--out", b.string()}).rc == 0);
    const std::string csv = slurp(a / "sweep.csv");
    CHECK(lines(csv) == 1 + 3 * 4);
    CHECK(csv == slurp(b / "sweep.csv"));
    CHECK(contains(csv, "\nmeanshift,5,"));
    CHECK(contains(slurp(a / "sweep.gp"), "sweep.csv"));

    const fs::path c = scratch_dir("cli_sweep_c");
    REQUIRE(run({"sweep", "--dataset", small_dataset().string(), "--snr", "15,25", "--trackers", "oracle", "--out",
                 c.string()})
                .rc == 0);
    CHECK(lines(slurp(c / "sweep.csv")) == 3);
}

TEST_CASE("live tracking runs from the command line") {
    const fs::path dir = scratch_dir("cli_live");
    const Run r = run({"track", "--live", "--duration", "0.1", "--trackers", "oracle,none", "--out", dir.string()});
    REQUIRE(r.rc == 0);
    CHECK(lines(slurp(dir / "scores.csv")) == 1 + 2 * 6);
}

TEST_CASE("render and surface write their files") {
    const fs::path dir = scratch_dir("cli_render");
    Run r = run({"render", "--sample", "3", "--out", dir.string()});
    REQUIRE(r.rc == 0);
    const std::string pgm = slurp(dir / "frame.pgm");
    CHECK(pgm.rfind("P5\n64 64\n65535\n", 0) == 0);
    CHECK(pgm.size() == std::string("P5\n64 64\n65535\n").size() + 64 * 64 * 2);

    r = run({"surface", "--grid-rows", "8", "--grid-cols", "6", "--out", dir.string()});
    REQUIRE(r.rc == 0);
    const owc::Heightmap h = owc::read_heightmap(dir / "surface.f32");
    CHECK(h.rows == 8);
    CHECK(h.cols == 6);
    CHECK(fs::file_size(dir / "surface.f32") == 24 + 8 * 6 * 4);
}
