#include <doctest.h>

#include <cmath>
#include <string>

#include "owc/config.hpp"
#include "owc/errors.hpp"
#include "test_support.hpp"

using namespace owc;

TEST_CASE("defaults reproduce the environment table") {
    const RunConfig c;
    CHECK(c.spectrum.gravity == 9.8);
    CHECK(c.spectrum.wind_speed_10m == 10.0);
    CHECK(c.spectrum.fetch == 2.0e4);
    CHECK(c.spectrum.peak_enhancement == 3.3);
    CHECK(c.optics.a_w == 1.80e-2);
    CHECK(c.optics.b_w == 3.81e-3);
    CHECK(c.optics.b_a == 2.96e-5);
    CHECK(c.camera.fps == 60.0);
    CHECK(c.camera.focal_length == 0.015);
    CHECK(c.camera.pixel_pitch == 1e-4);
    CHECK_NOTHROW(c.validate());
    const SpectrumParams s = c.resolved_spectrum();
    CHECK(s.omega_p == doctest::Approx(1.7227809708053514).epsilon(1e-14));
    CHECK(c.spectral_grid().size() == 64u * 36u);
}

TEST_CASE("key = value parsing with comments") {
    const auto e = parse_config_text("# header\nseed = 7  # trailing\n\n  wind_speed_10m=12.5\n");
    REQUIRE(e.size() == 2);
    CHECK(e[0] == std::pair<std::string, std::string>{"seed", "7"});
    CHECK(e[1] == std::pair<std::string, std::string>{"wind_speed_10m", "12.5"});
    CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(" = 3\n"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected with the key named") {
    RunConfig c;
    try {
        apply_entries(c, {{"wind_speeed", "3"}});
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("wind_speeed") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_entries(c, {{"rows", "sixty"}}), ConfigError);
    CHECK_THROWS_AS(apply_entries(c, {{"tx_pointing", "sideways"}}), ConfigError);
}

TEST_CASE("validation names the offending key") {
    RunConfig c;
    apply_entries(c, {{"fetch", "-1"}});
    try {
        c.validate();
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("fetch", 0) == 0);
    }
    RunConfig d;
    d.dataset.crop_rows = 100;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    RunConfig e;
    e.eval.sweep_snr.clear();
    CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("formatted configs parse back identically") {
    RunConfig c;
    apply_entries(c, {{"seed", "123"},
                      {"noise_snr_db", "17.25"},
                      {"sweep_snr", "40, 20,0.5"},
                      {"phillips_alpha", "0.0123"},
                      {"tx_pointing", "oracle"},
                      {"loop", "open"},
                      {"source_radius", "0.1"}});
    const std::string text = format_config(c);
    RunConfig d;
    apply_entries(d, parse_config_text(text));
    CHECK(format_config(d) == text);
    CHECK(d.seed == 123);
    CHECK(d.eval.sweep_snr == std::vector<double>{40.0, 20.0, 0.5});
    CHECK(d.eval.tx_pointing == TxPointing::oracle);
    REQUIRE(d.phillips_alpha);
    CHECK(*d.phillips_alpha == 0.0123);
    CHECK(to_entries(d).size() == config_keys().size());
}

TEST_CASE("doubles format bit-exactly") {
    for (const double v : {0.1, 1.0 / 3.0, 2.96e-5, 1e300, -0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("config files") {
    const auto dir = owc::testing::scratch_dir("config");
    owc::testing::spit(dir / "a.cfg", "samples = 12\n");
    const auto e = read_config_file(dir / "a.cfg");
    REQUIRE(e.size() == 1);
    try {
        read_config_file(dir / "missing.cfg");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("missing.cfg") != std::string::npos);
    }
}
