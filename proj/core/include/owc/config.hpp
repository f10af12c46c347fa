#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "owc/channel_optics.hpp"
#include "owc/vision_renderer.hpp"
#include "owc/wave_surface.hpp"

namespace owc {

/// How the transmitter aims while a receiver tracker is scored.
enum class TxPointing {
    oracle,  // exactly at the true refraction point
    follow,  // at the surface point hit by the receiver's pointing ray
    fixed,   // keeps the calm-sea boresight
};

enum class LoopMode { closed, open };

/// Randomisation ranges for one simulated scene.
struct SceneBox {
    double tx_depth_min = 5.0;  // m below mean sea level
    double tx_depth_max = 15.0;
    double rx_height_min = 30.0;  // m above mean sea level
    double rx_height_max = 60.0;
    double rx_offset_max = 10.0;     // m, horizontal, per axis
    double time_offset_max = 100.0;  // s
};

struct CameraSettings {
    double fps = 60.0;
    double focal_length = 0.015;
    double pixel_pitch = 1e-4;
    int rows = 64;
    int cols = 64;
    IntersectOptions intersect;
};

struct DatasetSettings {
    int samples = 200;
    int frames_per_sample = 16;
    int crop_rows = 32;
    int crop_cols = 32;
    double snr_db = std::numeric_limits<double>::infinity();
};

struct MeanShiftParams {
    double bandwidth = 6.0;  // px
    double eps = 0.05;       // px
    int max_iters = 30;
};

struct EvalSettings {
    TxPointing tx_pointing = TxPointing::follow;
    LoopMode loop = LoopMode::closed;
    int latency_frames = 0;
    double duration = 10.0;  // s, live runs
    double noise_snr_db = std::numeric_limits<double>::infinity();
    std::vector<double> sweep_snr{30.0, 20.0, 10.0, 5.0};
    std::string split = "test";  // train | val | test | all
};

struct AugmentSettings {
    double rotation_deg = 5.0;
    double shift_px = 5.0;
    double sigma = 0.01;
};

/// Every tunable of a run. Built from defaults, then a `key = value` file,
/// then command-line overrides.
struct RunConfig {
    SpectrumParams spectrum;
    std::optional<double> phillips_alpha;  // nullopt = derived from fetch
    std::optional<double> omega_p;         // nullopt = derived from fetch
    int n_omega = 64;
    int n_theta = 36;

    OpticalConstants optics;
    std::optional<double> beacon_i0;  // nullopt = same as i0
    SolverOptions solver;
    CameraSettings camera;
    DatasetSettings dataset;
    SceneBox scene;
    MeanShiftParams meanshift;
    EvalSettings eval;
    AugmentSettings augment;

    std::uint64_t seed = 42;
    int jobs = 0;  // 0 = hardware concurrency

    /// Spectrum with a and omega_p filled in.
    SpectrumParams resolved_spectrum() const;
    SpectralGrid spectral_grid() const;

    /// Throws ConfigError("<key>: <reason>") on the first out-of-range value.
    void validate() const;
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError with
/// the source name and line number on malformed lines.
ConfigEntries parse_config_text(std::string_view text, const std::string& source = "<config>");

/// Throws ConfigError naming the path when it cannot be read.
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Applies entries in order; unknown keys and unparsable values throw ConfigError.
void apply_entries(RunConfig& config, const ConfigEntries& entries);

/// All keys with their current values, in canonical order.
ConfigEntries to_entries(const RunConfig& config);

/// Canonical `key = value` text; parsing it back gives an identical config.
std::string format_config(const RunConfig& config);

struct ConfigKey {
    std::string name;
    std::string help;
};

/// Known keys in canonical order.
const std::vector<ConfigKey>& config_keys();

std::string to_string(TxPointing mode);
std::string to_string(LoopMode mode);

/// Formats a double so that it parses back bit-exactly ("inf" for infinity).
std::string format_double(double value);

}  // namespace owc
