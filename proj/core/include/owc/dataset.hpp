#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "owc/config.hpp"
#include "owc/rng.hpp"
#include "owc/vec3.hpp"
#include "owc/vision_renderer.hpp"

namespace owc {

/// Row-major single-channel image.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<float> data;

    Grid() = default;
    Grid(int r, int c, float fill = 0.0F) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    bool operator==(const Grid&) const = default;
};

/// Where a sample came from; enough to regenerate its scene.
struct SampleMeta {
    std::uint64_t seed = 0;
    double t0 = 0.0;
    Vec3 transmitter;
    Vec3 receiver;
    Vec3 boresight;  // receiver camera, fixed over the sample
};

struct Sample {
    int id = 0;
    std::vector<Grid> frames;  // n_t preprocessed crops, values in [0, 1]
    Vec3 label;                // unit, receiver -> refraction point at the last frame
    double t = 0.0;            // timestamp of the last frame
    Vec3 refraction_point;
    double g_total = 0.0;  // aligned-link gain at the last frame
    SampleMeta meta;

    double frame_time(int k, double fps) const { return meta.t0 + k / fps; }
};

enum class Split { train, val, test };

std::string to_string(Split split);

struct SplitCounts {
    int train = 0;
    int val = 0;
    int test = 0;
    bool operator==(const SplitCounts&) const = default;
};

/// floor(0.7 n) train, floor(0.15 n) val, the rest test.
SplitCounts split_counts(int n);

/// Split of every id in [0, n): ids ranked by mix64(id), first block train,
/// next val, remainder test.
std::vector<Split> assign_splits(int n);

struct DatasetManifest {
    int version = 1;
    int m = 0;
    int n = 0;
    int n1x = 0;
    int n2x = 0;
    int n_t = 0;
    double fps = 0.0;
    SplitCounts counts;
    std::uint64_t base_seed = 0;
    std::optional<double> snr_db;  // nullopt = noiseless
    std::vector<std::string> files;
};

/// Centre crop to crop_rows x crop_cols, then divide by the crop maximum
/// (all-zero crops stay zero). Throws std::invalid_argument if the crop is
/// larger than the frame.
Grid preprocess(const std::vector<double>& raw, int rows, int cols, int crop_rows, int crop_cols);
Grid preprocess(const IntensityFrame& frame, int crop_rows, int crop_cols);

/// Top-left (0-based) of the centre crop.
inline int crop_offset(int full, int crop) { return (full - crop) / 2; }

/// Adds N(0, sigma^2) with sigma = 10^(-snr_db/20) (peak = 1) and clamps at 0.
/// snr_db = +inf returns the frame unchanged without drawing.
Grid inject_noise(const Grid& frame, double snr_db, Rng& rng);

/// Rotation (degrees, about the crop centre, bilinear, zero fill), integer
/// shift (rows, cols) and pixel noise, applied identically to every frame.
Sample augment_with(const Sample& sample, double rotation_deg, int shift_rows, int shift_cols, double sigma,
                    Rng& rng);

/// Draws rotation in [-rot, rot], shifts in [-shift, shift] and applies them.
Sample augment(const Sample& sample, const AugmentSettings& settings, Rng& rng);

/// Simulates one sample (scene, n_t renders, preprocessing, label).
Sample generate_sample(const RunConfig& config, int id);

/// Simulates all samples, splits them and writes the dataset files into `dir`.
DatasetManifest generate_dataset(const RunConfig& config, const std::filesystem::path& dir);

struct Dataset {
    std::filesystem::path dir;
    DatasetManifest manifest;
    RunConfig config;                   // from config.cfg
    std::vector<Sample> train, val, test;  // each ordered by id

    const std::vector<Sample>& split(Split s) const;
    /// Samples of a named split ("train", "val", "test") or all of them by id.
    std::vector<const Sample*> select(const std::string& split_name) const;
};

/// Writes manifest.json, frames_*.bin, labels_*.csv, meta_*.csv and config.cfg.
void write_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest, const RunConfig& config,
                   const std::vector<Sample>& samples, const std::vector<Split>& splits);

/// Reads everything back; throws IoError naming the offending file.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace owc
