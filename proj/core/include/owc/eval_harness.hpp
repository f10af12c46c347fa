#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "owc/channel_optics.hpp"
#include "owc/config.hpp"
#include "owc/dataset.hpp"
#include "owc/trackers.hpp"

namespace owc {

/// Angle between two unit vectors in [0, pi]. Throws std::invalid_argument
/// when either norm is off by more than 1e-6.
double angle_difference(const Vec3& y_hat, const Vec3& y);

struct RssResult {
    double rss = 0.0;
    GainBreakdown gain;
    bool valid = false;
    Vec3 tx_boresight;
    std::optional<Vec3> pointed_point;  // receiver pointing ray on the surface
};

/// I0 * G with the receiver along geom.rx_boresight and the transmitter aimed
/// per `mode` (fixed keeps geom.tx_boresight). The path is `truth`.
RssResult rss_for_pointing(const LinkGeometry& geom, const RefractionSolution& truth, const OpticalConstants& consts,
                           TxPointing mode, const IntersectOptions& intersect = {});

struct FrameScore {
    std::string tracker;
    int frame = 0;
    double t = 0.0;
    double angle_err = 0.0;  // rad
    double rss = 0.0;
    GainBreakdown gain;
    bool valid = false;
};

/// One line of the refraction-point trace: true S and where the tracker's
/// pointing meets the surface (NaN when it misses).
struct TraceRow {
    int frame = 0;
    double t = 0.0;
    double true_sx = 0.0;
    double true_sy = 0.0;
    std::string tracker;
    double point_sx = 0.0;
    double point_sy = 0.0;
};

struct TemporalResult {
    std::vector<FrameScore> scores;  // tracker-major, then frame
    std::vector<TraceRow> trace;
    std::vector<std::string> failures;  // "tracker: message" for trackers that aborted
};

struct SweepRow {
    std::string tracker;
    double snr_db = 0.0;
    double mean_angle_err = 0.0;
    double stderr_angle = 0.0;
    double mean_rss = 0.0;
    double stderr_rss = 0.0;
    int n = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // snr-major, then tracker
};

/// Open-loop scoring of stored samples: every tracker runs over each
/// sample's frames (noised at `snr_db` with per-sample streams that do not
/// depend on the SNR) and is scored once, at the last frame. Rows use the
/// sample id as `frame`. File trackers must cover every selected id.
TemporalResult run_dataset(const Dataset& dataset, std::span<const TrackerSpec> trackers, const RunConfig& config,
                           double snr_db);

/// Closed- (or open-) loop run over `duration` seconds at `fps` on one scene
/// drawn from the config seed. Images are rendered only for trackers that use them.
TemporalResult run_live(const RunConfig& config, std::span<const TrackerSpec> trackers);

/// Mean and standard error per tracker of the scores at one SNR.
std::vector<SweepRow> aggregate_scores(const TemporalResult& result, double snr_db);

SweepResult run_noise_sweep(const Dataset& dataset, std::span<const TrackerSpec> trackers, const RunConfig& config,
                            std::span<const double> snr_db);

void write_scores_csv(const std::filesystem::path& path, const TemporalResult& result);
void write_trace_csv(const std::filesystem::path& path, const TemporalResult& result);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

/// gnuplot script plotting angle error and RSS against SNR from `sweep_csv`.
void write_sweep_plot(const std::filesystem::path& path, const std::string& sweep_csv,
                      std::span<const std::string> trackers);

/// gnuplot script plotting RSS against time from `scores_csv`.
void write_scores_plot(const std::filesystem::path& path, const std::string& scores_csv,
                       std::span<const std::string> trackers);

}  // namespace owc
