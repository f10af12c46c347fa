#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "owc/channel_optics.hpp"
#include "owc/config.hpp"
#include "owc/dataset.hpp"
#include "owc/vision_renderer.hpp"

namespace owc {

struct TrackerOutput {
    Vec3 y_hat;  // unit, receiver -> predicted refraction point
    double confidence = 1.0;
    int latency_frames = 0;
};

/// Flat-kernel mean-shift window in continuous 0-based (row, col) coordinates.
struct MeanShiftState {
    double row = 0.0;
    double col = 0.0;
    double bandwidth = 6.0;
    int max_iters = 30;
    double eps = 0.05;
    int iterations = 0;  // used by the last step
};

/// Moves the window to the intensity-weighted mean of the pixels within
/// `bandwidth` of its centre, repeating up to max_iters or until the shift
/// drops below eps. A window with zero total weight leaves the centre alone.
MeanShiftState meanshift_step(const Grid& frame, MeanShiftState state);

/// Outward line-of-sight direction for continuous 1-based screen coordinates
/// (i, j), the inverse of `pixel_ray`.
Vec3 pixel_to_direction(double i, double j, const CameraModel& camera);

/// Screen coordinates (1-based, continuous) where the line of sight along
/// `direction` lands, or nullopt when it points behind the camera.
std::optional<std::pair<double, double>> direction_to_pixel(const Vec3& direction, const CameraModel& camera);

/// Exact direction from the receiver to the solved refraction point.
/// Propagates solver non-convergence through `confidence` = 0.
TrackerOutput oracle_track(const LinkGeometry& geom, const OpticalConstants& consts, const SolverOptions& solver = {});

/// Everything a tracker may look at for one frame.
struct TrackerFrame {
    int index = 0;
    double t = 0.0;
    const Grid* image = nullptr;  // preprocessed centre crop, may be null for image-free trackers
    int crop_row0 = 0;            // 0-based screen offset of the crop
    int crop_col0 = 0;
    CameraModel camera;
    const LinkGeometry* geometry = nullptr;          // ground truth scene
    const RefractionSolution* truth = nullptr;       // optional cached solve
    const OpticalConstants* consts = nullptr;
    const SolverOptions* solver = nullptr;
};

struct SequenceInfo {
    int sample_id = 0;
    Vec3 initial_pointing;
};

/// Stateful within one sequence; `reset` starts a new one.
class Tracker {
public:
    virtual ~Tracker() = default;
    virtual std::string name() const = 0;
    virtual bool needs_images() const { return false; }
    virtual void reset(const SequenceInfo& info) = 0;
    virtual TrackerOutput update(const TrackerFrame& frame) = 0;
};

class OracleTracker final : public Tracker {
public:
    std::string name() const override { return "oracle"; }
    void reset(const SequenceInfo&) override {}
    TrackerOutput update(const TrackerFrame& frame) override;
};

class NoAlignmentTracker final : public Tracker {
public:
    std::string name() const override { return "none"; }
    void reset(const SequenceInfo& info) override { pointing_ = info.initial_pointing; }
    TrackerOutput update(const TrackerFrame&) override { return {pointing_, 1.0, 0}; }

private:
    Vec3 pointing_;
};

/// Mean-shift on the beacon image. The first frame starts at the global
/// maximum; later frames start where the previous estimate projects into the
/// current camera.
class MeanShiftTracker final : public Tracker {
public:
    explicit MeanShiftTracker(MeanShiftParams params = {}) : params_(params) {}
    std::string name() const override { return "meanshift"; }
    bool needs_images() const override { return true; }
    void reset(const SequenceInfo& info) override;
    TrackerOutput update(const TrackerFrame& frame) override;

private:
    MeanShiftParams params_;
    std::optional<Vec3> last_;
    Vec3 initial_;
};

/// id -> predicted direction, as read from predictions.csv.
using Predictions = std::map<int, Vec3>;

/// Reads `id,y1,y2,y3`; throws IoError naming the file on malformed input.
Predictions read_predictions(const std::filesystem::path& path);

/// Throws MissingPredictionsError listing every id without a row.
void require_prediction_ids(const Predictions& predictions, std::span<const int> ids);

/// Replays predictions.csv rows by sample id, renormalised.
class FileTracker final : public Tracker {
public:
    FileTracker(std::string label, std::shared_ptr<const Predictions> predictions)
        : label_(std::move(label)), predictions_(std::move(predictions)) {}
    std::string name() const override { return label_; }
    void reset(const SequenceInfo& info) override;
    TrackerOutput update(const TrackerFrame&) override { return {current_, 1.0, 0}; }

private:
    std::string label_;
    std::shared_ptr<const Predictions> predictions_;
    Vec3 current_;
};

/// Parsed `oracle | meanshift | none | file:<path>`.
struct TrackerSpec {
    enum class Kind { oracle, meanshift, none, file };
    Kind kind = Kind::oracle;
    std::filesystem::path path;

    std::string id() const;
};

/// Throws ConfigError listing the valid specs.
TrackerSpec parse_tracker_spec(std::string_view text);

/// Comma-separated list of specs.
std::vector<TrackerSpec> parse_tracker_list(std::string_view text);

/// Builds a fresh tracker. File trackers load their predictions once per call.
std::unique_ptr<Tracker> make_tracker(const TrackerSpec& spec, const MeanShiftParams& params,
                                      std::shared_ptr<const Predictions> predictions = nullptr);

/// Resets the tracker and runs it over the frames in order.
std::vector<TrackerOutput> track_sequence(Tracker& tracker, const SequenceInfo& info,
                                          std::span<const TrackerFrame> frames);

}  // namespace owc
