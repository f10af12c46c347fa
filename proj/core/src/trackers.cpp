#include "owc/trackers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "csv.hpp"
#include "owc/errors.hpp"

namespace owc {

namespace {

std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(ids[i]);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

constexpr const char* kValidSpecs = "valid trackers: oracle, meanshift, none, file:<path>";

}  // namespace

MissingPredictionsError::MissingPredictionsError(std::vector<int> ids)
    : std::runtime_error("missing predictions for sample ids: " + join_ids(ids)), ids_(std::move(ids)) {}

MeanShiftState meanshift_step(const Grid& frame, MeanShiftState state) {
    if (frame.rows <= 0 || frame.cols <= 0) throw std::invalid_argument("meanshift_step: empty frame");
    if (!(state.bandwidth > 0.0)) throw std::invalid_argument("meanshift_step: bandwidth must be > 0");
    const double bw2 = state.bandwidth * state.bandwidth;
    state.iterations = 0;
    for (int it = 0; it < state.max_iters; ++it) {
        const int r_lo = std::max(0, static_cast<int>(std::floor(state.row - state.bandwidth)));
        const int r_hi = std::min(frame.rows - 1, static_cast<int>(std::ceil(state.row + state.bandwidth)));
        const int c_lo = std::max(0, static_cast<int>(std::floor(state.col - state.bandwidth)));
        const int c_hi = std::min(frame.cols - 1, static_cast<int>(std::ceil(state.col + state.bandwidth)));
        double sum = 0.0;
        double sr = 0.0;
        double sc = 0.0;
        for (int r = r_lo; r <= r_hi; ++r) {
            for (int c = c_lo; c <= c_hi; ++c) {
                const double dr = r - state.row;
                const double dc = c - state.col;
                if (dr * dr + dc * dc > bw2) continue;
                const double w = std::max(0.0F, frame.at(r, c));
                sum += w;
                sr += w * r;
                sc += w * c;
            }
        }
        if (!(sum > 0.0)) break;
        const double nr = sr / sum;
        const double nc = sc / sum;
        const double shift = std::hypot(nr - state.row, nc - state.col);
        state.row = nr;
        state.col = nc;
        state.iterations = it + 1;
        if (shift < state.eps) break;
    }
    return state;
}

Vec3 pixel_to_direction(double i, double j, const CameraModel& camera) {
    const Vec3 b0 = camera.position + camera.e_i * ((i - 0.5 * camera.rows) * camera.pixel_pitch) +
                    camera.e_j * ((j - 0.5 * camera.cols) * camera.pixel_pitch);
    return normalize(b0 - camera.focus());
}

std::optional<std::pair<double, double>> direction_to_pixel(const Vec3& direction, const CameraModel& camera) {
    const double along = dot(direction, camera.boresight);
    if (!(along > 0.0)) return std::nullopt;
    const Vec3 p = camera.focus() + direction * (camera.focal_length / along) - camera.position;
    return std::pair{0.5 * camera.rows + dot(p, camera.e_i) / camera.pixel_pitch,
                     0.5 * camera.cols + dot(p, camera.e_j) / camera.pixel_pitch};
}

TrackerOutput oracle_track(const LinkGeometry& geom, const OpticalConstants& consts, const SolverOptions& solver) {
    const RefractionSolution sol = solve_refraction_point(geom, consts, solver);
    return {normalize(sol.point - geom.receiver), sol.converged ? 1.0 : 0.0, 0};
}

TrackerOutput OracleTracker::update(const TrackerFrame& frame) {
    if (frame.truth) {
        return {normalize(frame.truth->point - frame.geometry->receiver), frame.truth->converged ? 1.0 : 0.0, 0};
    }
    if (!frame.geometry || !frame.consts) throw std::invalid_argument("oracle tracker needs the scene geometry");
    return oracle_track(*frame.geometry, *frame.consts, frame.solver ? *frame.solver : SolverOptions{});
}

void MeanShiftTracker::reset(const SequenceInfo& info) {
    last_.reset();
    initial_ = info.initial_pointing;
}

TrackerOutput MeanShiftTracker::update(const TrackerFrame& frame) {
    if (!frame.image) throw std::invalid_argument("mean-shift tracker needs an image");
    const Grid& img = *frame.image;
    const CameraModel& cam = frame.camera;
    // Screen centre pixel in crop coordinates.
    double row = 0.5 * cam.rows - 1 - frame.crop_row0;
    double col = 0.5 * cam.cols - 1 - frame.crop_col0;
    if (!last_) {
        float best = 0.0F;
        for (int r = 0; r < img.rows; ++r) {
            for (int c = 0; c < img.cols; ++c) {
                if (img.at(r, c) > best) {
                    best = img.at(r, c);
                    row = r;
                    col = c;
                }
            }
        }
    } else if (const auto p = direction_to_pixel(*last_, cam)) {
        row = std::clamp(p->first - 1 - frame.crop_row0, 0.0, img.rows - 1.0);
        col = std::clamp(p->second - 1 - frame.crop_col0, 0.0, img.cols - 1.0);
    }
    MeanShiftState state{row, col, params_.bandwidth, params_.max_iters, params_.eps, 0};
    state = meanshift_step(img, state);
    const Vec3 y = pixel_to_direction(frame.crop_row0 + state.row + 1, frame.crop_col0 + state.col + 1, cam);
    last_ = y;
    return {y, state.iterations > 0 ? 1.0 : 0.0, 0};
}

Predictions read_predictions(const std::filesystem::path& path) {
    const detail::CsvTable table = detail::read_csv(path);
    const std::string name = path.string();
    const std::size_t c_id = table.column("id", name);
    const std::size_t c1 = table.column("y1", name);
    const std::size_t c2 = table.column("y2", name);
    const std::size_t c3 = table.column("y3", name);
    Predictions out;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        const double id_value = detail::parse_field(row[c_id], name);
        if (id_value != std::floor(id_value)) throw IoError(name + ": non-integer id '" + row[c_id] + "'");
        const int id = static_cast<int>(id_value);
        const Vec3 v{detail::parse_field(row[c1], name), detail::parse_field(row[c2], name),
                     detail::parse_field(row[c3], name)};
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) throw IoError(name + ": zero or non-finite vector for id " + row[c_id]);
        if (!out.emplace(id, v / n).second) throw IoError(name + ": duplicate id " + row[c_id]);
    }
    return out;
}

void require_prediction_ids(const Predictions& predictions, std::span<const int> ids) {
    std::vector<int> missing;
    for (const int id : ids) {
        if (!predictions.contains(id)) missing.push_back(id);
    }
    if (!missing.empty()) throw MissingPredictionsError(std::move(missing));
}

void FileTracker::reset(const SequenceInfo& info) {
    const auto it = predictions_->find(info.sample_id);
    if (it == predictions_->end()) throw MissingPredictionsError({info.sample_id});
    current_ = it->second;
}

std::string TrackerSpec::id() const {
    switch (kind) {
        case Kind::oracle: return "oracle";
        case Kind::meanshift: return "meanshift";
        case Kind::none: return "none";
        case Kind::file: return "file:" + path.filename().string();
    }
    return "?";
}

TrackerSpec parse_tracker_spec(std::string_view text) {
    text = trim(text);
    TrackerSpec spec;
    if (text == "oracle") {
        spec.kind = TrackerSpec::Kind::oracle;
    } else if (text == "meanshift") {
        spec.kind = TrackerSpec::Kind::meanshift;
    } else if (text == "none") {
        spec.kind = TrackerSpec::Kind::none;
    } else if (text.starts_with("file:") && text.size() > 5) {
        spec.kind = TrackerSpec::Kind::file;
        spec.path = std::string(text.substr(5));
    } else {
        throw ConfigError("unknown tracker '" + std::string(text) + "'; " + kValidSpecs);
    }
    return spec;
}

std::vector<TrackerSpec> parse_tracker_list(std::string_view text) {
    std::vector<TrackerSpec> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_tracker_spec(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                          : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    std::set<std::string> seen;
    for (const auto& s : out) {
        if (!seen.insert(s.id()).second) throw ConfigError("tracker '" + s.id() + "' listed twice");
    }
    return out;
}

std::unique_ptr<Tracker> make_tracker(const TrackerSpec& spec, const MeanShiftParams& params,
                                      std::shared_ptr<const Predictions> predictions) {
    switch (spec.kind) {
        case TrackerSpec::Kind::oracle: return std::make_unique<OracleTracker>();
        case TrackerSpec::Kind::meanshift: return std::make_unique<MeanShiftTracker>(params);
        case TrackerSpec::Kind::none: return std::make_unique<NoAlignmentTracker>();
        case TrackerSpec::Kind::file:
            if (!predictions) predictions = std::make_shared<const Predictions>(read_predictions(spec.path));
            return std::make_unique<FileTracker>(spec.id(), std::move(predictions));
    }
    throw ConfigError(kValidSpecs);
}

std::vector<TrackerOutput> track_sequence(Tracker& tracker, const SequenceInfo& info,
                                          std::span<const TrackerFrame> frames) {
    if (frames.empty()) throw std::invalid_argument("track_sequence: empty sequence");
    tracker.reset(info);
    std::vector<TrackerOutput> out;
    out.reserve(frames.size());
    for (const TrackerFrame& f : frames) out.push_back(tracker.update(f));
    return out;
}

}  // namespace owc
