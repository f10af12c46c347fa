#include "owc/eval_harness.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "csv.hpp"
#include "owc/errors.hpp"
#include "owc/rng.hpp"
#include "owc/scene.hpp"
#include "parallel.hpp"

namespace owc {

namespace {

constexpr std::uint64_t kEvalNoiseStream = 0x6576616c2d6e6f69ULL;

std::shared_ptr<const Predictions> load_predictions_for(const TrackerSpec& spec) {
    if (spec.kind != TrackerSpec::Kind::file) return nullptr;
    return std::make_shared<const Predictions>(read_predictions(spec.path));
}

struct PreparedSample {
    const Sample* sample = nullptr;
    std::unique_ptr<Scene> scene;  // stable address for LinkGeometry::surface
    CameraModel camera;
    std::vector<double> times;
    std::vector<LinkGeometry> geoms;
    std::vector<RefractionSolution> truth;
};

std::vector<PreparedSample> prepare(const Dataset& dataset, const RunConfig& config) {
    const std::vector<const Sample*> selected = dataset.select(config.eval.split);
    std::vector<PreparedSample> out(selected.size());
    const int n_t = dataset.manifest.n_t;
    detail::parallel_for(out.size(), config.jobs, [&](std::size_t i) {
        PreparedSample& p = out[i];
        p.sample = selected[i];
        const Sample& smp = *p.sample;
        p.scene = std::make_unique<Scene>(make_scene(config, smp.meta.seed, smp.id));
        if (norm(p.scene->transmitter - smp.meta.transmitter) > 1e-9 ||
            norm(p.scene->receiver - smp.meta.receiver) > 1e-9 || std::abs(p.scene->t0 - smp.meta.t0) > 1e-9) {
            throw ConfigError("sample " + std::to_string(smp.id) +
                              ": regenerated scene does not match the dataset; scene keys differ from config.cfg");
        }
        p.camera = scene_camera(config, *p.scene, smp.meta.boresight);
        for (int k = 0; k < n_t; ++k) {
            const double t = smp.frame_time(k, dataset.manifest.fps);
            p.times.push_back(t);
            p.geoms.push_back(scene_geometry(*p.scene, t, p.scene->initial_tx_boresight, smp.meta.boresight));
        }
        for (const LinkGeometry& g : p.geoms) p.truth.push_back(solve_refraction_point(g, config.optics, config.solver));
    });
    return out;
}

struct ScoredFrame {
    FrameScore score;
    TraceRow trace;
};

ScoredFrame score_frame(const std::string& tracker, int frame, double t, const LinkGeometry& geom,
                        const RefractionSolution& truth, const Vec3& pointing, const RunConfig& config) {
    LinkGeometry g = geom;
    g.rx_boresight = pointing;
    const RssResult r = rss_for_pointing(g, truth, config.optics, config.eval.tx_pointing, config.camera.intersect);
    ScoredFrame out;
    out.score.tracker = tracker;
    out.score.frame = frame;
    out.score.t = t;
    out.score.angle_err = angle_difference(pointing, normalize(truth.point - geom.receiver));
    out.score.rss = r.rss;
    out.score.gain = r.gain;
    out.score.valid = r.valid;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.trace = {frame, t, truth.point.x, truth.point.y, tracker, r.pointed_point ? r.pointed_point->x : nan,
                 r.pointed_point ? r.pointed_point->y : nan};
    return out;
}

std::vector<Grid> noisy_frames(const Sample& smp, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) return smp.frames;
    // One stream per sample, independent of the SNR, so sweep points share noise shapes.
    Rng rng(seed ^ mix64(static_cast<std::uint64_t>(smp.id)) ^ kEvalNoiseStream);
    std::vector<Grid> out;
    out.reserve(smp.frames.size());
    for (const Grid& g : smp.frames) out.push_back(inject_noise(g, snr_db, rng));
    return out;
}

TemporalResult score_prepared(const std::vector<PreparedSample>& prepared, std::span<const TrackerSpec> trackers,
                              const RunConfig& config, const Dataset& dataset, double snr_db) {
    std::vector<std::shared_ptr<const Predictions>> predictions;
    std::vector<int> ids;
    for (const auto& p : prepared) ids.push_back(p.sample->id);
    for (const TrackerSpec& spec : trackers) {
        predictions.push_back(load_predictions_for(spec));
        if (predictions.back()) require_prediction_ids(*predictions.back(), ids);
    }
    bool any_images = false;
    for (const TrackerSpec& spec : trackers) any_images |= spec.kind == TrackerSpec::Kind::meanshift;

    const std::size_t nt = trackers.size();
    std::vector<std::optional<ScoredFrame>> cells(nt * prepared.size());
    std::vector<std::string> errors(nt * prepared.size());
    const int row0 = crop_offset(dataset.manifest.m, dataset.manifest.n1x);
    const int col0 = crop_offset(dataset.manifest.n, dataset.manifest.n2x);

    detail::parallel_for(prepared.size(), config.jobs, [&](std::size_t s) {
        const PreparedSample& p = prepared[s];
        const Sample& smp = *p.sample;
        const std::vector<Grid> frames = any_images ? noisy_frames(smp, snr_db, config.seed) : std::vector<Grid>{};
        std::vector<TrackerFrame> seq(p.times.size());
        for (std::size_t k = 0; k < seq.size(); ++k) {
            TrackerFrame& f = seq[k];
            f.index = static_cast<int>(k);
            f.t = p.times[k];
            f.image = any_images ? &frames[k] : nullptr;
            f.crop_row0 = row0;
            f.crop_col0 = col0;
            f.camera = p.camera;
            f.geometry = &p.geoms[k];
            f.truth = &p.truth[k];
            f.consts = &config.optics;
            f.solver = &config.solver;
        }
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const std::size_t cell = ti * prepared.size() + s;
            try {
                auto tracker = make_tracker(trackers[ti], config.meanshift, predictions[ti]);
                const auto outputs = track_sequence(*tracker, {smp.id, smp.meta.boresight}, seq);
                const std::size_t last = seq.size() - 1;
                cells[cell] = score_frame(trackers[ti].id(), smp.id, p.times[last], p.geoms[last], p.truth[last],
                                          outputs.back().y_hat, config);
            } catch (const MissingPredictionsError&) {
                throw;
            } catch (const std::exception& e) {
                errors[cell] = e.what();
            }
        }
    });

    TemporalResult result;
    for (std::size_t ti = 0; ti < nt; ++ti) {
        std::string failure;
        for (std::size_t s = 0; s < prepared.size() && failure.empty(); ++s) {
            if (!errors[ti * prepared.size() + s].empty()) {
                failure = trackers[ti].id() + ": sample " + std::to_string(prepared[s].sample->id) + ": " +
                          errors[ti * prepared.size() + s];
            }
        }
        if (!failure.empty()) {
            result.failures.push_back(failure);
            continue;
        }
        for (std::size_t s = 0; s < prepared.size(); ++s) {
            const ScoredFrame& c = *cells[ti * prepared.size() + s];
            result.scores.push_back(c.score);
            result.trace.push_back(c.trace);
        }
    }
    return result;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::string g17(double v) { return detail::format_g(v, 17); }

}  // namespace

double angle_difference(const Vec3& y_hat, const Vec3& y) {
    if (std::abs(norm(y_hat) - 1.0) > 1e-6 || std::abs(norm(y) - 1.0) > 1e-6) {
        throw std::invalid_argument("angle_difference: arguments must be unit vectors");
    }
    return angle_between(y_hat, y);
}

RssResult rss_for_pointing(const LinkGeometry& geom, const RefractionSolution& truth, const OpticalConstants& consts,
                           TxPointing mode, const IntersectOptions& intersect) {
    RssResult out;
    LinkGeometry g = geom;
    out.pointed_point = intersect_surface(TraceRay{geom.receiver, geom.rx_boresight, RayStage::screen},
                                          *geom.surface, geom.t, intersect);
    if (mode == TxPointing::oracle) {
        g.tx_boresight = normalize(truth.point - geom.transmitter);
    } else if (mode == TxPointing::follow && out.pointed_point) {
        g.tx_boresight = normalize(*out.pointed_point - geom.transmitter);
    }
    out.tx_boresight = g.tx_boresight;
    out.gain = gain_for_solution(g, truth, consts);
    out.valid = out.gain.valid;
    out.rss = out.valid ? consts.i0 * out.gain.g_total : 0.0;
    return out;
}

TemporalResult run_dataset(const Dataset& dataset, std::span<const TrackerSpec> trackers, const RunConfig& config,
                           double snr_db) {
    if (trackers.empty()) throw ConfigError("at least one tracker is required");
    const auto prepared = prepare(dataset, config);
    return score_prepared(prepared, trackers, config, dataset, snr_db);
}

SweepResult run_noise_sweep(const Dataset& dataset, std::span<const TrackerSpec> trackers, const RunConfig& config,
                            std::span<const double> snr_db) {
    if (trackers.empty()) throw ConfigError("at least one tracker is required");
    if (snr_db.empty()) throw ConfigError("sweep_snr: must not be empty");
    const auto prepared = prepare(dataset, config);
    SweepResult out;
    for (const double snr : snr_db) {
        const TemporalResult r = score_prepared(prepared, trackers, config, dataset, snr);
        for (const std::string& f : r.failures) throw std::runtime_error("tracker failed: " + f);
        for (SweepRow& row : aggregate_scores(r, snr)) out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<SweepRow> aggregate_scores(const TemporalResult& result, double snr_db) {
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_tracker;
    for (const FrameScore& s : result.scores) {
        auto [it, inserted] = by_tracker.try_emplace(s.tracker);
        if (inserted) order.push_back(s.tracker);
        it->second.first.push_back(s.angle_err);
        it->second.second.push_back(s.rss);
    }
    std::vector<SweepRow> rows;
    for (const std::string& name : order) {
        const auto& [angles, rss] = by_tracker.at(name);
        SweepRow row;
        row.tracker = name;
        row.snr_db = snr_db;
        row.mean_angle_err = mean_of(angles);
        row.stderr_angle = stderr_of(angles, row.mean_angle_err);
        row.mean_rss = mean_of(rss);
        row.stderr_rss = stderr_of(rss, row.mean_rss);
        row.n = static_cast<int>(angles.size());
        rows.push_back(row);
    }
    return rows;
}

TemporalResult run_live(const RunConfig& config, std::span<const TrackerSpec> trackers) {
    if (trackers.empty()) throw ConfigError("at least one tracker is required");
    config.validate();
    const Scene scene = make_scene(config, config.seed, 0);
    const int n = std::max(1, static_cast<int>(std::lround(config.eval.duration * config.camera.fps)));
    std::vector<double> times(static_cast<std::size_t>(n));
    std::vector<LinkGeometry> geoms(times.size());
    std::vector<RefractionSolution> truth(times.size());
    detail::parallel_for(times.size(), config.jobs, [&](std::size_t k) {
        times[k] = scene.t0 + static_cast<double>(k) / config.camera.fps;
        geoms[k] = scene_geometry(scene, times[k], scene.initial_tx_boresight, scene.initial_boresight);
        truth[k] = solve_refraction_point(geoms[k], config.optics, config.solver);
    });

    const int cr = config.dataset.crop_rows;
    const int cc = config.dataset.crop_cols;
    const int row0 = crop_offset(config.camera.rows, cr);
    const int col0 = crop_offset(config.camera.cols, cc);
    RenderOptions ro;
    ro.intersect = config.camera.intersect;
    ro.solver = config.solver;
    ro.window = PixelWindow{row0, col0, cr, cc};
    ro.jobs = config.jobs;
    ro.fill_truth = false;
    ro.beacon_i0 = config.beacon_i0;

    TemporalResult result;
    for (const TrackerSpec& spec : trackers) {
        std::vector<ScoredFrame> rows;
        try {
            auto tracker = make_tracker(spec, config.meanshift, load_predictions_for(spec));
            tracker->reset({0, scene.initial_boresight});
            Rng noise(config.seed ^ kEvalNoiseStream);
            std::vector<Vec3> outputs;
            Vec3 pointing = scene.initial_boresight;
            for (int k = 0; k < n; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const Vec3 bore = config.eval.loop == LoopMode::closed ? pointing : scene.initial_boresight;
                TrackerFrame f;
                f.index = k;
                f.t = times[ku];
                f.crop_row0 = row0;
                f.crop_col0 = col0;
                f.camera = scene_camera(config, scene, bore);
                f.geometry = &geoms[ku];
                f.truth = &truth[ku];
                f.consts = &config.optics;
                f.solver = &config.solver;
                Grid image;
                if (tracker->needs_images()) {
                    LinkGeometry g = geoms[ku];
                    g.tx_boresight = normalize(truth[ku].point - scene.transmitter);
                    g.rx_boresight = f.camera.boresight;
                    image = inject_noise(preprocess(render(f.camera, g, config.optics, ro), cr, cc),
                                         config.eval.noise_snr_db, noise);
                    f.image = &image;
                }
                outputs.push_back(tracker->update(f).y_hat);
                const int src = k - config.eval.latency_frames;
                pointing = src >= 0 ? outputs[static_cast<std::size_t>(src)] : scene.initial_boresight;
                rows.push_back(score_frame(spec.id(), k, times[ku], geoms[ku], truth[ku], pointing, config));
            }
        } catch (const MissingPredictionsError&) {
            throw;
        } catch (const std::exception& e) {
            result.failures.push_back(spec.id() + ": " + e.what());
            continue;
        }
        for (ScoredFrame& r : rows) {
            result.scores.push_back(std::move(r.score));
            result.trace.push_back(std::move(r.trace));
        }
    }
    return result;
}

void write_scores_csv(const std::filesystem::path& path, const TemporalResult& result) {
    std::string out = "tracker,frame,t,angle_err_rad,rss,gd,ga,gpath,gref\n";
    for (const FrameScore& s : result.scores) {
        out += s.tracker + "," + std::to_string(s.frame) + "," + g17(s.t) + "," + g17(s.angle_err) + "," + g17(s.rss) +
               "," + g17(s.gain.g_d) + "," + g17(s.gain.g_a) + "," + g17(s.gain.g_path) + "," + g17(s.gain.g_ref) +
               "\n";
    }
    detail::write_file(path, out);
}

void write_trace_csv(const std::filesystem::path& path, const TemporalResult& result) {
    std::string out = "frame,t,true_sx,true_sy,tracker,point_sx,point_sy\n";
    for (const TraceRow& r : result.trace) {
        out += std::to_string(r.frame) + "," + g17(r.t) + "," + g17(r.true_sx) + "," + g17(r.true_sy) + "," +
               r.tracker + "," + g17(r.point_sx) + "," + g17(r.point_sy) + "\n";
    }
    detail::write_file(path, out);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::string out = "tracker,snr_db,mean_angle_err,stderr_angle,mean_rss,stderr_rss,n\n";
    for (const SweepRow& r : result.rows) {
        out += r.tracker + "," + g17(r.snr_db) + "," + g17(r.mean_angle_err) + "," + g17(r.stderr_angle) + "," +
               g17(r.mean_rss) + "," + g17(r.stderr_rss) + "," + std::to_string(r.n) + "\n";
    }
    detail::write_file(path, out);
}

void write_sweep_plot(const std::filesystem::path& path, const std::string& sweep_csv,
                      std::span<const std::string> trackers) {
    auto series = [&](int col) {
        std::string s;
        for (std::size_t i = 0; i < trackers.size(); ++i) {
            if (i) s += ", \\\n     ";
            s += "'" + sweep_csv + "' using 2:(strcol(1) eq '" + trackers[i] + "' ? $" + std::to_string(col) +
                 " : 1/0) with linespoints title '" + trackers[i] + "'";
        }
        return s + "\n";
    };
    std::string out =
        "# gnuplot script: mean angle error and RSS against peak SNR\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set terminal pngcairo size 1100,420\n"
        "set output 'sweep.png'\n"
        "set multiplot layout 1,2\n"
        "set xlabel 'peak SNR (dB)'\n"
        "set xrange [*:*] reverse\n"
        "set ylabel 'mean angle error (rad)'\n"
        "plot " + series(3) +
        "set ylabel 'mean RSS'\n"
        "plot " + series(5) + "unset multiplot\n";
    detail::write_file(path, out);
}

void write_scores_plot(const std::filesystem::path& path, const std::string& scores_csv,
                       std::span<const std::string> trackers) {
    std::string out =
        "# gnuplot script: received signal strength per frame\n"
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,420\n"
        "set output 'scores.png'\n"
        "set xlabel 't (s)'\n"
        "set ylabel 'RSS'\n"
        "plot ";
    for (std::size_t i = 0; i < trackers.size(); ++i) {
        if (i) out += ", \\\n     ";
        out += "'" + scores_csv + "' using 3:(strcol(1) eq '" + trackers[i] + "' ? $5 : 1/0) with lines title '" +
               trackers[i] + "'";
    }
    out += "\n";
    detail::write_file(path, out);
}

}  // namespace owc
