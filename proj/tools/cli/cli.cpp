#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "owc/config.hpp"
#include "owc/dataset.hpp"
#include "owc/errors.hpp"
#include "owc/eval_harness.hpp"
#include "owc/scene.hpp"
#include "owc/trackers.hpp"
#include "owc/vision_renderer.hpp"

namespace owc::cli {

namespace fs = std::filesystem;

namespace {

std::string dashed(std::string key) {
    for (char& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

// Extra spellings accepted for some keys.
const std::map<std::string, std::string> kAliases = {
    {"wind_speed_10m", "--wind-speed"},
    {"noise_snr_db", "--noise-snr"},
    {"sweep_snr", "--snr"},
};

/// Options shared by every subcommand: config file, output directory and one
/// flag per config key.
class CommonOptions {
public:
    void attach(CLI::App& app) {
        app.add_option("--config", config_path_, "key = value configuration file");
        app.add_option("--out", out_dir_, "output directory")->capture_default_str();
        for (const ConfigKey& key : config_keys()) {
            std::string names = "--" + dashed(key.name);
            if (const auto it = kAliases.find(key.name); it != kAliases.end()) names += "," + it->second;
            options_.emplace_back(key.name, app.add_option(names, values_[key.name], key.help));
        }
    }

    const fs::path& out_dir() const { return out_dir_; }

    /// Defaults, then OWC_SEED, then `base` (a dataset's config.cfg), then
    /// --config, then command-line flags.
    RunConfig resolve(const std::optional<fs::path>& base = std::nullopt) const {
        RunConfig config;
        if (const char* env = std::getenv("OWC_SEED"); env != nullptr && *env != '\0') {
            try {
                apply_entries(config, {{"seed", env}});
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("OWC_SEED: ") + e.what());
            }
        }
        if (base) apply_entries(config, read_config_file(*base));
        if (!config_path_.empty()) apply_entries(config, read_config_file(config_path_));
        ConfigEntries overrides;
        for (const auto& [key, option] : options_) {
            if (option->count() > 0) overrides.emplace_back(key, values_.at(key));
        }
        apply_entries(config, overrides);
        config.validate();
        return config;
    }

private:
    std::string config_path_;
    fs::path out_dir_ = "out";
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, CLI::Option*>> options_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !os.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw IoError("cannot write " + path.string());
    }
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

/// Prints the resolved parameters and saves them as effective.cfg.
void echo_config(const RunConfig& config, const fs::path& out_dir, std::ostream& out) {
    const std::string text = format_config(config);
    out << "# effective configuration\n" << text;
    prepare_out_dir(out_dir);
    write_text(out_dir / "effective.cfg", text);
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void print_summary(const std::vector<SweepRow>& rows, std::ostream& out) {
    for (const SweepRow& r : rows) {
        out << r.tracker << ": n=" << r.n << " snr_db=" << format_double(r.snr_db)
            << " mean_angle_err=" << fmt(r.mean_angle_err) << " +- " << fmt(r.stderr_angle)
            << " rad, mean_rss=" << fmt(r.mean_rss) << " +- " << fmt(r.stderr_rss) << "\n";
    }
}

std::vector<std::string> tracker_ids(const std::vector<TrackerSpec>& specs) {
    std::vector<std::string> out;
    for (const TrackerSpec& s : specs) out.push_back(s.id());
    return out;
}

Dataset open_dataset(const fs::path& dir) {
    if (dir.empty()) throw ConfigError("--dataset: a dataset directory is required");
    return load_dataset(dir);
}

int cmd_gen(const CommonOptions& common, std::ostream& out) {
    const RunConfig config = common.resolve();
    echo_config(config, common.out_dir(), out);
    const DatasetManifest m = generate_dataset(config, common.out_dir());
    out << "samples: train=" << m.counts.train << " val=" << m.counts.val << " test=" << m.counts.test << "\n";
    out << "manifest: " << (common.out_dir() / "manifest.json").string() << "\n";
    return kOk;
}

struct TrackArgs {
    fs::path dataset;
    bool live = false;
    std::string trackers;
};

int cmd_track(const CommonOptions& common, const TrackArgs& args, std::ostream& out, std::ostream& err) {
    const std::vector<TrackerSpec> specs = parse_tracker_list(args.trackers);
    TemporalResult result;
    RunConfig config;
    if (args.live) {
        config = common.resolve();
        echo_config(config, common.out_dir(), out);
        result = run_live(config, specs);
    } else {
        const Dataset dataset = open_dataset(args.dataset);
        config = common.resolve(args.dataset / "config.cfg");
        echo_config(config, common.out_dir(), out);
        result = run_dataset(dataset, specs, config, config.eval.noise_snr_db);
    }
    write_scores_csv(common.out_dir() / "scores.csv", result);
    write_trace_csv(common.out_dir() / "trace.csv", result);
    write_scores_plot(common.out_dir() / "scores.gp", "scores.csv", tracker_ids(specs));
    print_summary(aggregate_scores(result, config.eval.noise_snr_db), out);
    out << "scores: " << (common.out_dir() / "scores.csv").string() << "\n";
    for (const std::string& f : result.failures) err << "tracker failed: " << f << "\n";
    return result.failures.empty() ? kOk : kFailure;
}

struct SweepArgs {
    fs::path dataset;
    std::string trackers = "oracle,meanshift,none";
};

int cmd_sweep(const CommonOptions& common, const SweepArgs& args, std::ostream& out) {
    const std::vector<TrackerSpec> specs = parse_tracker_list(args.trackers);
    const Dataset dataset = open_dataset(args.dataset);
    const RunConfig config = common.resolve(args.dataset / "config.cfg");
    echo_config(config, common.out_dir(), out);
    const SweepResult sweep = run_noise_sweep(dataset, specs, config, config.eval.sweep_snr);
    write_sweep_csv(common.out_dir() / "sweep.csv", sweep);
    write_sweep_plot(common.out_dir() / "sweep.gp", "sweep.csv", tracker_ids(specs));
    print_summary(sweep.rows, out);
    out << "sweep: " << (common.out_dir() / "sweep.csv").string() << "\n";
    return kOk;
}

struct SceneArgs {
    int sample = 0;
    int frame = 0;
    int grid_rows = 256;
    int grid_cols = 256;
    double spacing = 0.1;
};

Scene scene_for(const RunConfig& config, const SceneArgs& args) {
    if (args.sample < 0) throw ConfigError("--sample: must be >= 0");
    if (args.frame < 0) throw ConfigError("--frame: must be >= 0");
    return make_scene(config, sample_seed(config.seed, args.sample), args.sample);
}

int cmd_render(const CommonOptions& common, const SceneArgs& args, std::ostream& out) {
    RunConfig config = common.resolve();
    echo_config(config, common.out_dir(), out);
    const Scene scene = scene_for(config, args);
    const double t = scene.t0 + args.frame / config.camera.fps;
    LinkGeometry geom = scene_geometry(scene, t, scene.initial_tx_boresight, scene.initial_boresight);
    const RefractionSolution sol = solve_refraction_point(geom, config.optics, config.solver);
    geom.tx_boresight = normalize(sol.point - scene.transmitter);
    RenderOptions ro;
    ro.intersect = config.camera.intersect;
    ro.solver = config.solver;
    ro.jobs = config.jobs;
    ro.beacon_i0 = config.beacon_i0;
    const IntensityFrame frame = render(scene_camera(config, scene, scene.initial_boresight), geom, config.optics, ro);
    const fs::path path = common.out_dir() / "frame.pgm";
    write_pgm16(path, frame);
    int lit = 0;
    for (const double v : frame.pixels) lit += v > 0.0 ? 1 : 0;
    out << "t=" << format_double(t) << " lit_pixels=" << lit << " refraction_point=(" << fmt(sol.point.x) << ", "
        << fmt(sol.point.y) << ", " << fmt(sol.point.z) << ")\n";
    out << "frame: " << path.string() << "\n";
    return kOk;
}

int cmd_surface(const CommonOptions& common, const SceneArgs& args, std::ostream& out) {
    const RunConfig config = common.resolve();
    echo_config(config, common.out_dir(), out);
    if (args.grid_rows < 1 || args.grid_cols < 1) throw ConfigError("--grid-rows/--grid-cols: must be >= 1");
    if (!(args.spacing > 0.0)) throw ConfigError("--spacing: must be > 0");
    const Scene scene = scene_for(config, args);
    const double t = scene.t0 + args.frame / config.camera.fps;
    const double x0 = -0.5 * (args.grid_cols - 1) * args.spacing;
    const double y0 = -0.5 * (args.grid_rows - 1) * args.spacing;
    const fs::path path = common.out_dir() / "surface.f32";
    write_heightmap(path, scene.surface, args.grid_rows, args.grid_cols, args.spacing, args.spacing, t, x0, y0);
    out << "t=" << format_double(t) << " origin=(" << fmt(x0) << ", " << fmt(y0) << ")\n";
    out << "surface: " << path.string() << "\n";
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Water-to-air optical wireless link simulator"};
    app.name("owcsim");
    app.require_subcommand(1);

    CommonOptions gen_opts;
    CommonOptions track_opts;
    CommonOptions sweep_opts;
    CommonOptions render_opts;
    CommonOptions surface_opts;
    TrackArgs track_args;
    SweepArgs sweep_args;
    SceneArgs render_args;
    SceneArgs surface_args;

    auto* gen = app.add_subcommand("gen", "simulate a dataset into --out");
    gen_opts.attach(*gen);

    auto* track = app.add_subcommand("track", "score trackers on a dataset or a live scene");
    track_opts.attach(*track);
    auto* ds = track->add_option("--dataset", track_args.dataset, "dataset directory");
    auto* live = track->add_flag("--live", track_args.live, "simulate a live closed-loop run instead");
    ds->excludes(live);
    track->add_option("--tracker,--trackers", track_args.trackers, "oracle | meanshift | none | file:<path>, comma-separated")
        ->required();

    auto* sweep = app.add_subcommand("sweep", "average scores over a list of vision SNRs");
    sweep_opts.attach(*sweep);
    sweep->add_option("--dataset", sweep_args.dataset, "dataset directory")->required();
    sweep->add_option("--trackers,--tracker", sweep_args.trackers, "comma-separated tracker specs")
        ->capture_default_str();

    auto* render_cmd = app.add_subcommand("render", "render one full camera frame to frame.pgm");
    render_opts.attach(*render_cmd);
    render_cmd->add_option("--sample", render_args.sample, "scene id")->capture_default_str();
    render_cmd->add_option("--frame", render_args.frame, "frame index after the scene start")->capture_default_str();

    auto* surface = app.add_subcommand("surface", "sample the sea surface to surface.f32");
    surface_opts.attach(*surface);
    surface->add_option("--sample", surface_args.sample, "scene id")->capture_default_str();
    surface->add_option("--frame", surface_args.frame, "frame index after the scene start")->capture_default_str();
    surface->add_option("--grid-rows", surface_args.grid_rows, "samples along y")->capture_default_str();
    surface->add_option("--grid-cols", surface_args.grid_cols, "samples along x")->capture_default_str();
    surface->add_option("--spacing", surface_args.spacing, "grid spacing (m)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_opts, out);
        if (track->parsed()) {
            if (!track_args.live && track_args.dataset.empty()) {
                throw ConfigError("track: either --dataset <dir> or --live is required");
            }
            return cmd_track(track_opts, track_args, out, err);
        }
        if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_args, out);
        if (render_cmd->parsed()) return cmd_render(render_opts, render_args, out);
        if (surface->parsed()) return cmd_surface(surface_opts, surface_args, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const MissingPredictionsError& e) {
        err << "error: " << e.what() << "\n";
        return kMissingPredictions;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

}  // namespace owc::cli
