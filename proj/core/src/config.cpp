#include "owc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "owc/errors.hpp"

namespace owc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const char* expected) {
    throw ConfigError(key + ": cannot parse '" + std::string(value) + "' as " + expected);
}

double parse_double(const std::string& key, std::string_view value) {
    std::string_view v = value;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out)) bad_value(key, value, "a number");
    return out;
}

long long parse_integer(const std::string& key, std::string_view value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

int parse_int(const std::string& key, std::string_view value) {
    const long long v = parse_integer(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        bad_value(key, value, "a 32-bit integer");
    }
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, std::string_view value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an unsigned 64-bit integer");
    return out;
}

std::vector<double> parse_double_list(const std::string& key, std::string_view value) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                   : comma - start));
        if (item.empty()) bad_value(key, value, "a comma-separated list of numbers");
        out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

struct KeyDef {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Acc>
KeyDef real(std::string name, std::string help, Acc acc) {
    return {std::move(name), std::move(help),
            [acc](RunConfig& c, const std::string& k, std::string_view v) { acc(c) = parse_double(k, v); },
            [acc](const RunConfig& c) { return format_double(acc(const_cast<RunConfig&>(c))); }};
}

template <class Acc>
KeyDef integer(std::string name, std::string help, Acc acc) {
    return {std::move(name), std::move(help),
            [acc](RunConfig& c, const std::string& k, std::string_view v) { acc(c) = parse_int(k, v); },
            [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); }};
}

// Optional real where "auto" means derived.
template <class Acc>
KeyDef optional_real(std::string name, std::string help, Acc acc) {
    return {std::move(name), std::move(help),
            [acc](RunConfig& c, const std::string& k, std::string_view v) {
                if (v == "auto") {
                    acc(c).reset();
                } else {
                    acc(c) = parse_double(k, v);
                }
            },
            [acc](const RunConfig& c) {
                const auto& v = acc(const_cast<RunConfig&>(c));
                return v ? format_double(*v) : std::string("auto");
            }};
}

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table = [] {
        std::vector<KeyDef> t;
        // Environment
        t.push_back(real("gravity", "gravitational acceleration g (m/s^2)",
                         [](RunConfig& c) -> double& { return c.spectrum.gravity; }));
        t.push_back(real("wind_speed_10m", "wind speed U10 at 10 m (m/s)",
                         [](RunConfig& c) -> double& { return c.spectrum.wind_speed_10m; }));
        t.push_back(real("fetch", "average fetch x (m)", [](RunConfig& c) -> double& { return c.spectrum.fetch; }));
        t.push_back(real("peak_enhancement", "spectrum shaping factor gamma",
                         [](RunConfig& c) -> double& { return c.spectrum.peak_enhancement; }));
        t.push_back(real("spread_p", "directional harmonic factor p",
                         [](RunConfig& c) -> double& { return c.spectrum.spread_p; }));
        t.push_back(real("spread_q", "directional harmonic factor q",
                         [](RunConfig& c) -> double& { return c.spectrum.spread_q; }));
        t.push_back(real("sigma_low", "spectral width for omega <= omega_p",
                         [](RunConfig& c) -> double& { return c.spectrum.sigma_low; }));
        t.push_back(real("sigma_high", "spectral width for omega > omega_p",
                         [](RunConfig& c) -> double& { return c.spectrum.sigma_high; }));
        t.push_back(optional_real("phillips_alpha", "spectrum constant a, or auto",
                                  [](RunConfig& c) -> std::optional<double>& { return c.phillips_alpha; }));
        t.push_back(optional_real("omega_p", "peak angular frequency (rad/s), or auto",
                                  [](RunConfig& c) -> std::optional<double>& { return c.omega_p; }));
        t.push_back(integer("n_omega", "number of spectral frequencies",
                            [](RunConfig& c) -> int& { return c.n_omega; }));
        t.push_back(integer("n_theta", "number of spectral directions",
                            [](RunConfig& c) -> int& { return c.n_theta; }));
        // Channel
        t.push_back(real("n_water", "refractive index of water",
                         [](RunConfig& c) -> double& { return c.optics.n_water; }));
        t.push_back(real("n_air", "refractive index of air", [](RunConfig& c) -> double& { return c.optics.n_air; }));
        t.push_back(real("wavelength", "optical wavelength (m)",
                         [](RunConfig& c) -> double& { return c.optics.wavelength; }));
        t.push_back(real("a_w", "underwater absorption (1/m)", [](RunConfig& c) -> double& { return c.optics.a_w; }));
        t.push_back(real("b_w", "underwater scattering (1/m)", [](RunConfig& c) -> double& { return c.optics.b_w; }));
        t.push_back(real("a_a", "aerial absorption (1/m)", [](RunConfig& c) -> double& { return c.optics.a_a; }));
        t.push_back(real("b_a", "aerial scattering (1/m)", [](RunConfig& c) -> double& { return c.optics.b_a; }));
        t.push_back(real("omega_d", "maximum departure half-angle (rad)",
                         [](RunConfig& c) -> double& { return c.optics.omega_d; }));
        t.push_back(real("omega_a", "maximum arrival half-angle (rad)",
                         [](RunConfig& c) -> double& { return c.optics.omega_a; }));
        t.push_back(real("i0", "transmit intensity", [](RunConfig& c) -> double& { return c.optics.i0; }));
        t.push_back(optional_real("beacon_i0", "beacon intensity for rendered images, or auto (= i0)",
                                  [](RunConfig& c) -> std::optional<double>& { return c.beacon_i0; }));
        t.push_back(real("source_radius", "light source radius R0 (m)",
                         [](RunConfig& c) -> double& { return c.optics.source_radius; }));
        // Refraction solver
        t.push_back(integer("solver_grid", "seed grid points per axis",
                            [](RunConfig& c) -> int& { return c.solver.grid_points; }));
        t.push_back(real("solver_padding", "seed grid padding around the footprint (m)",
                         [](RunConfig& c) -> double& { return c.solver.padding; }));
        t.push_back(real("solver_tol", "Nelder-Mead OPL spread tolerance (m)",
                         [](RunConfig& c) -> double& { return c.solver.opl_tolerance; }));
        t.push_back(integer("solver_max_iter", "Nelder-Mead iteration cap",
                            [](RunConfig& c) -> int& { return c.solver.max_iterations; }));
        t.push_back(integer("solver_candidates", "grid minima refined",
                            [](RunConfig& c) -> int& { return c.solver.max_candidates; }));
        // Vision
        t.push_back(real("fps", "screen sampling rate r (frames/s)",
                         [](RunConfig& c) -> double& { return c.camera.fps; }));
        t.push_back(real("focal_length", "equivalent focusing length f (m)",
                         [](RunConfig& c) -> double& { return c.camera.focal_length; }));
        t.push_back(real("pixel_pitch", "pixel interval d_px (m)",
                         [](RunConfig& c) -> double& { return c.camera.pixel_pitch; }));
        t.push_back(integer("rows", "screen rows M", [](RunConfig& c) -> int& { return c.camera.rows; }));
        t.push_back(integer("cols", "screen columns N", [](RunConfig& c) -> int& { return c.camera.cols; }));
        t.push_back(real("march_step", "ray-march step (m)",
                         [](RunConfig& c) -> double& { return c.camera.intersect.march_step; }));
        t.push_back(real("max_range", "ray-march range (m)",
                         [](RunConfig& c) -> double& { return c.camera.intersect.max_range; }));
        // Dataset
        t.push_back(integer("samples", "number of dataset samples",
                            [](RunConfig& c) -> int& { return c.dataset.samples; }));
        t.push_back(integer("frames_per_sample", "frames per sample n_t",
                            [](RunConfig& c) -> int& { return c.dataset.frames_per_sample; }));
        t.push_back(integer("crop_rows", "crop height n1x", [](RunConfig& c) -> int& { return c.dataset.crop_rows; }));
        t.push_back(integer("crop_cols", "crop width n2x", [](RunConfig& c) -> int& { return c.dataset.crop_cols; }));
        t.push_back(real("dataset_snr_db", "peak SNR of noise baked into stored frames (dB), inf = none",
                         [](RunConfig& c) -> double& { return c.dataset.snr_db; }));
        // Scene box
        t.push_back(real("tx_depth_min", "minimum transmitter depth (m)",
                         [](RunConfig& c) -> double& { return c.scene.tx_depth_min; }));
        t.push_back(real("tx_depth_max", "maximum transmitter depth (m)",
                         [](RunConfig& c) -> double& { return c.scene.tx_depth_max; }));
        t.push_back(real("rx_height_min", "minimum receiver height (m)",
                         [](RunConfig& c) -> double& { return c.scene.rx_height_min; }));
        t.push_back(real("rx_height_max", "maximum receiver height (m)",
                         [](RunConfig& c) -> double& { return c.scene.rx_height_max; }));
        t.push_back(real("rx_offset_max", "maximum horizontal receiver offset per axis (m)",
                         [](RunConfig& c) -> double& { return c.scene.rx_offset_max; }));
        t.push_back(real("time_offset_max", "maximum scene start time (s)",
                         [](RunConfig& c) -> double& { return c.scene.time_offset_max; }));
        // Trackers
        t.push_back(real("meanshift_bandwidth", "mean-shift window radius (px)",
                         [](RunConfig& c) -> double& { return c.meanshift.bandwidth; }));
        t.push_back(real("meanshift_eps", "mean-shift convergence shift (px)",
                         [](RunConfig& c) -> double& { return c.meanshift.eps; }));
        t.push_back(integer("meanshift_max_iters", "mean-shift iteration cap",
                            [](RunConfig& c) -> int& { return c.meanshift.max_iters; }));
        // Evaluation
        t.push_back({"tx_pointing", "transmitter aiming: oracle | follow | fixed",
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         if (v == "oracle") {
                             c.eval.tx_pointing = TxPointing::oracle;
                         } else if (v == "follow") {
                             c.eval.tx_pointing = TxPointing::follow;
                         } else if (v == "fixed") {
                             c.eval.tx_pointing = TxPointing::fixed;
                         } else {
                             bad_value(k, v, "one of oracle, follow, fixed");
                         }
                     },
                     [](const RunConfig& c) { return to_string(c.eval.tx_pointing); }});
        t.push_back({"loop", "receiver re-pointing: closed | open",
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         if (v == "closed") {
                             c.eval.loop = LoopMode::closed;
                         } else if (v == "open") {
                             c.eval.loop = LoopMode::open;
                         } else {
                             bad_value(k, v, "closed or open");
                         }
                     },
                     [](const RunConfig& c) { return to_string(c.eval.loop); }});
        t.push_back(integer("latency_frames", "actuation delay (frames)",
                            [](RunConfig& c) -> int& { return c.eval.latency_frames; }));
        t.push_back(real("duration", "live run length T (s)", [](RunConfig& c) -> double& { return c.eval.duration; }));
        t.push_back(real("noise_snr_db", "peak SNR of evaluation image noise (dB), inf = none",
                         [](RunConfig& c) -> double& { return c.eval.noise_snr_db; }));
        t.push_back({"sweep_snr", "comma-separated SNR list for sweeps (dB)",
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.eval.sweep_snr = parse_double_list(k, v);
                     },
                     [](const RunConfig& c) { return format_list(c.eval.sweep_snr); }});
        t.push_back({"eval_split", "dataset split scored by track/sweep: train | val | test | all",
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         if (v != "train" && v != "val" && v != "test" && v != "all") {
                             bad_value(k, v, "one of train, val, test, all");
                         }
                         c.eval.split = std::string(v);
                     },
                     [](const RunConfig& c) { return c.eval.split; }});
        // Augmentation
        t.push_back(real("augment_rotation_deg", "max augmentation rotation (deg)",
                         [](RunConfig& c) -> double& { return c.augment.rotation_deg; }));
        t.push_back(real("augment_shift_px", "max augmentation shift (px)",
                         [](RunConfig& c) -> double& { return c.augment.shift_px; }));
        t.push_back(real("augment_sigma", "augmentation pixel noise sigma",
                         [](RunConfig& c) -> double& { return c.augment.sigma; }));
        // Run
        t.push_back({"seed", "base random seed",
                     [](RunConfig& c, const std::string& k, std::string_view v) { c.seed = parse_u64(k, v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        t.push_back(integer("jobs", "worker threads, 0 = all cores", [](RunConfig& c) -> int& { return c.jobs; }));
        return t;
    }();
    return table;
}

void check(bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what);
}

}  // namespace

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string to_string(TxPointing mode) {
    switch (mode) {
        case TxPointing::oracle: return "oracle";
        case TxPointing::follow: return "follow";
        case TxPointing::fixed: return "fixed";
    }
    return "?";
}

std::string to_string(LoopMode mode) { return mode == LoopMode::closed ? "closed" : "open"; }

SpectrumParams RunConfig::resolved_spectrum() const {
    SpectrumParams p = SpectrumParams::from_environment(spectrum.gravity, spectrum.wind_speed_10m, spectrum.fetch,
                                                        spectrum.peak_enhancement, phillips_alpha, omega_p);
    p.spread_p = spectrum.spread_p;
    p.spread_q = spectrum.spread_q;
    p.sigma_low = spectrum.sigma_low;
    p.sigma_high = spectrum.sigma_high;
    return p;
}

SpectralGrid RunConfig::spectral_grid() const {
    const SpectrumParams p = resolved_spectrum();
    return SpectralGrid::log_spaced(0.5 * p.omega_p, 5.0 * p.omega_p, n_omega, n_theta);
}

void RunConfig::validate() const {
    check(spectrum.gravity > 0, "gravity", "must be > 0");
    check(spectrum.wind_speed_10m > 0, "wind_speed_10m", "must be > 0");
    check(spectrum.fetch > 0, "fetch", "must be > 0");
    check(spectrum.peak_enhancement >= 1, "peak_enhancement", "must be >= 1");
    check(spectrum.sigma_low > 0, "sigma_low", "must be > 0");
    check(spectrum.sigma_high > 0, "sigma_high", "must be > 0");
    check(directional_factor_min(spectrum.spread_p, spectrum.spread_q) >= 0, "spread_p",
          "spread_p/spread_q make the directional factor negative");
    check(!phillips_alpha || (*phillips_alpha >= 0 && std::isfinite(*phillips_alpha)), "phillips_alpha",
          "must be >= 0 or auto");
    check(!omega_p || (*omega_p > 0 && std::isfinite(*omega_p)), "omega_p", "must be > 0 or auto");
    check(n_omega >= 1 && n_omega <= 4096, "n_omega", "must be in [1, 4096]");
    check(n_theta >= 1 && n_theta <= 4096, "n_theta", "must be in [1, 4096]");

    check(optics.n_air >= 1, "n_air", "must be >= 1");
    check(optics.n_water > optics.n_air, "n_water", "must exceed n_air");
    check(optics.wavelength > 0, "wavelength", "must be > 0");
    check(optics.a_w >= 0, "a_w", "must be >= 0");
    check(optics.b_w >= 0, "b_w", "must be >= 0");
    check(optics.a_a >= 0, "a_a", "must be >= 0");
    check(optics.b_a >= 0, "b_a", "must be >= 0");
    check(optics.omega_d > 0, "omega_d", "must be > 0");
    check(optics.omega_a > optics.omega_d, "omega_a", "must exceed omega_d");
    check(optics.omega_a < std::numbers::pi / 2, "omega_a", "must be < pi/2");
    check(optics.i0 > 0 && std::isfinite(optics.i0), "i0", "must be > 0");
    check(!beacon_i0 || (*beacon_i0 > 0 && std::isfinite(*beacon_i0)), "beacon_i0", "must be > 0 or auto");
    check(optics.source_radius > 0, "source_radius", "must be > 0");

    check(solver.grid_points >= 2 && solver.grid_points <= 1001, "solver_grid", "must be in [2, 1001]");
    check(solver.padding >= 0, "solver_padding", "must be >= 0");
    check(solver.opl_tolerance > 0, "solver_tol", "must be > 0");
    check(solver.max_iterations >= 1, "solver_max_iter", "must be >= 1");
    check(solver.max_candidates >= 1, "solver_candidates", "must be >= 1");

    check(camera.fps > 0 && std::isfinite(camera.fps), "fps", "must be > 0");
    check(camera.focal_length > 0, "focal_length", "must be > 0");
    check(camera.pixel_pitch > 0, "pixel_pitch", "must be > 0");
    check(camera.rows >= 8 && camera.rows <= 512, "rows", "must be in [8, 512]");
    check(camera.cols >= 8 && camera.cols <= 512, "cols", "must be in [8, 512]");
    check(camera.intersect.march_step > 0, "march_step", "must be > 0");
    check(camera.intersect.max_range > 0, "max_range", "must be > 0");

    check(dataset.samples >= 1, "samples", "must be >= 1");
    check(dataset.frames_per_sample >= 1, "frames_per_sample", "must be >= 1");
    check(dataset.crop_rows >= 1 && dataset.crop_rows <= camera.rows, "crop_rows", "must be in [1, rows]");
    check(dataset.crop_cols >= 1 && dataset.crop_cols <= camera.cols, "crop_cols", "must be in [1, cols]");
    check(!std::isnan(dataset.snr_db) && dataset.snr_db > -std::numeric_limits<double>::infinity(),
          "dataset_snr_db", "must be a number or inf");

    check(scene.tx_depth_min > 0 && scene.tx_depth_max >= scene.tx_depth_min, "tx_depth_min",
          "need 0 < tx_depth_min <= tx_depth_max");
    check(scene.rx_height_min > 0 && scene.rx_height_max >= scene.rx_height_min, "rx_height_min",
          "need 0 < rx_height_min <= rx_height_max");
    check(scene.rx_offset_max >= 0, "rx_offset_max", "must be >= 0");
    check(scene.time_offset_max >= 0, "time_offset_max", "must be >= 0");

    check(meanshift.bandwidth > 0, "meanshift_bandwidth", "must be > 0");
    check(meanshift.eps > 0, "meanshift_eps", "must be > 0");
    check(meanshift.max_iters >= 1, "meanshift_max_iters", "must be >= 1");

    check(eval.latency_frames >= 0, "latency_frames", "must be >= 0");
    check(eval.duration > 0 && std::isfinite(eval.duration), "duration", "must be > 0");
    check(!std::isnan(eval.noise_snr_db) && eval.noise_snr_db > -std::numeric_limits<double>::infinity(),
          "noise_snr_db", "must be a number or inf");
    check(!eval.sweep_snr.empty(), "sweep_snr", "must not be empty");
    for (const double s : eval.sweep_snr) {
        check(s > -std::numeric_limits<double>::infinity(), "sweep_snr", "entries must be numbers or inf");
    }

    check(augment.rotation_deg >= 0, "augment_rotation_deg", "must be >= 0");
    check(augment.shift_px >= 0, "augment_shift_px", "must be >= 0");
    check(augment.sigma >= 0, "augment_sigma", "must be >= 0");
    check(jobs >= 0, "jobs", "must be >= 0");
}

ConfigEntries parse_config_text(std::string_view text, const std::string& source) {
    ConfigEntries out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::string(key), std::string(value));
    }
    return out;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

void apply_entries(RunConfig& config, const ConfigEntries& entries) {
    const auto& table = key_table();
    for (const auto& [key, value] : entries) {
        const auto it = std::find_if(table.begin(), table.end(), [&](const KeyDef& d) { return d.name == key; });
        if (it == table.end()) throw ConfigError(key + ": unknown key");
        it->set(config, key, value);
    }
}

ConfigEntries to_entries(const RunConfig& config) {
    ConfigEntries out;
    for (const auto& def : key_table()) out.emplace_back(def.name, def.get(config));
    return out;
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& [k, v] : to_entries(config)) out += k + " = " + v + "\n";
    return out;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& def : key_table()) k.push_back({def.name, def.help});
        return k;
    }();
    return keys;
}

}  // namespace owc
