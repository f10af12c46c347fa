#include "owc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "binary_io.hpp"
#include "csv.hpp"
#include "owc/errors.hpp"
#include "owc/scene.hpp"
#include "parallel.hpp"

namespace owc {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f6973652d6473ULL;

const std::array<Split, 3> kSplits{Split::train, Split::val, Split::test};

float bilinear(const Grid& g, double r, double c) {
    const double r0 = std::floor(r);
    const double c0 = std::floor(c);
    const double fr = r - r0;
    const double fc = c - c0;
    auto px = [&](double rr, double cc) -> double {
        if (rr < 0 || cc < 0 || rr >= g.rows || cc >= g.cols) return 0.0;
        return g.at(static_cast<int>(rr), static_cast<int>(cc));
    };
    const double v = (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
                     fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
    return static_cast<float>(v);
}

std::string frames_file(Split s) { return "frames_" + to_string(s) + ".bin"; }
std::string labels_file(Split s) { return "labels_" + to_string(s) + ".csv"; }
std::string meta_file(Split s) { return "meta_" + to_string(s) + ".csv"; }

std::string vec_fields(const Vec3& v, int digits) {
    return detail::format_g(v.x, digits) + "," + detail::format_g(v.y, digits) + "," + detail::format_g(v.z, digits);
}

}  // namespace

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

SplitCounts split_counts(int n) {
    SplitCounts c;
    c.train = static_cast<int>(std::floor(0.7 * n + 1e-9));
    c.val = static_cast<int>(std::floor(0.15 * n + 1e-9));
    c.test = n - c.train - c.val;
    return c;
}

std::vector<Split> assign_splits(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [](int a, int b) {
        const auto ha = mix64(static_cast<std::uint64_t>(a));
        const auto hb = mix64(static_cast<std::uint64_t>(b));
        return ha != hb ? ha < hb : a < b;
    });
    const SplitCounts c = split_counts(n);
    std::vector<Split> out(static_cast<std::size_t>(n), Split::test);
    for (int rank = 0; rank < n; ++rank) {
        const auto id = static_cast<std::size_t>(order[static_cast<std::size_t>(rank)]);
        out[id] = rank < c.train ? Split::train : rank < c.train + c.val ? Split::val : Split::test;
    }
    return out;
}

Grid preprocess(const std::vector<double>& raw, int rows, int cols, int crop_rows, int crop_cols) {
    if (crop_rows < 1 || crop_cols < 1 || crop_rows > rows || crop_cols > cols) {
        throw std::invalid_argument("crop " + std::to_string(crop_rows) + "x" + std::to_string(crop_cols) +
                                    " does not fit a " + std::to_string(rows) + "x" + std::to_string(cols) + " frame");
    }
    if (raw.size() != static_cast<std::size_t>(rows) * cols) throw std::invalid_argument("frame size mismatch");
    const int r0 = crop_offset(rows, crop_rows);
    const int c0 = crop_offset(cols, crop_cols);
    double peak = 0.0;
    for (int r = 0; r < crop_rows; ++r) {
        for (int c = 0; c < crop_cols; ++c) peak = std::max(peak, raw[static_cast<std::size_t>(r0 + r) * cols + c0 + c]);
    }
    Grid out(crop_rows, crop_cols);
    if (peak <= 0.0) return out;
    for (int r = 0; r < crop_rows; ++r) {
        for (int c = 0; c < crop_cols; ++c) {
            const double v = raw[static_cast<std::size_t>(r0 + r) * cols + c0 + c];
            out.at(r, c) = static_cast<float>(std::max(v, 0.0) / peak);
        }
    }
    return out;
}

Grid preprocess(const IntensityFrame& frame, int crop_rows, int crop_cols) {
    return preprocess(frame.pixels, frame.rows, frame.cols, crop_rows, crop_cols);
}

Grid inject_noise(const Grid& frame, double snr_db, Rng& rng) {
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("inject_noise: snr_db must be a number or +inf");
    }
    if (std::isinf(snr_db)) return frame;
    const double sigma = std::pow(10.0, -snr_db / 20.0);
    Grid out = frame;
    for (float& v : out.data) v = static_cast<float>(std::max(0.0, v + sigma * rng.normal()));
    return out;
}

Sample augment_with(const Sample& sample, double rotation_deg, int shift_rows, int shift_cols, double sigma,
                    Rng& rng) {
    Sample out = sample;
    const double th = rotation_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(th);
    const double st = std::sin(th);
    for (std::size_t k = 0; k < sample.frames.size(); ++k) {
        const Grid& src = sample.frames[k];
        Grid& dst = out.frames[k];
        const double cr = 0.5 * (src.rows - 1);
        const double cc = 0.5 * (src.cols - 1);
        for (int r = 0; r < src.rows; ++r) {
            for (int c = 0; c < src.cols; ++c) {
                // Inverse map: undo the shift, then rotate by -theta about the centre.
                const double y = r - shift_rows - cr;
                const double x = c - shift_cols - cc;
                const double sx = ct * x + st * y + cc;
                const double sy = -st * x + ct * y + cr;
                dst.at(r, c) = bilinear(src, sy, sx);
            }
        }
        if (sigma > 0.0) {
            for (float& v : dst.data) v = static_cast<float>(std::clamp(v + sigma * rng.normal(), 0.0, 1.0));
        }
    }
    return out;
}

Sample augment(const Sample& sample, const AugmentSettings& settings, Rng& rng) {
    const double rot = rng.uniform(-settings.rotation_deg, settings.rotation_deg);
    const auto shift = static_cast<std::int64_t>(std::floor(settings.shift_px));
    const int dr = static_cast<int>(rng.uniform_int(-shift, shift));
    const int dc = static_cast<int>(rng.uniform_int(-shift, shift));
    return augment_with(sample, rot, dr, dc, settings.sigma, rng);
}

Sample generate_sample(const RunConfig& config, int id) {
    const Scene scene = make_scene(config, sample_seed(config.seed, id), id);
    const CameraModel camera = scene_camera(config, scene, scene.initial_boresight);
    const int cr = config.dataset.crop_rows;
    const int cc = config.dataset.crop_cols;

    RenderOptions ro;
    ro.intersect = config.camera.intersect;
    ro.solver = config.solver;
    ro.window = PixelWindow{crop_offset(config.camera.rows, cr), crop_offset(config.camera.cols, cc), cr, cc};
    ro.jobs = 1;
    ro.fill_truth = false;
    ro.beacon_i0 = config.beacon_i0;

    Sample sample;
    sample.id = id;
    sample.meta = {scene.seed, scene.t0, scene.transmitter, scene.receiver, scene.initial_boresight};
    const int n_t = config.dataset.frames_per_sample;
    for (int k = 0; k < n_t; ++k) {
        const double t = sample.frame_time(k, config.camera.fps);
        LinkGeometry geom = scene_geometry(scene, t, scene.initial_tx_boresight, scene.initial_boresight);
        const RefractionSolution sol = solve_refraction_point(geom, config.optics, config.solver);
        // The beacon is imaged with the transmitter aimed along the true path.
        geom.tx_boresight = normalize(sol.point - scene.transmitter);
        sample.frames.push_back(preprocess(render(camera, geom, config.optics, ro), cr, cc));
        if (k == n_t - 1) {
            sample.t = t;
            sample.refraction_point = sol.point;
            sample.label = normalize(sol.point - scene.receiver);
            geom.rx_boresight = sample.label;
            sample.g_total = gain_for_solution(geom, sol, config.optics).g_total;
        }
    }
    if (std::isfinite(config.dataset.snr_db)) {
        Rng rng(scene.seed ^ kNoiseStream);
        for (Grid& g : sample.frames) g = inject_noise(g, config.dataset.snr_db, rng);
    }
    return sample;
}

DatasetManifest generate_dataset(const RunConfig& config, const std::filesystem::path& dir) {
    config.validate();
    const int n = config.dataset.samples;
    std::vector<Sample> samples(static_cast<std::size_t>(n));
    detail::parallel_for(samples.size(), config.jobs,
                         [&](std::size_t i) { samples[i] = generate_sample(config, static_cast<int>(i)); });

    const std::vector<Split> splits = assign_splits(n);
    DatasetManifest m;
    m.m = config.camera.rows;
    m.n = config.camera.cols;
    m.n1x = config.dataset.crop_rows;
    m.n2x = config.dataset.crop_cols;
    m.n_t = config.dataset.frames_per_sample;
    m.fps = config.camera.fps;
    m.counts = split_counts(n);
    m.base_seed = config.seed;
    if (std::isfinite(config.dataset.snr_db)) m.snr_db = config.dataset.snr_db;
    m.files.push_back("config.cfg");
    for (const Split s : kSplits) {
        m.files.push_back(frames_file(s));
        m.files.push_back(labels_file(s));
        m.files.push_back(meta_file(s));
    }
    write_dataset(dir, m, config, samples, splits);
    return m;
}

const std::vector<Sample>& Dataset::split(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::val: return val;
        case Split::test: return test;
    }
    return test;
}

std::vector<const Sample*> Dataset::select(const std::string& split_name) const {
    std::vector<const Sample*> out;
    for (const Split s : kSplits) {
        if (split_name != "all" && split_name != to_string(s)) continue;
        for (const Sample& smp : split(s)) out.push_back(&smp);
    }
    if (split_name == "all") {
        std::sort(out.begin(), out.end(), [](const Sample* a, const Sample* b) { return a->id < b->id; });
    } else if (split_name != "train" && split_name != "val" && split_name != "test") {
        throw ConfigError("eval_split: unknown split '" + split_name + "'");
    }
    return out;
}

void write_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest, const RunConfig& config,
                   const std::vector<Sample>& samples, const std::vector<Split>& splits) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    for (const Split s : kSplits) {
        std::string frames;
        std::string labels = "id,y1,y2,y3,t,sx,sy,sz,g_total\n";
        std::string meta = "id,seed,t0,tx,ty,tz,rx,ry,rz,bx,by,bz\n";
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (splits[i] != s) continue;
            const Sample& smp = samples[i];
            for (const Grid& g : smp.frames) {
                for (const float v : g.data) {
                    const float le = detail::to_little_endian(v);
                    frames.append(reinterpret_cast<const char*>(&le), sizeof le);
                }
            }
            labels += std::to_string(smp.id) + "," + vec_fields(smp.label, 9) + "," + detail::format_g(smp.t, 9) +
                      "," + vec_fields(smp.refraction_point, 9) + "," + detail::format_g(smp.g_total, 9) + "\n";
            meta += std::to_string(smp.id) + "," + std::to_string(smp.meta.seed) + "," +
                    detail::format_g(smp.meta.t0, 17) + "," + vec_fields(smp.meta.transmitter, 17) + "," +
                    vec_fields(smp.meta.receiver, 17) + "," + vec_fields(smp.meta.boresight, 17) + "\n";
        }
        detail::write_file(dir / frames_file(s), frames);
        detail::write_file(dir / labels_file(s), labels);
        detail::write_file(dir / meta_file(s), meta);
    }
    detail::write_file(dir / "config.cfg", format_config(config));

    nlohmann::ordered_json j;
    j["version"] = manifest.version;
    j["m"] = manifest.m;
    j["n"] = manifest.n;
    j["n1x"] = manifest.n1x;
    j["n2x"] = manifest.n2x;
    j["n_t"] = manifest.n_t;
    j["fps"] = manifest.fps;
    j["counts"] = {{"train", manifest.counts.train}, {"val", manifest.counts.val}, {"test", manifest.counts.test}};
    j["seeds"] = {{"base", manifest.base_seed}};
    j["noise"] = {{"snr_db", manifest.snr_db ? nlohmann::ordered_json(*manifest.snr_db) : nullptr}};
    j["files"] = manifest.files;
    detail::write_file(dir / "manifest.json", j.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.dir = dir;
    const auto manifest_path = dir / "manifest.json";
    try {
        const auto j = nlohmann::json::parse(detail::read_file(manifest_path));
        DatasetManifest& m = ds.manifest;
        m.version = j.at("version").get<int>();
        m.m = j.at("m").get<int>();
        m.n = j.at("n").get<int>();
        m.n1x = j.at("n1x").get<int>();
        m.n2x = j.at("n2x").get<int>();
        m.n_t = j.at("n_t").get<int>();
        m.fps = j.at("fps").get<double>();
        m.counts.train = j.at("counts").at("train").get<int>();
        m.counts.val = j.at("counts").at("val").get<int>();
        m.counts.test = j.at("counts").at("test").get<int>();
        m.base_seed = j.at("seeds").at("base").get<std::uint64_t>();
        const auto& snr = j.at("noise").at("snr_db");
        if (!snr.is_null()) m.snr_db = snr.get<double>();
        m.files = j.at("files").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(manifest_path.string() + ": " + e.what());
    }
    if (ds.manifest.version != 1) throw IoError(manifest_path.string() + ": unsupported version");

    const auto config_path = dir / "config.cfg";
    try {
        apply_entries(ds.config, read_config_file(config_path));
    } catch (const ConfigError& e) {
        throw IoError(config_path.string() + ": " + e.what());
    }

    const DatasetManifest& m = ds.manifest;
    const std::size_t frame_len = static_cast<std::size_t>(m.n1x) * m.n2x;
    for (const Split s : kSplits) {
        const int count = s == Split::train ? m.counts.train : s == Split::val ? m.counts.val : m.counts.test;
        const auto fpath = dir / frames_file(s);
        const std::string bytes = detail::read_file(fpath);
        const std::size_t expected = static_cast<std::size_t>(count) * m.n_t * frame_len * sizeof(float);
        if (bytes.size() != expected) {
            throw IoError(fpath.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                          std::to_string(bytes.size()));
        }
        const auto lpath = dir / labels_file(s);
        const auto mpath = dir / meta_file(s);
        const detail::CsvTable labels = detail::read_csv(lpath);
        const detail::CsvTable meta = detail::read_csv(mpath);
        if (labels.rows.size() != static_cast<std::size_t>(count)) {
            throw IoError(lpath.string() + ": expected " + std::to_string(count) + " rows");
        }
        if (meta.rows.size() != static_cast<std::size_t>(count)) {
            throw IoError(mpath.string() + ": expected " + std::to_string(count) + " rows");
        }
        const std::string lname = lpath.string();
        const std::string mname = mpath.string();
        auto lcol = [&](const char* name) { return labels.column(name, lname); };
        auto mcol = [&](const char* name) { return meta.column(name, mname); };
        const std::size_t c_id = lcol("id"), c_y1 = lcol("y1"), c_y2 = lcol("y2"), c_y3 = lcol("y3"), c_t = lcol("t"),
                          c_sx = lcol("sx"), c_sy = lcol("sy"), c_sz = lcol("sz"), c_g = lcol("g_total");
        const std::size_t m_id = mcol("id"), m_seed = mcol("seed"), m_t0 = mcol("t0");
        const std::array<std::size_t, 9> m_vec{mcol("tx"), mcol("ty"), mcol("tz"), mcol("rx"), mcol("ry"),
                                               mcol("rz"), mcol("bx"), mcol("by"), mcol("bz")};

        std::vector<Sample>& out = s == Split::train ? ds.train : s == Split::val ? ds.val : ds.test;
        out.resize(static_cast<std::size_t>(count));
        std::size_t offset = 0;
        for (int k = 0; k < count; ++k) {
            Sample& smp = out[static_cast<std::size_t>(k)];
            const auto& lr = labels.rows[static_cast<std::size_t>(k)];
            const auto& mr = meta.rows[static_cast<std::size_t>(k)];
            smp.id = static_cast<int>(detail::parse_field(lr[c_id], lname));
            if (static_cast<int>(detail::parse_field(mr[m_id], mname)) != smp.id) {
                throw IoError(mname + ": row " + std::to_string(k + 1) + " does not match " + lname);
            }
            smp.label = {detail::parse_field(lr[c_y1], lname), detail::parse_field(lr[c_y2], lname),
                         detail::parse_field(lr[c_y3], lname)};
            smp.t = detail::parse_field(lr[c_t], lname);
            smp.refraction_point = {detail::parse_field(lr[c_sx], lname), detail::parse_field(lr[c_sy], lname),
                                    detail::parse_field(lr[c_sz], lname)};
            smp.g_total = detail::parse_field(lr[c_g], lname);
            try {
                smp.meta.seed = std::stoull(mr[m_seed]);
            } catch (const std::exception&) {
                throw IoError(mname + ": bad seed '" + mr[m_seed] + "'");
            }
            smp.meta.t0 = detail::parse_field(mr[m_t0], mname);
            std::array<double, 9> v{};
            for (std::size_t q = 0; q < 9; ++q) v[q] = detail::parse_field(mr[m_vec[q]], mname);
            smp.meta.transmitter = {v[0], v[1], v[2]};
            smp.meta.receiver = {v[3], v[4], v[5]};
            smp.meta.boresight = {v[6], v[7], v[8]};
            smp.frames.resize(static_cast<std::size_t>(m.n_t));
            for (Grid& g : smp.frames) {
                g = Grid(m.n1x, m.n2x);
                std::memcpy(g.data.data(), bytes.data() + offset, frame_len * sizeof(float));
                for (float& x : g.data) x = detail::to_little_endian(x);
                offset += frame_len * sizeof(float);
            }
        }
    }
    return ds;
}

}  // namespace owc
