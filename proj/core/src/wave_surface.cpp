#include "owc/wave_surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "fast_trig.hpp"
#include "owc/errors.hpp"
#include "owc/rng.hpp"

namespace owc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool uniformly_spaced(const std::vector<double>& v, bool in_log) {
    if (v.size() < 3) return true;
    auto at = [&](std::size_t i) { return in_log ? std::log(v[i]) : v[i]; };
    const double step = at(1) - at(0);
    for (std::size_t i = 2; i < v.size(); ++i) {
        const double s = at(i) - at(i - 1);
        if (std::abs(s - step) > 1e-12 * std::max(std::abs(step), std::abs(at(i)))) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectrum

SpectrumParams SpectrumParams::from_environment(double gravity, double wind_speed_10m, double fetch,
                                                double peak_enhancement,
                                                std::optional<double> alpha_override,
                                                std::optional<double> omega_p_override) {
    SpectrumParams p;
    p.gravity = gravity;
    p.wind_speed_10m = wind_speed_10m;
    p.fetch = fetch;
    p.peak_enhancement = peak_enhancement;
    const double dimensionless_fetch = gravity * fetch / (wind_speed_10m * wind_speed_10m);
    p.phillips_alpha = alpha_override.value_or(0.076 * std::pow(dimensionless_fetch, -0.22));
    p.omega_p = omega_p_override.value_or(
        22.0 * std::cbrt(gravity * gravity / (wind_speed_10m * fetch)));
    return p;
}

void SpectrumParams::validate() const {
    require(gravity > 0.0, "gravity must be > 0");
    require(wind_speed_10m > 0.0, "wind_speed_10m must be > 0");
    require(fetch > 0.0, "fetch must be > 0");
    require(peak_enhancement >= 1.0, "peak_enhancement must be >= 1");
    require(sigma_low > 0.0 && sigma_high > 0.0, "sigma_low and sigma_high must be > 0");
    // alpha == 0 is accepted as the calm-sea limit (all amplitudes vanish).
    require(phillips_alpha >= 0.0 && std::isfinite(phillips_alpha), "phillips_alpha must be >= 0");
    require(omega_p > 0.0 && std::isfinite(omega_p), "omega_p must be > 0");
    require(directional_factor_min(spread_p, spread_q) >= 0.0,
            "spread_p/spread_q make the directional factor negative somewhere on |theta| <= pi/2");
}

double directional_factor(double spread_p, double spread_q, double theta) {
    return (1.0 + spread_p * std::cos(2.0 * theta) + spread_q * std::cos(4.0 * theta)) / kPi;
}

double directional_factor_min(double spread_p, double spread_q) {
    // With c = cos 2theta in [-1, 1]: 1 + p c + q (2c^2 - 1), a parabola in c.
    auto f = [&](double c) { return (1.0 + spread_p * c + spread_q * (2.0 * c * c - 1.0)) / kPi; };
    double m = std::min(f(-1.0), f(1.0));
    if (spread_q > 0.0) {
        const double c = -spread_p / (4.0 * spread_q);
        if (c > -1.0 && c < 1.0) m = std::min(m, f(c));
    }
    return m;
}

double spectrum_density(const SpectrumParams& params, double omega, double theta) {
    if (!(omega > 0.0)) throw std::domain_error("spectrum_density: omega must be > 0");
    if (!(std::abs(theta) <= kPi / 2.0)) throw std::domain_error("spectrum_density: |theta| must be <= pi/2");

    const double ratio4 = std::pow(params.omega_p / omega, 4.0);
    // exp(-1.25 ratio^4) underflows long before 1/omega^5 overflows; short-circuit
    // so the omega -> 0 limit is an exact zero instead of 0 * inf.
    if (1.25 * ratio4 > 745.0) return 0.0;
    const double sigma = omega <= params.omega_p ? params.sigma_low : params.sigma_high;
    const double dw = omega - params.omega_p;
    const double peak_exponent = std::exp(-dw * dw / (2.0 * sigma * sigma * params.omega_p * params.omega_p));
    const double frequency_part = params.phillips_alpha * params.gravity * params.gravity /
                                  std::pow(omega, 5.0) * std::exp(-1.25 * ratio4) *
                                  std::pow(params.peak_enhancement, peak_exponent);
    return frequency_part * directional_factor(params.spread_p, params.spread_q, theta);
}

// ---------------------------------------------------------------------------
// Spectral grid

SpectralGrid::SpectralGrid(std::vector<double> omegas, std::vector<double> d_omegas,
                           std::vector<double> thetas, double d_theta)
    : omegas_(std::move(omegas)), d_omegas_(std::move(d_omegas)), thetas_(std::move(thetas)),
      d_theta_(d_theta) {
    require(!omegas_.empty() && !thetas_.empty(), "spectral grid must be non-empty");
    require(omegas_.size() == d_omegas_.size(), "one bin width per frequency is required");
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        require(omegas_[i] > 0.0, "grid frequencies must be > 0");
        require(d_omegas_[i] > 0.0, "grid frequency bin widths must be > 0");
        if (i > 0) require(omegas_[i] > omegas_[i - 1], "grid frequencies must be strictly increasing");
    }
    require(uniformly_spaced(omegas_, false) || uniformly_spaced(omegas_, true),
            "grid frequencies must be uniformly spaced in omega or in log(omega)");
    require(d_theta_ > 0.0, "d_theta must be > 0");
    for (std::size_t j = 0; j < thetas_.size(); ++j) {
        require(std::abs(thetas_[j]) <= kPi / 2.0, "grid directions must lie in [-pi/2, pi/2]");
        if (j > 0) require(thetas_[j] > thetas_[j - 1], "grid directions must be strictly increasing");
    }
    require(uniformly_spaced(thetas_, false), "grid directions must be uniformly spaced");
}

namespace {

std::vector<double> direction_centres(int n_theta) {
    require(n_theta >= 1, "n_theta must be >= 1");
    std::vector<double> thetas(static_cast<std::size_t>(n_theta));
    const double d = kPi / n_theta;
    for (int j = 0; j < n_theta; ++j) thetas[static_cast<std::size_t>(j)] = -kPi / 2.0 + (j + 0.5) * d;
    return thetas;
}

}  // namespace

SpectralGrid SpectralGrid::log_spaced(double omega_min, double omega_max, int n_omega, int n_theta) {
    require(n_omega >= 2, "log-spaced grid needs at least 2 frequencies");
    require(omega_min > 0.0 && omega_max > omega_min, "need 0 < omega_min < omega_max");
    const double dlog = std::log(omega_max / omega_min) / (n_omega - 1);
    std::vector<double> omegas(static_cast<std::size_t>(n_omega));
    std::vector<double> widths(omegas.size());
    for (int i = 0; i < n_omega; ++i) {
        const double w = omega_min * std::exp(dlog * i);
        omegas[static_cast<std::size_t>(i)] = w;
        widths[static_cast<std::size_t>(i)] = w * dlog;
    }
    return SpectralGrid(std::move(omegas), std::move(widths), direction_centres(n_theta), kPi / n_theta);
}

SpectralGrid SpectralGrid::uniform(double omega_min, double omega_max, int n_omega, int n_theta) {
    require(n_omega >= 2, "uniform grid needs at least 2 frequencies");
    require(omega_min > 0.0 && omega_max > omega_min, "need 0 < omega_min < omega_max");
    const double d = (omega_max - omega_min) / (n_omega - 1);
    std::vector<double> omegas(static_cast<std::size_t>(n_omega));
    for (int i = 0; i < n_omega; ++i) omegas[static_cast<std::size_t>(i)] = omega_min + d * i;
    std::vector<double> widths(omegas.size(), d);
    return SpectralGrid(std::move(omegas), std::move(widths), direction_centres(n_theta), kPi / n_theta);
}

SpectralGrid SpectralGrid::default_for(const SpectrumParams& params) {
    return log_spaced(0.5 * params.omega_p, 5.0 * params.omega_p, 64, 36);
}

// ---------------------------------------------------------------------------
// Surface realization

SurfaceRealization::SurfaceRealization(std::span<const WaveComponent> components, std::uint64_t seed,
                                       double gravity)
    : seed_(seed), gravity_(gravity) {
    const std::size_t n = components.size();
    amplitude_.reserve(n);
    omega_.reserve(n);
    kx_.reserve(n);
    ky_.reserve(n);
    phase_.reserve(n);
    for (const auto& c : components) {
        require(c.amplitude >= 0.0, "component amplitude must be >= 0");
        require(c.phase >= 0.0 && c.phase < kTwoPi, "component phase must be in [0, 2pi)");
        amplitude_.push_back(c.amplitude);
        omega_.push_back(c.omega);
        kx_.push_back(c.kx);
        ky_.push_back(c.ky);
        phase_.push_back(c.phase);
        amplitude_sum_ += c.amplitude;
    }
}

double SurfaceRealization::height(double x, double y, double t) const {
    const std::size_t n = amplitude_.size();
    const double* a = amplitude_.data();
    const double* w = omega_.data();
    const double* kx = kx_.data();
    const double* ky = ky_.data();
    const double* ph = phase_.data();
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < n; ++i) {
        sum += a[i] * detail::fast_cos(w[i] * t - kx[i] * x - ky[i] * y + ph[i]);
    }
    return sum;
}

SurfaceSample SurfaceRealization::sample(double x, double y, double t) const {
    const std::size_t n = amplitude_.size();
    const double* a = amplitude_.data();
    const double* w = omega_.data();
    const double* kx = kx_.data();
    const double* ky = ky_.data();
    const double* ph = phase_.data();
    double h = 0.0;
    double gx = 0.0;
    double gy = 0.0;
#pragma omp simd reduction(+ : h, gx, gy)
    for (std::size_t i = 0; i < n; ++i) {
        const auto sc = detail::fast_sincos(w[i] * t - kx[i] * x - ky[i] * y + ph[i]);
        h += a[i] * sc.cos;
        // d/dx cos(wt - kx x - ky y + e) = kx sin(...)
        const double as = a[i] * sc.sin;
        gx += as * kx[i];
        gy += as * ky[i];
    }
    return {h, gx, gy};
}

std::pair<double, double> SurfaceRealization::gradient(double x, double y, double t) const {
    const auto s = sample(x, y, t);
    return {s.dw_dx, s.dw_dy};
}

std::vector<double> SurfaceRealization::height_grid(double x0, double dx, int nx, double y0, double dy,
                                                    int ny, double t) const {
    require(nx >= 1 && ny >= 1, "height_grid: grid must be non-empty");
    const std::size_t n = amplitude_.size();
    std::vector<double> out(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0);
    if (n == 0) return out;

    // W(x_m, y_l) = Re sum_j C_j E_j(x_m) F_j(y_l) with
    // C_j = A e^{i(wt + eps)}, E_j = e^{-i kx x}, F_j = e^{-i ky y}.
    std::vector<double> g_re(n * static_cast<std::size_t>(nx));
    std::vector<double> g_im(g_re.size());
    for (int m = 0; m < nx; ++m) {
        const double x = x0 + dx * m;
        double* gr = g_re.data() + static_cast<std::size_t>(m) * n;
        double* gi = g_im.data() + static_cast<std::size_t>(m) * n;
        const double* a = amplitude_.data();
        const double* w = omega_.data();
        const double* kx = kx_.data();
        const double* ph = phase_.data();
#pragma omp simd
        for (std::size_t j = 0; j < n; ++j) {
            const auto sc = detail::fast_sincos(w[j] * t + ph[j] - kx[j] * x);
            gr[j] = a[j] * sc.cos;
            gi[j] = a[j] * sc.sin;
        }
    }
    std::vector<double> f_re(n);
    std::vector<double> f_im(n);
    for (int l = 0; l < ny; ++l) {
        const double y = y0 + dy * l;
        const double* ky = ky_.data();
        double* fr = f_re.data();
        double* fi = f_im.data();
#pragma omp simd
        for (std::size_t j = 0; j < n; ++j) {
            const auto sc = detail::fast_sincos(-ky[j] * y);
            fr[j] = sc.cos;
            fi[j] = sc.sin;
        }
        for (int m = 0; m < nx; ++m) {
            const double* gr = g_re.data() + static_cast<std::size_t>(m) * n;
            const double* gi = g_im.data() + static_cast<std::size_t>(m) * n;
            double sum = 0.0;
#pragma omp simd reduction(+ : sum)
            for (std::size_t j = 0; j < n; ++j) sum += gr[j] * fr[j] - gi[j] * fi[j];
            out[static_cast<std::size_t>(l) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(m)] = sum;
        }
    }
    return out;
}

double SurfaceRealization::slope_bound(double hx, double hy) const {
    const std::size_t n = amplitude_.size();
    const double* a = amplitude_.data();
    const double* kx = kx_.data();
    const double* ky = ky_.data();
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * std::abs(kx[i] * hx + ky[i] * hy);
    return sum;
}

WaveComponent SurfaceRealization::component(std::size_t i) const {
    return {amplitude_.at(i), omega_.at(i), kx_.at(i), ky_.at(i), phase_.at(i)};
}

std::vector<WaveComponent> SurfaceRealization::components() const {
    std::vector<WaveComponent> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(component(i));
    return out;
}

SurfaceRealization realize_surface(const SpectrumParams& params, const SpectralGrid& grid, std::uint64_t seed) {
    params.validate();
    Rng rng(seed);
    std::vector<WaveComponent> comps;
    comps.reserve(grid.size());
    for (std::size_t i = 0; i < grid.omegas().size(); ++i) {
        const double w = grid.omegas()[i];
        const double k = w * w / params.gravity;
        for (const double theta : grid.thetas()) {
            const double s = spectrum_density(params, w, theta);
            double phase = kTwoPi * rng.uniform();
            if (phase >= kTwoPi) phase = 0.0;  // rounding guard for u -> 1
            comps.push_back({std::sqrt(s * grid.d_omegas()[i] * grid.d_theta()), w, k * std::cos(theta),
                             k * std::sin(theta), phase});
        }
    }
    return SurfaceRealization(comps, seed, params.gravity);
}

double surface_height(const SurfaceRealization& surf, double x, double y, double t) {
    return surf.height(x, y, t);
}

std::pair<double, double> surface_gradient(const SurfaceRealization& surf, double x, double y, double t) {
    return surf.gradient(x, y, t);
}

Vec3 surface_normal_down(const SurfaceRealization& surf, double x, double y, double t) {
    const auto [gx, gy] = surf.gradient(x, y, t);
    return {gx, gy, -1.0};
}

Vec3 surface_normal_up(const SurfaceRealization& surf, double x, double y, double t) {
    return normalize(-surface_normal_down(surf, x, y, t));
}

// ---------------------------------------------------------------------------
// Heightmap export

namespace {
constexpr char kHeightmapMagic[8] = {'O', 'W', 'C', 'S', 'U', 'R', 'F', '1'};
}

void write_heightmap(const std::filesystem::path& path, const SurfaceRealization& surf, int rows, int cols,
                     double dx, double dy, double t, double x0, double y0) {
    require(rows >= 1 && cols >= 1, "heightmap dimensions must be positive");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kHeightmapMagic, sizeof(kHeightmapMagic));
    detail::write_le(os, static_cast<std::uint32_t>(rows));
    detail::write_le(os, static_cast<std::uint32_t>(cols));
    detail::write_le(os, static_cast<float>(dx));
    detail::write_le(os, static_cast<float>(dy));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            detail::write_le(os, static_cast<float>(surf.height(x0 + c * dx, y0 + r * dy, t)));
        }
    }
    if (!os) throw IoError("write failed for " + path.string());
}

Heightmap read_heightmap(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kHeightmapMagic)) {
        throw IoError(path.string() + ": not an OWCSURF1 heightmap");
    }
    Heightmap hm;
    if (!detail::read_le(is, hm.rows) || !detail::read_le(is, hm.cols) || !detail::read_le(is, hm.dx) ||
        !detail::read_le(is, hm.dy)) {
        throw IoError(path.string() + ": truncated header");
    }
    hm.heights.resize(static_cast<std::size_t>(hm.rows) * hm.cols);
    for (auto& h : hm.heights) {
        if (!detail::read_le(is, h)) throw IoError(path.string() + ": truncated height data");
    }
    return hm;
}

}  // namespace owc
