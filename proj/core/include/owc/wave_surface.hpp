#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "owc/vec3.hpp"

namespace owc {

/// Inputs of the directional JONSWAP-type spectrum.
///
/// `phillips_alpha` and `omega_p` are normally derived from wind speed and
/// fetch (see `from_environment`); both may be overridden.
struct SpectrumParams {
    double gravity = 9.8;           // m/s^2
    double wind_speed_10m = 10.0;   // m/s
    double fetch = 2.0e4;           // m
    double peak_enhancement = 3.3;  // gamma
    double spread_p = 0.5;
    double spread_q = 0.25;
    double sigma_low = 0.07;   // spectral width for omega <= omega_p
    double sigma_high = 0.09;  // spectral width for omega > omega_p
    double phillips_alpha = 0.0;
    double omega_p = 0.0;  // rad/s

    /// Fills `phillips_alpha` and `omega_p` from the empirical fetch relations
    /// unless explicit overrides are given.
    static SpectrumParams from_environment(double gravity, double wind_speed_10m, double fetch,
                                           double peak_enhancement,
                                           std::optional<double> alpha_override = std::nullopt,
                                           std::optional<double> omega_p_override = std::nullopt);

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

/// Dimensionless directional factor (1/pi)[1 + p cos 2theta + q cos 4theta].
double directional_factor(double spread_p, double spread_q, double theta);

/// Minimum of the directional factor over |theta| <= pi/2 (closed form).
double directional_factor_min(double spread_p, double spread_q);

/// Full directional spectrum S(omega, theta) in m^2 s / rad^2.
/// Throws std::domain_error for omega <= 0 or |theta| > pi/2.
double spectrum_density(const SpectrumParams& params, double omega, double theta);

/// Discretisation of the (omega, theta) plane used by the harmonic sum.
/// Frequencies may be uniformly spaced in omega or in log(omega); each
/// frequency carries its own bin width.
class SpectralGrid {
public:
    SpectralGrid(std::vector<double> omegas, std::vector<double> d_omegas, std::vector<double> thetas,
                 double d_theta);

    /// `n_omega` frequencies log-spaced on [omega_min, omega_max] and `n_theta`
    /// direction bin centres tiling [-pi/2, pi/2].
    static SpectralGrid log_spaced(double omega_min, double omega_max, int n_omega, int n_theta);

    /// Same, with frequencies uniformly spaced in omega.
    static SpectralGrid uniform(double omega_min, double omega_max, int n_omega, int n_theta);

    /// 64 x 36 log grid on [0.5, 5] * omega_p.
    static SpectralGrid default_for(const SpectrumParams& params);

    const std::vector<double>& omegas() const { return omegas_; }
    const std::vector<double>& d_omegas() const { return d_omegas_; }
    const std::vector<double>& thetas() const { return thetas_; }
    double d_theta() const { return d_theta_; }
    std::size_t size() const { return omegas_.size() * thetas_.size(); }

private:
    std::vector<double> omegas_;
    std::vector<double> d_omegas_;
    std::vector<double> thetas_;
    double d_theta_;
};

/// Height and slope of the surface at one point.
struct SurfaceSample {
    double height = 0.0;
    double dw_dx = 0.0;
    double dw_dy = 0.0;
};

/// One harmonic of the superposition.
struct WaveComponent {
    double amplitude;  // m
    double omega;      // rad/s
    double kx;         // rad/m
    double ky;         // rad/m
    double phase;      // rad, in [0, 2pi)
};

/// Frozen harmonic decomposition of the sea surface,
///   W(x, y, t) = sum A cos(omega t - kx x - ky y + eps).
/// Immutable after construction; safe for concurrent evaluation.
class SurfaceRealization {
public:
    SurfaceRealization() = default;
    SurfaceRealization(std::span<const WaveComponent> components, std::uint64_t seed, double gravity);

    /// A calm sea: no components, W == 0 everywhere.
    static SurfaceRealization flat(double gravity = 9.8) { return SurfaceRealization({}, 0, gravity); }

    double height(double x, double y, double t) const;

    /// (dW/dx, dW/dy), analytic.
    std::pair<double, double> gradient(double x, double y, double t) const;

    /// Height and gradient in one pass.
    SurfaceSample sample(double x, double y, double t) const;

    /// Heights on the tensor grid x0 + i*dx (i < nx), y0 + j*dy (j < ny),
    /// returned row-major with y as the slow index. Uses separable phasor
    /// products, so it agrees with `height` to ~1e-12 m rather than bit-exactly.
    std::vector<double> height_grid(double x0, double dx, int nx, double y0, double dy, int ny,
                                    double t) const;

    /// Sum of A over the components; |W| never exceeds it.
    double amplitude_sum() const { return amplitude_sum_; }

    /// Sum of A * |kx*hx + ky*hy|: bound on |dW/ds| along the horizontal vector h.
    double slope_bound(double hx, double hy) const;

    std::size_t size() const { return amplitude_.size(); }
    WaveComponent component(std::size_t i) const;
    std::vector<WaveComponent> components() const;
    std::uint64_t seed() const { return seed_; }
    double gravity() const { return gravity_; }

    bool operator==(const SurfaceRealization&) const = default;

private:
    // Structure-of-arrays for vectorised evaluation.
    std::vector<double> amplitude_;
    std::vector<double> omega_;
    std::vector<double> kx_;
    std::vector<double> ky_;
    std::vector<double> phase_;
    std::uint64_t seed_ = 0;
    double gravity_ = 9.8;
    double amplitude_sum_ = 0.0;
};

/// Harmonic-superposition synthesis: A = sqrt(S dω dθ), k = ω²/g, phases
/// i.i.d. uniform on [0, 2π) from the seeded generator (frequency-major order).
SurfaceRealization realize_surface(const SpectrumParams& params, const SpectralGrid& grid,
                                   std::uint64_t seed);

double surface_height(const SurfaceRealization& surf, double x, double y, double t);
std::pair<double, double> surface_gradient(const SurfaceRealization& surf, double x, double y, double t);

/// Downward normal [dW/dx, dW/dy, -1], not normalised.
Vec3 surface_normal_down(const SurfaceRealization& surf, double x, double y, double t);

/// Upward unit normal normalize(-dW/dx, -dW/dy, 1).
Vec3 surface_normal_up(const SurfaceRealization& surf, double x, double y, double t);

/// Writes `surface.f32`: "OWCSURF1", u32 rows, u32 cols, f32 dx, f32 dy, then
/// rows*cols little-endian f32 heights, row-major (rows along y).
void write_heightmap(const std::filesystem::path& path, const SurfaceRealization& surf, int rows,
                     int cols, double dx, double dy, double t, double x0 = 0.0, double y0 = 0.0);

/// Reads back a heightmap written by `write_heightmap`.
struct Heightmap {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    float dx = 0.0F;
    float dy = 0.0F;
    std::vector<float> heights;
};
Heightmap read_heightmap(const std::filesystem::path& path);

}  // namespace owc
