#pragma once

#include <numbers>
#include <optional>

#include "owc/vec3.hpp"
#include "owc/wave_surface.hpp"

namespace owc {

/// Optical constants of the water-to-air link.
struct OpticalConstants {
    double n_water = 1.33;
    double n_air = 1.0003;
    double wavelength = 532e-9;  // m
    double a_w = 1.80e-2;        // 1/m, underwater absorption
    double b_w = 3.81e-3;        // 1/m, underwater scattering
    double a_a = 1e-7;           // 1/m, aerial absorption
    double b_a = 2.96e-5;        // 1/m, aerial scattering
    double omega_d = std::numbers::pi / 600.0;  // max departure half-angle, rad
    double omega_a = std::numbers::pi / 3.0;    // max arrival half-angle, rad
    double i0 = 1.0;             // transmit intensity
    double source_radius = 0.3;  // m

    void validate() const;
};

/// One scene snapshot: transceiver poses over the surface at time t.
struct LinkGeometry {
    Vec3 transmitter;        // below the surface
    Vec3 receiver;           // above the surface
    Vec3 tx_boresight;       // unit
    Vec3 rx_boresight;       // unit
    double t = 0.0;          // s
    const SurfaceRealization* surface = nullptr;

    /// Checks submersion/elevation against W and boresight normalisation.
    void validate() const;
};

/// Direct path T -> S -> R across the interface.
struct RefractionSolution {
    Vec3 point;            // S, on the surface
    Vec3 normal_up;        // upward unit normal at S
    double opl = 0.0;      // m
    double d_w = 0.0;      // m
    double d_a = 0.0;      // m
    double theta_i = 0.0;  // incidence in water vs normal, rad
    double theta_t = 0.0;  // transmission in air vs normal, rad
    bool converged = false;
    int iterations = 0;
};

/// The four factors of the channel gain and their product.
struct GainBreakdown {
    double g_d = 0.0;
    double g_a = 0.0;
    double g_path = 0.0;
    double g_ref = 0.0;
    double g_total = 0.0;
    double alpha_d = 0.0;  // rad
    double alpha_a = 0.0;  // rad
    bool valid = false;    // false when the refraction solve did not converge
};

struct SolverOptions {
    int grid_points = 41;        // coarse seed grid per axis
    double padding = 2.0;        // m, around the transceiver footprint
    double opl_tolerance = 1e-9; // m, simplex spread at termination
    int max_iterations = 500;    // Nelder-Mead cap per candidate
    int max_candidates = 4;      // local minima of the seed grid refined
};

/// Minimises n_w |T-S| + n_a |S-R| over S on z = W(x, y, t).
///
/// A coarse grid over the padded footprint seeds Nelder-Mead on (x, y); the
/// best few grid minima are refined and the lowest optical path wins, so on
/// rough seas with several stationary paths the global minimum is returned.
/// After the simplex has collapsed, a short Newton polish on the analytic
/// OPL gradient drives the Snell residual to round-off level.
RefractionSolution solve_refraction_point(const LinkGeometry& geom, const OpticalConstants& consts,
                                          const SolverOptions& options = {});

/// Local refinement only, starting from (x, y). Used when the image of a
/// particular path is wanted rather than the global minimum.
RefractionSolution refine_refraction_point(const Vec3& transmitter, const Vec3& receiver,
                                           const SurfaceRealization& surf, double t,
                                           const OpticalConstants& consts, double x, double y,
                                           const SolverOptions& options = {});

/// Evaluates the (not necessarily optimal) broken path through surface point (x, y).
RefractionSolution path_through(const Vec3& transmitter, const Vec3& receiver, const SurfaceRealization& surf,
                                double t, const OpticalConstants& consts, double x, double y);

/// |n_w sin(theta_i) - n_a sin(theta_t)|.
double snell_residual(const RefractionSolution& sol, const OpticalConstants& consts);

/// Laser departure gain exp(-2 sin^2 a / (w^2 [1 + (lambda cos a / (pi w^2))^2])).
/// Throws std::domain_error outside [0, pi/2).
double gain_departure(double alpha_d, const OpticalConstants& consts);

/// Receiver gain n_a^2 cos(a) / sin^2(omega_a) inside the field of view, 0 outside.
/// Throws std::domain_error outside [0, pi/2).
double gain_arrival(double alpha_a, const OpticalConstants& consts);

/// Beer-Lambert attenuation over both media times inverse-square spreading.
double gain_path(double d_w, double d_a, const OpticalConstants& consts);

/// Unpolarised Fresnel transmittance water -> air; 0 at or past the critical angle.
double gain_fresnel(double theta_i, double theta_t, const OpticalConstants& consts);

/// Solves the path and multiplies the four factors for the given boresights.
GainBreakdown gain_total(const LinkGeometry& geom, const OpticalConstants& consts,
                         const SolverOptions& options = {});

/// Same, reusing an existing path solution (pointing does not change the path).
GainBreakdown gain_for_solution(const LinkGeometry& geom, const RefractionSolution& sol,
                                const OpticalConstants& consts);

}  // namespace owc
