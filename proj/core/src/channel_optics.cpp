#include "owc/channel_optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace owc {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

struct OplFunctional {
    const Vec3& t_pos;
    const Vec3& r_pos;
    const SurfaceRealization& surf;
    double t;
    double n_w;
    double n_a;

    double operator()(double x, double y) const {
        const Vec3 s{x, y, surf.height(x, y, t)};
        return n_w * norm(s - t_pos) + n_a * norm(r_pos - s);
    }

    // Analytic gradient of the OPL with respect to (x, y), S constrained to the surface.
    std::array<double, 2> gradient(double x, double y) const {
        const SurfaceSample smp = surf.sample(x, y, t);
        const Vec3 s{x, y, smp.height};
        const Vec3 v = normalize(s - t_pos) * n_w + normalize(s - r_pos) * n_a;
        return {v.x + v.z * smp.dw_dx, v.y + v.z * smp.dw_dy};
    }
};

struct SimplexResult {
    double x;
    double y;
    double f;
    int iterations;
    bool converged;
};

// Nelder-Mead in two dimensions with the standard coefficients.
SimplexResult nelder_mead(const OplFunctional& f, double x0, double y0, double step, double tol, int max_iter) {
    struct Vertex {
        double x, y, f;
    };
    std::array<Vertex, 3> v{{{x0, y0, 0.0}, {x0 + step, y0, 0.0}, {x0, y0 + step, 0.0}}};
    for (auto& p : v) p.f = f(p.x, p.y);

    int it = 0;
    for (; it < max_iter; ++it) {
        std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (v[2].f - v[0].f < tol) {
            return {v[0].x, v[0].y, v[0].f, it, true};
        }
        const double cx = 0.5 * (v[0].x + v[1].x);
        const double cy = 0.5 * (v[0].y + v[1].y);
        auto along = [&](double c) {
            Vertex p{cx + c * (v[2].x - cx), cy + c * (v[2].y - cy), 0.0};
            p.f = f(p.x, p.y);
            return p;
        };
        const Vertex r = along(-1.0);
        if (r.f < v[0].f) {
            const Vertex e = along(-2.0);
            v[2] = e.f < r.f ? e : r;
        } else if (r.f < v[1].f) {
            v[2] = r;
        } else {
            const Vertex c = r.f < v[2].f ? along(-0.5) : along(0.5);
            if (c.f < std::min(r.f, v[2].f)) {
                v[2] = c;
            } else {
                for (int k = 1; k < 3; ++k) {
                    v[k].x = v[0].x + 0.5 * (v[k].x - v[0].x);
                    v[k].y = v[0].y + 0.5 * (v[k].y - v[0].y);
                    v[k].f = f(v[k].x, v[k].y);
                }
            }
        }
    }
    std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    return {v[0].x, v[0].y, v[0].f, it, false};
}

// Newton iterations on grad OPL = 0 with a finite-difference Hessian of the
// analytic gradient. Only steps that shrink the gradient are kept.
void newton_polish(const OplFunctional& f, double& x, double& y) {
    constexpr double h = 1e-6;
    auto g = f.gradient(x, y);
    double gnorm = std::hypot(g[0], g[1]);
    for (int it = 0; it < 12 && gnorm > 0.0; ++it) {
        const auto gxp = f.gradient(x + h, y);
        const auto gxm = f.gradient(x - h, y);
        const auto gyp = f.gradient(x, y + h);
        const auto gym = f.gradient(x, y - h);
        const double hxx = (gxp[0] - gxm[0]) / (2 * h);
        const double hyy = (gyp[1] - gym[1]) / (2 * h);
        const double hxy = 0.5 * ((gxp[1] - gxm[1]) + (gyp[0] - gym[0])) / (2 * h);
        const double det = hxx * hyy - hxy * hxy;
        if (!(hxx > 0.0 && det > 0.0)) return;  // not at a minimum
        const double sx = -(hyy * g[0] - hxy * g[1]) / det;
        const double sy = -(hxx * g[1] - hxy * g[0]) / det;
        const auto gn = f.gradient(x + sx, y + sy);
        const double gn_norm = std::hypot(gn[0], gn[1]);
        if (!(gn_norm < gnorm)) return;
        x += sx;
        y += sy;
        g = gn;
        gnorm = gn_norm;
        if (std::hypot(sx, sy) < 1e-13) return;
    }
}

}  // namespace

void OpticalConstants::validate() const {
    require(n_air >= 1.0 && n_water > n_air, "need n_water > n_air >= 1");
    require(a_w >= 0.0 && b_w >= 0.0 && a_a >= 0.0 && b_a >= 0.0, "attenuation coefficients must be >= 0");
    require(omega_d > 0.0 && omega_d < omega_a && omega_a < kHalfPi, "need 0 < omega_d < omega_a < pi/2");
    require(i0 > 0.0, "transmit intensity i0 must be > 0");
    require(source_radius > 0.0, "source_radius must be > 0");
    require(wavelength > 0.0, "wavelength must be > 0");
}

void LinkGeometry::validate() const {
    require(surface != nullptr, "link geometry has no surface");
    require(transmitter.z < surface->height(transmitter.x, transmitter.y, t), "transmitter must be submerged");
    require(receiver.z > surface->height(receiver.x, receiver.y, t), "receiver must be above the surface");
    require(std::abs(norm(tx_boresight) - 1.0) <= 1e-12, "transmitter boresight must be unit-norm");
    require(std::abs(norm(rx_boresight) - 1.0) <= 1e-12, "receiver boresight must be unit-norm");
}

RefractionSolution path_through(const Vec3& transmitter, const Vec3& receiver, const SurfaceRealization& surf,
                                double t, const OpticalConstants& consts, double x, double y) {
    const SurfaceSample smp = surf.sample(x, y, t);
    RefractionSolution sol;
    sol.point = {x, y, smp.height};
    sol.normal_up = normalize(Vec3{-smp.dw_dx, -smp.dw_dy, 1.0});
    sol.d_w = norm(sol.point - transmitter);
    sol.d_a = norm(receiver - sol.point);
    sol.opl = consts.n_water * sol.d_w + consts.n_air * sol.d_a;
    sol.theta_i = angle_between(sol.point - transmitter, sol.normal_up);
    sol.theta_t = angle_between(receiver - sol.point, sol.normal_up);
    return sol;
}

RefractionSolution refine_refraction_point(const Vec3& transmitter, const Vec3& receiver,
                                           const SurfaceRealization& surf, double t,
                                           const OpticalConstants& consts, double x, double y,
                                           const SolverOptions& options) {
    const OplFunctional f{transmitter, receiver, surf, t, consts.n_water, consts.n_air};
    const double span = std::max(std::hypot(receiver.x - transmitter.x, receiver.y - transmitter.y), 1.0);
    const double step = 0.5 * (span + 2.0 * options.padding) / std::max(options.grid_points - 1, 1);
    SimplexResult nm = nelder_mead(f, x, y, step, options.opl_tolerance, options.max_iterations);
    double sx = nm.x;
    double sy = nm.y;
    newton_polish(f, sx, sy);
    RefractionSolution sol = path_through(transmitter, receiver, surf, t, consts, sx, sy);
    if (sol.opl > nm.f) sol = path_through(transmitter, receiver, surf, t, consts, nm.x, nm.y);
    sol.converged = nm.converged;
    sol.iterations = nm.iterations;
    return sol;
}

RefractionSolution solve_refraction_point(const LinkGeometry& geom, const OpticalConstants& consts,
                                          const SolverOptions& options) {
    require(geom.surface != nullptr, "solve_refraction_point: geometry has no surface");
    require(options.grid_points >= 2, "solver grid needs at least 2 points per axis");
    const SurfaceRealization& surf = *geom.surface;
    const Vec3& tp = geom.transmitter;
    const Vec3& rp = geom.receiver;
    require(tp.z < surf.height(tp.x, tp.y, geom.t), "transmitter must be submerged");
    require(rp.z > surf.height(rp.x, rp.y, geom.t), "receiver must be above the surface");

    const double x_lo = std::min(tp.x, rp.x) - options.padding;
    const double x_hi = std::max(tp.x, rp.x) + options.padding;
    const double y_lo = std::min(tp.y, rp.y) - options.padding;
    const double y_hi = std::max(tp.y, rp.y) + options.padding;
    const int n = options.grid_points;
    const double dx = (x_hi - x_lo) / (n - 1);
    const double dy = (y_hi - y_lo) / (n - 1);

    const std::vector<double> heights = surf.height_grid(x_lo, dx, n, y_lo, dy, n, geom.t);
    std::vector<double> opl(heights.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * n + i;
            const Vec3 s{x_lo + dx * i, y_lo + dy * j, heights[idx]};
            opl[idx] = consts.n_water * norm(s - tp) + consts.n_air * norm(rp - s);
        }
    }

    // Local minima of the seed grid (8-neighbourhood), best first.
    std::vector<std::size_t> candidates;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * n + i;
            bool is_min = true;
            for (int dj = -1; dj <= 1 && is_min; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if ((di == 0 && dj == 0) || i + di < 0 || i + di >= n || j + dj < 0 || j + dj >= n) continue;
                    if (opl[static_cast<std::size_t>(j + dj) * n + (i + di)] < opl[idx]) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) candidates.push_back(idx);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return opl[a] < opl[b]; });
    if (candidates.size() > static_cast<std::size_t>(options.max_candidates)) {
        candidates.resize(static_cast<std::size_t>(options.max_candidates));
    }

    RefractionSolution best;
    bool have_best = false;
    for (const std::size_t idx : candidates) {
        const double cx = x_lo + dx * static_cast<double>(idx % static_cast<std::size_t>(n));
        const double cy = y_lo + dy * static_cast<double>(idx / static_cast<std::size_t>(n));
        RefractionSolution sol = refine_refraction_point(tp, rp, surf, geom.t, consts, cx, cy, options);
        if (!have_best || sol.opl < best.opl) {
            best = sol;
            have_best = true;
        }
    }
    return best;
}

double snell_residual(const RefractionSolution& sol, const OpticalConstants& consts) {
    return std::abs(consts.n_water * std::sin(sol.theta_i) - consts.n_air * std::sin(sol.theta_t));
}

double gain_departure(double alpha_d, const OpticalConstants& consts) {
    if (!(alpha_d >= 0.0 && alpha_d < kHalfPi)) throw std::domain_error("gain_departure: alpha_d outside [0, pi/2)");
    const double w2 = consts.omega_d * consts.omega_d;
    const double s = std::sin(alpha_d);
    const double beam = consts.wavelength * std::cos(alpha_d) / (std::numbers::pi * w2);
    return std::exp(-2.0 * s * s / (w2 * (1.0 + beam * beam)));
}

double gain_arrival(double alpha_a, const OpticalConstants& consts) {
    if (!(alpha_a >= 0.0 && alpha_a < kHalfPi)) throw std::domain_error("gain_arrival: alpha_a outside [0, pi/2)");
    if (alpha_a > consts.omega_a) return 0.0;  // outside the field of view
    const double s = std::sin(consts.omega_a);
    return consts.n_air * consts.n_air * std::cos(alpha_a) / (s * s);
}

double gain_path(double d_w, double d_a, const OpticalConstants& consts) {
    if (!(d_w >= 0.0 && d_a >= 0.0 && d_w + d_a > 0.0)) {
        throw std::domain_error("gain_path: distances must be >= 0 with a positive total");
    }
    const double total = d_w + d_a;
    return std::exp(-(consts.a_w + consts.b_w) * d_w - (consts.a_a + consts.b_a) * d_a) / (total * total);
}

double gain_fresnel(double theta_i, double theta_t, const OpticalConstants& consts) {
    const double n1 = consts.n_water;  // incident medium
    const double n2 = consts.n_air;
    if (n1 * std::sin(theta_i) >= n2) return 0.0;  // total internal reflection
    const double ci = std::cos(theta_i);
    const double ct = std::cos(theta_t);
    // Same bracket terms as the textbook form: p-polarised then s-polarised.
    const double rp = (n2 * ci - n1 * ct) / (n2 * ci + n1 * ct);
    const double rs = (n1 * ci - n2 * ct) / (n1 * ci + n2 * ct);
    return std::clamp(1.0 - 0.5 * (rp * rp + rs * rs), 0.0, 1.0);
}

GainBreakdown gain_for_solution(const LinkGeometry& geom, const RefractionSolution& sol,
                                const OpticalConstants& consts) {
    GainBreakdown g;
    g.alpha_d = angle_between(geom.tx_boresight, sol.point - geom.transmitter);
    g.alpha_a = angle_between(geom.rx_boresight, sol.point - geom.receiver);
    if (!sol.converged) return g;
    g.valid = true;
    // Pointing away from the path (>= 90 degrees) transmits/receives nothing.
    g.g_d = g.alpha_d < kHalfPi ? gain_departure(g.alpha_d, consts) : 0.0;
    g.g_a = g.alpha_a < kHalfPi ? gain_arrival(g.alpha_a, consts) : 0.0;
    g.g_path = gain_path(sol.d_w, sol.d_a, consts);
    g.g_ref = gain_fresnel(sol.theta_i, sol.theta_t, consts);
    g.g_total = g.g_d * g.g_a * g.g_path * g.g_ref;
    return g;
}

GainBreakdown gain_total(const LinkGeometry& geom, const OpticalConstants& consts, const SolverOptions& options) {
    return gain_for_solution(geom, solve_refraction_point(geom, consts, options), consts);
}

}  // namespace owc
