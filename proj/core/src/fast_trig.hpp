#pragma once

// Branch-free double-precision sin/cos for the phasor sums in the surface
// kernels. Written so GCC/Clang auto-vectorise loops that call them; libm
// calls block vectorisation. Accuracy is within 1 ulp-ish of libm for
// |x| < 1e5 (three-part Cody-Waite reduction, fdlibm kernel polynomials).

namespace owc::detail {

struct SinCos {
    double sin;
    double cos;
};

inline constexpr double kTwoOverPi = 0.63661977236758134308;
inline constexpr double kPio2Hi = 1.57079632673412561417e+00;
inline constexpr double kPio2Mid = 6.07710050650619224932e-11;
inline constexpr double kPio2Lo = 2.02226624879595063154e-21;
// 1.5 * 2^52: adding and subtracting rounds to the nearest integer.
inline constexpr double kRoundMagic = 6755399441055744.0;

inline double sin_poly(double r, double z) {
    return r + r * z *
                   (-1.66666666666666324348e-01 +
                    z * (8.33333333332248946124e-03 +
                         z * (-1.98412698298579493134e-04 +
                              z * (2.75573137070700676789e-06 +
                                   z * (-2.50507602534068634195e-08 + z * 1.58969099521155010221e-10)))));
}

inline double cos_poly(double z) {
    return 1.0 - 0.5 * z +
           z * z *
               (4.16666666666666019037e-02 +
                z * (-1.38888888888741095749e-03 +
                     z * (2.48015872894767294178e-05 +
                          z * (-2.75573143513906633035e-07 +
                               z * (2.08757232129817482790e-09 + z * -1.13596475577881948265e-11)))));
}

// Returns the reduced argument r in [-pi/4, pi/4] and quadrant q in {0,1,2,3}.
inline double reduce(double x, double& q) {
    const double n = (x * kTwoOverPi + kRoundMagic) - kRoundMagic;
    double r = x - n * kPio2Hi;
    r -= n * kPio2Mid;
    r -= n * kPio2Lo;
    // floor(n / 4) via rounding of n/4 - 3/8, exact because n/4 is a multiple of 1/4.
    const double quarter = n * 0.25 - 0.375;
    q = n - 4.0 * ((quarter + kRoundMagic) - kRoundMagic);
    return r;
}

inline double fast_cos(double x) {
    double q;
    const double r = reduce(x, q);
    const double z = r * r;
    const double s = sin_poly(r, z);
    const double c = cos_poly(z);
    const double v = (q == 1.0 || q == 3.0) ? s : c;
    return (q == 1.0 || q == 2.0) ? -v : v;
}

inline SinCos fast_sincos(double x) {
    double q;
    const double r = reduce(x, q);
    const double z = r * r;
    const double s = sin_poly(r, z);
    const double c = cos_poly(z);
    const bool odd = (q == 1.0 || q == 3.0);
    const double sv = odd ? c : s;
    const double cv = odd ? s : c;
    return {(q >= 2.0) ? -sv : sv, (q == 1.0 || q == 2.0) ? -cv : cv};
}

}  // namespace owc::detail
