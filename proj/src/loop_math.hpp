#pragma once

// Per-(point, coil) field contribution shared by the field kernels.
//
// Off-axis field of a circular loop of radius R carrying instantaneous
// current I, axis +z, in cylindrical components (rho, z) relative to the
// loop center, with C = mu0 I / (2 pi), m = 4 R rho / Q,
// Q = (R+rho)^2 + z^2, A = (R-rho)^2 + z^2:
//
//   B_z   = C / sqrt(Q) * [ K(m) + E(m) (R^2 - rho^2 - z^2) / A ]
//   B_rho = C / sqrt(Q) * (z/rho) * [ -K(m) + E(m) (R^2 + rho^2 + z^2) / A ]
//
// For rho <= 1e-3 R the bracketed B_rho terms cancel to ~(rho/R)^2 and the
// formula loses ~6 digits, so the kernel switches to the near-axis expansion
// around the axial profile B0(z) = C pi R^2 / (R^2+z^2)^{3/2}:
//
//   B_z   = B0 - (rho^2/4)  B0''
//   B_rho = -(rho/2) B0' + (rho^3/16) B0'''
//
// which keeps div B = 0 exactly and curl B = O(rho^3), and agrees with the
// full formula to ~1e-10 relative at the switch radius.
//
// CONTRACT: the AVX2 kernel mirrors this sequence operation for operation
// (same order, no FMA contraction, fixed-iteration AGM) so scalar and SIMD
// results are bitwise identical. Any change here must be mirrored there and
// is guarded by the kernel equivalence tests.

#include <cmath>

namespace microtrap::detail {

inline constexpr int kAgmIterations = 12;
inline constexpr double kNearAxisSwitch = 1e-3; // rho/R below this uses the expansion
inline constexpr double kPiLocal = 3.14159265358979323846;

// AGM evaluation of K(m), E(m) with a fixed, branch-free iteration count so
// every lane of a SIMD register runs the same sequence. Valid for m in [0,1);
// for the kernels m >= 1 cannot occur off the filament.
inline void agm_ke(double m, double& K, double& E) {
    double a = 1.0;
    double g = std::sqrt(1.0 - m);
    double sum = 0.5 * m;
    double pow2 = 1.0;
    for (int n = 0; n < kAgmIterations; ++n) {
        const double c = 0.5 * (a - g);
        const double an = 0.5 * (a + g);
        g = std::sqrt(a * g);
        a = an;
        sum += pow2 * (c * c);
        pow2 += pow2;
    }
    K = kPiLocal / (2.0 * a);
    E = K * (1.0 - sum);
}

// Adds one coil's field at one point to (bx, by, bz).
// (dx, dy, dz) = point - coil center; R = radius; pref = mu0 I turns / (2 pi).
inline void loop_accumulate(double dx, double dy, double dz, double R, double pref,
                            double& bx, double& by, double& bz) {
    const double rho2 = dx * dx + dy * dy;
    const double z2 = dz * dz;
    const double R2 = R * R;

    const double thr = kNearAxisSwitch * R;
    if (rho2 > thr * thr) {
        const double rho = std::sqrt(rho2);
        const double sum_rr = R + rho;
        const double dif_rr = R - rho;
        const double Q = sum_rr * sum_rr + z2;
        const double A = dif_rr * dif_rr + z2;
        const double m = (4.0 * R) * rho / Q;
        double K, E;
        agm_ke(m, K, E);
        const double pref_q = pref / std::sqrt(Q);
        const double r2sum = rho2 + z2;
        const double bz_term = K + E * (R2 - r2sum) / A;
        const double lat_term = E * (R2 + r2sum) / A - K;
        const double brho_over_rho = pref_q * dz * lat_term / rho2;
        bx += brho_over_rho * dx;
        by += brho_over_rho * dy;
        bz += pref_q * bz_term;
    } else {
        const double D = R2 + z2;
        const double sD = std::sqrt(D);
        const double D32 = D * sD;
        const double D52 = D32 * D;
        const double D72 = D52 * D;
        const double p = pref * kPiLocal;
        const double b0 = p * R2 / D32;
        const double b0p = -3.0 * p * R2 * dz / D52;
        const double b0pp = -3.0 * p * R2 * (D - 5.0 * z2) / D72;
        const double b0ppp = -15.0 * p * R2 * dz * (7.0 * z2 - 3.0 * D) / (D72 * D);
        const double lat = -0.5 * b0p + rho2 * (0.0625 * b0ppp);
        bx += dx * lat;
        by += dy * lat;
        bz += b0 - 0.25 * rho2 * b0pp;
    }
}

} // namespace microtrap::detail
