#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here is deliberately written from different primitives
// than the production code: elliptic integrals come from the standard
// library's special functions, loop fields from direct line-integral
// quadrature, and spin evolution from a dense eigendecomposition.

#include "microtrap/coil.hpp"
#include "microtrap/constants.hpp"
#include "microtrap/geometry.hpp"
#include "microtrap/spinsim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>

namespace oracles {

using microtrap::CoilSpec;
using microtrap::HamiltonianSpec;
using microtrap::SpinState;
using microtrap::Vec3;

// ---- complete elliptic integrals ----
// libstdc++ ships the C++17 math special functions; they take the modulus k,
// not the parameter m = k^2, and are computed by a different algorithm
// (Carlson/Bulirsch forms) than the production AGM loop.

inline double K_ref(double m) {
    return static_cast<double>(std::comp_ellint_1(std::sqrt(static_cast<long double>(m))));
}

inline double E_ref(double m) {
    return static_cast<double>(std::comp_ellint_2(std::sqrt(static_cast<long double>(m))));
}

// ---- circular-loop magnetostatics ----

// Closed-form field on the loop axis, z measured from the loop plane.
inline double axial_Bz(const CoilSpec& c, double z, double rf_phase = 0.0) {
    const double I = c.instantaneous_current(rf_phase);
    const double R = c.radius;
    const double d2 = R * R + z * z;
    return microtrap::constants.mu0 * I * R * R / (2.0 * d2 * std::sqrt(d2));
}

// Closed-form axial gradient dBz/dz on the loop axis.
inline double axial_dBz_dz(const CoilSpec& c, double z, double rf_phase = 0.0) {
    const double I = c.instantaneous_current(rf_phase);
    const double R = c.radius;
    const double d2 = R * R + z * z;
    return -3.0 * microtrap::constants.mu0 * I * R * R * z /
           (2.0 * d2 * d2 * std::sqrt(d2));
}

// Direct line-integral quadrature of the loop field,
//   B = mu0 I / (4 pi) * closed-integral dl x (r - r') / |r - r'|^3.
// The integrand is periodic and analytic away from the wire, so the uniform
// (trapezoid) rule converges geometrically; n = 20000 nodes reaches ~1e-12
// relative error for points a few tenths of a radius from the filament.
inline Vec3 biot_savart(const CoilSpec& c, const Vec3& p, int n = 20000,
                        double rf_phase = 0.0) {
    const double I = c.instantaneous_current(rf_phase);
    const double R = c.radius;
    const double dtheta = 2.0 * microtrap::kPi / n;
    Vec3 acc{};
    for (int k = 0; k < n; ++k) {
        const double th = dtheta * k;
        const double ct = std::cos(th), st = std::sin(th);
        const Vec3 pos{c.center.x + R * ct, c.center.y + R * st, c.center.z};
        const Vec3 dl{-R * st * dtheta, R * ct * dtheta, 0.0};
        const Vec3 r = p - pos;
        const double d = r.norm();
        acc += dl.cross(r) / (d * d * d);
    }
    return acc * (microtrap::constants.mu0 * I / (4.0 * microtrap::kPi));
}

// ---- dense spin Hamiltonian and eigendecomposition evolution ----

// Builds the matrix entrywise from explicit 2x2 Pauli matrices and the
// documented basis rule (site j = bit j, bit 0 = sigma_z +1), so any
// convention slip in the production code shows up as a mismatch.
inline Eigen::MatrixXcd dense_hamiltonian(const HamiltonianSpec& ham) {
    using cd = std::complex<double>;
    const int n = ham.n;
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, cd{0, -1}, cd{0, 1}, 0;
    sz << 1, 0, 0, -1;

    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        auto bit = [&](int j) { return static_cast<int>((k >> j) & 1); };
        cd diag{};
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j)
                diag += ham.zz_at(i, j) * sz(bit(i), bit(i)) * sz(bit(j), bit(j));
            if (!ham.local.empty()) diag += ham.local[i].z * sz(bit(i), bit(i));
        }
        H(k, k) += diag;
        for (int j = 0; j < n; ++j) {
            const double hx = ham.transverse_field +
                              (ham.local.empty() ? 0.0 : ham.local[j].x);
            const double hy = ham.local.empty() ? 0.0 : ham.local[j].y;
            if (hx == 0.0 && hy == 0.0) continue;
            const Eigen::Index k2 = k ^ (Eigen::Index{1} << j);
            const int row = static_cast<int>((k2 >> j) & 1);
            H(k2, k) += hx * sx(row, bit(j)) + hy * sy(row, bit(j));
        }
    }
    return H;
}

// |psi(t)> = U exp(-i E t / hbar) U^dagger |psi(0)> with (E, U) from a dense
// self-adjoint eigensolve.
inline SpinState evolve_ref(const SpinState& state, const HamiltonianSpec& ham,
                            double t) {
    using cd = std::complex<double>;
    const Eigen::MatrixXcd H = dense_hamiltonian(ham);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::Index dim = H.rows();
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index k = 0; k < dim; ++k) psi(k) = state.amp[static_cast<std::size_t>(k)];
    Eigen::VectorXcd coeff = es.eigenvectors().adjoint() * psi;
    for (Eigen::Index q = 0; q < dim; ++q)
        coeff(q) *= std::exp(cd{0.0, -es.eigenvalues()(q) * t / microtrap::constants.hbar});
    psi = es.eigenvectors() * coeff;
    SpinState out;
    out.n = state.n;
    out.amp.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) out.amp[static_cast<std::size_t>(k)] = psi(k);
    return out;
}

// <psi| H |psi> for drift checks.
inline double energy_expectation(const SpinState& state, const HamiltonianSpec& ham) {
    const Eigen::MatrixXcd H = dense_hamiltonian(ham);
    const Eigen::Index dim = H.rows();
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index k = 0; k < dim; ++k) psi(k) = state.amp[static_cast<std::size_t>(k)];
    return std::real((psi.adjoint() * H * psi).value());
}

// ---- helpers shared by several suites ----

inline double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

inline double rel_err(const Vec3& got, const Vec3& want) {
    const double scale = std::max(want.norm(), 1e-300);
    return (got - want).norm() / scale;
}

// Deterministic per-suite RNG so failures reproduce.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

} // namespace oracles
