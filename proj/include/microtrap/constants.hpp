#pragma once

namespace microtrap {

// CODATA-2018 values, SI units throughout. These are compile-time constants
// by design: every module draws from this single table so serialized outputs
// are reproducible bit-for-bit across runs and hosts.
struct PhysicalConstants {
    double mu0;                // vacuum permeability [T m / A]
    double eps0;               // vacuum permittivity [F / m]
    double bohr_magneton;      // [J / T]
    double elementary_charge;  // [C]
    double hbar;               // reduced Planck constant [J s]
    double planck_h;           // Planck constant [J s]
    double amu;                // atomic mass unit [kg]

    constexpr double coulomb_constant() const { return 1.0 / (4.0 * kPi * eps0); }

    static constexpr double kPi = 3.14159265358979323846;
};

inline constexpr PhysicalConstants constants{
    1.25663706212e-6,   // mu0
    8.8541878128e-12,   // eps0
    9.2740100783e-24,   // bohr_magneton
    1.602176634e-19,    // elementary_charge (exact)
    1.054571817e-34,    // hbar
    6.62607015e-34,     // planck_h (exact)
    1.66053906660e-27,  // amu
};

inline constexpr double kPi = PhysicalConstants::kPi;

} // namespace microtrap
