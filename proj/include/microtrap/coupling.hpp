#pragma once

#include "microtrap/geometry.hpp"
#include "microtrap/lattice.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace microtrap {

// Ion species entering the coupling formulas. omega0 is the qubit (clock)
// splitting, only used for reporting; mu_eff defaults to half a Bohr
// magneton, the generic first-order moment of a hyperfine qubit pair.
struct IonSpecies {
    std::string name;
    double mass = 0.0;         // [kg]
    double nuclear_spin = 0.0; // [hbar]
    double omega0 = 0.0;       // hyperfine splitting [rad/s]
    double mu_eff = 0.0;       // effective moment [J/T]

    static IonSpecies be9();
    static IonSpecies mg25();
    static IonSpecies ca43();
    // Lookup by name ("Be9+", "Mg25+", "Ca43+", case-insensitive prefix ok).
    static IonSpecies by_name(const std::string& name);

    void validate() const;
};

// Which motional mode mediates the spin-spin interaction. Lateral modes give
// ferromagnetic (negative) couplings, vertical modes antiferromagnetic
// (positive) ones.
enum class ModeOrientation { Lateral, Vertical };

struct CouplingConfig {
    double alpha = 2.0; // dimensionless mode-geometry factor, |alpha| used
    ModeOrientation orientation = ModeOrientation::Lateral;

    double signed_alpha() const {
        const double mag = std::abs(alpha);
        return orientation == ModeOrientation::Lateral ? -mag : mag;
    }
    void validate() const;
};

/// Spin-spin coupling rate between two ions at distance `a`, each driven by a
/// state-dependent force of magnitude F, confined at angular trap frequency
/// omega_T:
///
///   J = alpha * k_e e^2 F^2 / (m^2 omega_T^4 a^3) / h   [Hz]
///
/// with k_e = 1/(4 pi eps0). The sign comes from the mode orientation
/// (Lateral < 0, Vertical > 0). The 1/a^3 falloff and F^2, omega_T^-4
/// dependences are the scaling handles used everywhere else.
double coupling_strength(double force, const IonSpecies& ion, double omega_T,
                         double a, const CouplingConfig& cfg);

/// Dimensionless binding parameter comparing the Coulomb coupling of two
/// neighboring ions with the trap stiffness:
///
///   beta = k_e e^2 / (m omega_T^2 a^3)
///
/// beta << 1 means site-local modes; beta -> 1 signals melting of the
/// independent-well picture.
double binding_parameter(const IonSpecies& ion, double omega_T, double a);

// Full pairwise coupling matrix over the occupied sites of a layout.
struct CouplingMatrix {
    std::vector<int> site_index;    // row/column -> layout site index
    std::vector<double> J_hz;       // row-major n x n, J[i][j] in Hz, 0 diagonal
    std::vector<double> distance_m; // pair distances, same shape

    std::size_t size() const { return site_index.size(); }
    double J(std::size_t i, std::size_t j) const { return J_hz[i * size() + j]; }
    double distance(std::size_t i, std::size_t j) const {
        return distance_m[i * size() + j];
    }

    // |J| of the closest pair (the nearest-neighbor coupling scale).
    double nn_coupling() const;
    double nn_distance() const;

    nlohmann::json to_json() const;
    // Square adjacency table: header row/column of site indices, J in Hz.
    std::string to_csv() const;
};

/// Couplings J_ij for all occupied site pairs. `site_forces` gives the force
/// magnitude per site (same order and length as layout.sites; entries for
/// vacant sites are ignored). Heterogeneous pairs combine via geometric
/// means, F^2 -> F_i F_j and omega_T^4 -> omega_i^2 omega_j^2, so homogeneous
/// arrays reduce to the two-ion formula exactly. Trap frequency per site is
/// the component picked by the mode orientation (x for Lateral, z for
/// Vertical).
CouplingMatrix coupling_matrix(const LatticeLayout& layout,
                               std::span<const double> site_forces,
                               const IonSpecies& ion, const CouplingConfig& cfg);

// ---- scaling with miniaturization ----

enum class CurrentLaw { ConstantCurrent, ConstantCurrentDensity };

// Baseline design point for scale projections.
struct ScalePoint {
    double coil_radius = 0.0;  // [m]
    double lattice_a = 0.0;    // [m]
    double omega_T = 0.0;      // [rad/s]
    double current = 0.0;      // [A]
    double coupling_hz = 0.0;  // |J| at the baseline [Hz]
};

struct ScalingReport {
    double r = 1.0; // linear scale factor applied to coil dimensions
    CurrentLaw law = CurrentLaw::ConstantCurrent;
    double current_ratio = 1.0; // I(r)/I(1)
    double force_ratio = 1.0;   // F ~ I / r^2
    double omega_ratio = 1.0;   // omega_T ~ r^{-1/2} at fixed drive budget
    double a_ratio = 1.0;       // a ~ rho^{1/3} ~ r^{1/3} (vibrational amplitude)
    double j_ratio = 1.0;       // composed J ratio
    double scaled_coupling_hz = 0.0;
    bool coil_overlap = false;  // scaled a < 2 scaled R: coils collide
    nlohmann::json to_json() const;
};

/// Projects the baseline coupling to coil scale r (coil radius r * R).
/// ConstantCurrent: I fixed, F ~ 1/r^2, J ~ r^-3 (stronger when smaller).
/// ConstantCurrentDensity: I ~ r^2, F constant, J ~ r (weaker when smaller).
ScalingReport scaling_report(const ScalePoint& base, double r, CurrentLaw law);

// ---- array budgets ----

struct PowerBudget {
    int driven_loops = 0;
    double per_loop_w = 0.0; // mean I_rms^2 Z over the driven loops
    double total_w = 0.0;    // sum over driven loops, times duty cycle
    double duty_cycle = 1.0;
    nlohmann::json to_json() const;
};

/// Ohmic drive power of all driven coils: per loop (I/sqrt(2))^2 * Z.
PowerBudget power_budget(const LatticeLayout& layout, double impedance_ohm,
                         double duty_cycle = 1.0);

/// Magnitude ratio |B from site j's coil at site i| / |B from site i's coil
/// at site i|: how much a neighboring trap's drive leaks into a target site.
/// Falls off as the cube of the separation in the far zone.
double crosstalk_ratio(const LatticeLayout& layout, int target_site,
                       int neighbor_site);

} // namespace microtrap
