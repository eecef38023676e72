#pragma once

#include "microtrap/coupling.hpp"
#include "microtrap/geometry.hpp"
#include "microtrap/lattice.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace microtrap {

// Dense state vector over n spins, n <= 14. Basis convention: site j maps to
// bit j of the basis index (site 0 = least significant bit); bit value 0 is
// the sigma_z = +1 state.
struct SpinState {
    int n = 0;
    std::vector<std::complex<double>> amp;

    static constexpr int kMaxSpins = 14;

    static SpinState basis_state(int n, std::size_t index);
    static SpinState all_up(int n);
    // Product state |+>^n, the gamma = 0 transverse-field ground state for a
    // negative transverse field.
    static SpinState plus_state(int n);

    std::size_t dim() const { return amp.size(); }
    double norm() const;
    void normalize();
    // sigma_z eigenvalue of site j in basis state k: +1 or -1.
    static int sz_of(std::size_t k, int j) {
        return (k >> j) & 1 ? -1 : +1;
    }
};

// Ising Hamiltonian with transverse and local fields, energies in joules:
//
//   H = sum_{i<j} zz(i,j) sz_i sz_j + transverse_field * sum_j sx_j
//       + sum_j local[j] . sigma_j
//
struct HamiltonianSpec {
    int n = 0;
    std::vector<double> zz;        // n*n symmetric coupling energies [J]
    double transverse_field = 0.0; // [J]
    std::vector<Vec3> local;       // per-site local field [J]; empty = none

    double zz_at(int i, int j) const { return zz[static_cast<std::size_t>(i) * n + j]; }
    void validate() const;

    // Couplings from Hz to joules (x planck_h); transverse field given in Hz.
    // Qubit q corresponds to row q of the coupling matrix (occupied sites in
    // layout order). When `layout` is given, engineered pinned fields on
    // occupied sites become local field terms.
    static HamiltonianSpec from_coupling(const CouplingMatrix& cm,
                                         double transverse_field_hz,
                                         const LatticeLayout* layout = nullptr);
};

enum class EvolveMethod { Exact, Trotter };

/// Time evolution exp(-i H t / hbar) |state>.
///
/// Exact: scaled truncated Taylor expansion of the matrix exponential acting
/// on the vector (spectrum shifted to center, time sliced so each slice
/// converges to machine precision). No eigendecomposition, works to n = 14.
///
/// Trotter: second-order Strang splitting between the diagonal (zz + local z)
/// part and the per-site transverse (x, y) rotations, with time step
/// `trotter_dt` (error O(dt^2)).
SpinState evolve(const SpinState& state, const HamiltonianSpec& ham, double t,
                 EvolveMethod method = EvolveMethod::Exact, double trotter_dt = 0.0);

/// Dense ground state via eigendecomposition. Limited to n <= 10.
struct GroundState {
    double energy = 0.0; // [J]
    SpinState state;
};
GroundState ground_state(const HamiltonianSpec& ham);

struct Observables {
    std::vector<double> sx; // <sigma_x_j>
    std::vector<double> sz; // <sigma_z_j>
    double mean_sx = 0.0;
    double mean_sz = 0.0;
    double magnetization = 0.0; // sum_j <sigma_z_j>
};
Observables observables(const SpinState& state);

// <sigma_z_i sigma_z_j>
double zz_correlation(const SpinState& state, int i, int j);

// Mean <sigma_z sigma_z> over the pairs listed in `pairs`.
double mean_zz_correlation(const SpinState& state,
                           const std::vector<std::pair<int, int>>& pairs);

// ---- transverse-field parameter sweep ----

// gamma = J_nn / B_f is the signed ratio of the nearest-neighbor coupling to
// the transverse field. The sweep fixes the transverse field at
// -|bf_hz| * h (negative, so the gamma = 0 ground state is |+>^n with
// <sigma_x> = +1) and sets the coupling matrix to gamma * B_f * shape, where
// shape is the input couplings normalized to +1 at the nearest-neighbor pair.
// Antiferromagnetic couplings therefore correspond to negative gamma.
struct SweepSpec {
    std::vector<double> gammas;
    double bf_hz = 1.0;        // transverse field magnitude [Hz]
    bool ground = true;        // ground state (default) or time evolution
    double evolve_time = 0.0;  // [s], used when !ground
};

struct SweepPoint {
    double gamma = 0.0;
    Observables obs;
    double nn_zz = 0.0; // mean nearest-neighbor <sigma_z sigma_z>
};

std::vector<SweepPoint> gamma_sweep(const CouplingMatrix& shape,
                                    const SweepSpec& spec);

// ---- graph-state construction ----

// Builds the cluster state of the nearest-neighbor graph of `cm` by a global
// zz phase evolution plus per-site corrections. With include_long_range the
// zz phases of ALL pairs are applied, scaled by J_ij / J_nn, modeling the
// physical always-on interaction; fidelity is taken against the ideal
// nearest-neighbor-only construction.
struct ClusterResult {
    SpinState state;
    double fidelity = 1.0;
    std::vector<std::pair<int, int>> edges; // nearest-neighbor graph
};
ClusterResult make_cluster_state(const CouplingMatrix& cm, bool include_long_range);

// ---- interaction-range diagnostic ----

// Least-squares power-law fit |J| ~ b^-p over all coupled pairs; passes when
// the fitted exponent p exceeds the lattice dimension D (the thermodynamic
// convergence condition p > D). An exact cubic falloff passes D = 2 and
// fails D = 3.
struct FalloffResult {
    double exponent = 0.0;
    int dimension = 0;
    bool pass = false;
};
FalloffResult correlation_falloff_check(const CouplingMatrix& cm, int dimension);

} // namespace microtrap
