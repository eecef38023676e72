#pragma once

#include "microtrap/coil.hpp"
#include "microtrap/geometry.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace microtrap {

// Local moment-pinning field attached to a site (engineered defect).
struct PinnedField {
    Vec3 axis{0, 0, 1};     // unit direction
    double strength = 0.0;  // energy splitting contribution [J]
};

struct Site {
    int index = 0;
    Vec3 position;                     // ion equilibrium position [m]
    Vec3 trap_frequency;               // per-axis angular frequency [rad/s]
    bool occupied = true;
    std::optional<PinnedField> pinned; // engineered local field, if any
};

enum class LayoutKind { Line, Square, Ring, LadderRing, Custom };

std::string layout_kind_name(LayoutKind k);
LayoutKind layout_kind_from_name(const std::string& name);

// Ring-specific metadata: spacing of neighbors and next-nearest neighbors
// along the circle of n sites with nearest spacing a:
//   r = a / (2 sin(pi/n)),  s = 2 a cos(pi/n)
struct RingInfo {
    int n = 0;
    double circumradius = 0.0; // [m]
    double nn_chord = 0.0;     // [m]
    double nnn_chord = 0.0;    // [m]
};

// Two concentric rings of n rungs at shared angles. The outer-leg spacing
// follows the large-n ladder relation a2 = a1 + 4 pi dr / n used by all
// downstream asymmetry analysis; site coordinates keep physical radial rungs
// of length dr.
struct LadderInfo {
    int n_rungs = 0;
    double a1 = 0.0;      // inner leg spacing [m]
    double a2 = 0.0;      // outer leg spacing [m], a1 + 4 pi dr / n
    double delta_r = 0.0; // rung length [m]
};

// Geometry/drive parameters shared by the generators.
struct LayoutOptions {
    double coil_radius = 2.5e-6;              // [m]
    double coil_current = 10e-3;              // [A]
    double coil_phase = 0.0;                  // [rad]
    int coil_turns = 1;
    Vec3 trap_frequency{2.0 * 3.14159265358979323846e6,
                        2.0 * 3.14159265358979323846e6,
                        2.0 * 3.14159265358979323846e6}; // [rad/s]
};

struct LatticeLayout {
    LayoutKind kind = LayoutKind::Custom;
    double lattice_constant = 0.0; // nearest-neighbor spacing [m]
    double ion_height = 0.0;       // site plane above the coil plane [m]
    std::vector<Site> sites;
    std::vector<CoilSpec> coils;
    std::optional<RingInfo> ring;
    std::optional<LadderInfo> ladder;

    std::size_t occupied_count() const;
    std::vector<int> occupied_indices() const;

    nlohmann::json to_json() const;
    static LatticeLayout from_json(const nlohmann::json& j);
};

/// n sites in a row along +x, spacing a, one coil per site a height `height`
/// below the site plane (coils at z = 0, sites at z = height).
LatticeLayout make_line(int n, double a, double height,
                        const LayoutOptions& opt = {});

/// nx * ny sites on a square grid in the xy plane, spacing a.
LatticeLayout make_square(int nx, int ny, double a, double height,
                          const LayoutOptions& opt = {});

/// n sites evenly spaced on a circle with nearest-neighbor chord a.
LatticeLayout make_ring(int n, double a, double height,
                        const LayoutOptions& opt = {});

/// Two concentric rings of n_rungs sites at shared angular positions
/// (trapezoidal cells). Inner leg spacing a1, radial rung length delta_r.
LatticeLayout make_ladder_ring(int n_rungs, double a1, double delta_r, double height,
                               const LayoutOptions& opt = {});

/// Copy of `layout` with the given sites vacated and/or locally pinned.
/// Vacated sites stay in the site list (occupied = false) so indices are
/// stable. When keep_vacated_coils_driven is false the matching coils are
/// switched off; by default they keep their drive.
LatticeLayout apply_defects(const LatticeLayout& layout,
                            const std::vector<int>& vacancies,
                            const std::vector<std::pair<int, PinnedField>>& pins = {},
                            bool keep_vacated_coils_driven = true);

// ---- spacing-ratio analysis ----

// Next-nearest/nearest coupling excess of an n-site ring, relative to the
// 1/8 of a straight chain: (a/s)^3 / (1/8) - 1 = sec^3(pi/n) - 1.
double ring_nnn_excess(int n);

// Smallest n with ring_nnn_excess(n) < threshold.
int smallest_ring_below(double excess_threshold);

// Ladder leg asymmetry 1 - (a1/a2)^3 with a2 = a1 + 4 pi dr / n.
double ladder_leg_asymmetry(int n_rungs, double a1, double delta_r);

// Rung count at which the leg asymmetry drops to `threshold`, computed from
// the continuous crossover n* solving (1 + 4 pi dr / (n a1))^3 = 1/(1-thr),
// rounded to the nearest integer.
int ladder_rungs_for_asymmetry(double threshold, double a1, double delta_r);

struct RatioRow {
    int i = 0;
    int j = 0;
    double distance = 0.0;     // [m]
    double over_nn = 0.0;      // distance / nearest-neighbor spacing
    double cubic_ratio = 0.0;  // (nn / distance)^3, the coupling falloff ratio
};

struct RatioReport {
    LayoutKind kind = LayoutKind::Custom;
    double nn_distance = 0.0;
    // Ring: NNN/NN data. Ladder: outer-vs-inner leg data. Others: the few
    // shortest distinct pair distances.
    std::vector<RatioRow> rows;
    // Ring: excess of (a/s)^3 over 1/8. Ladder: leg asymmetry 1-(a1/a2)^3.
    std::optional<double> headline_ratio;

    nlohmann::json to_json() const;
};

RatioReport ratio_analysis(const LatticeLayout& layout);

} // namespace microtrap
