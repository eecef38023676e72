#pragma once

#include "microtrap/fieldcore.hpp"
#include "microtrap/geometry.hpp"
#include "microtrap/scan.hpp"

#include <span>
#include <vector>

namespace microtrap {

// How the magnetic moment responds to the oscillating trap field.
//
// AdiabaticFollow: the moment tracks the local total field direction, so the
// potential is U = -mu_eff |B| and the force responds at twice the drive
// frequency (it is even in the drive current).
//
// Pinned: the moment is locked to a fixed direction (strong bias or local
// pinning field), U = -mu_eff d.B, force odd in the drive current, responding
// at the drive frequency itself.
enum class MomentMode { AdiabaticFollow, Pinned };

struct MomentModel {
    MomentMode mode = MomentMode::AdiabaticFollow;
    double mu_eff = 0.0;        // effective moment [J/T], > 0
    Vec3 direction{0, 0, 1};    // pinned direction (unit); ignored when adiabatic

    static MomentModel adiabatic(double mu_eff);
    static MomentModel pinned(double mu_eff, const Vec3& direction);

    void validate() const;
};

struct ForceResult {
    Vec3 F;                            // [N]
    int response_frequency_multiplier; // 2 for AdiabaticFollow, 1 for Pinned
};

/// Gradient force F = grad(m . B) on a point dipole, from a field sample and
/// a moment model. `external_B` is a uniform bias added to the coil field; it
/// shifts the moment orientation in AdiabaticFollow mode but contributes no
/// gradient of its own.
///
/// AdiabaticFollow:  F_i = mu_eff * sum_j bhat_j dB_j/dx_i,  bhat = total
/// field direction. Pinned: same with bhat replaced by the pinned direction.
ForceResult dipole_force(const FieldSample& sample, const MomentModel& moment,
                         const Vec3& external_B = Vec3{});

struct ForceMapRow {
    Vec3 point;
    Vec3 B;
    Vec3 F;
};

/// Force sampled over a scan grid at one drive phase. Row order follows the
/// grid's flat enumeration; evaluation may be parallel but output is
/// deterministic for any thread count.
std::vector<ForceMapRow> force_map(std::span<const CoilSpec> coils,
                                   const MomentModel& moment, const ScanGrid& grid,
                                   const Vec3& external_B = Vec3{},
                                   double rf_phase = 0.0, int threads = 1);

/// Ratio f_Larmor / f_drive deciding whether AdiabaticFollow is justified.
/// f_Larmor = mu_eff |B| / (2 pi hbar) for an effective two-level moment.
/// Ratios >= 10 are conventionally safe; below ~1 the moment cannot follow.
double adiabaticity_ratio(double B_magnitude, const MomentModel& moment,
                          double f_drive);

} // namespace microtrap
