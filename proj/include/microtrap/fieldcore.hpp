#pragma once

#include "microtrap/coil.hpp"
#include "microtrap/field_kernel.hpp"
#include "microtrap/geometry.hpp"

#include <span>
#include <vector>

namespace microtrap {

struct FieldSample {
    Vec3 point;
    Vec3 B;        // [T]
    Mat3 jacobian; // jacobian(i,j) = dB_i / dx_j [T/m]
};

/// Field of a coil layout frozen at one drive phase. Wraps the runtime-
/// selected kernel and adds singularity guarding and jacobians.
///
/// Jacobians use central differences with one Richardson extrapolation step,
/// D = (4 D_{h/2} - D_h) / 3, at step h = max(1e-9 m, 1e-6 * distance to the
/// nearest coil filament). For these smooth fields that yields ~1e-9
/// relative accuracy away from filaments.
///
/// Any evaluation (including jacobian stencil points) within 1e-12 m of a
/// coil filament throws SingularityError carrying the coil index.
class FieldEvaluator {
public:
    FieldEvaluator(std::span<const CoilSpec> coils, double rf_phase = 0.0);

    std::size_t coil_count() const { return coils_.size(); }
    double rf_phase() const { return rf_phase_; }
    const std::vector<CoilSpec>& coils() const { return coils_; }

    Vec3 field(const Vec3& point) const;
    FieldSample sample(const Vec3& point) const;

    // Batch forms feed all points through the kernel in one call; outputs are
    // written to disjoint slots so they are deterministic for any `threads`.
    void field_many(std::span<const Vec3> points, std::span<Vec3> out,
                    int threads = 1) const;
    void sample_many(std::span<const Vec3> points, std::span<FieldSample> out,
                     int threads = 1) const;

    // Distance from `point` to the nearest coil filament (the wire circle),
    // and which coil that is.
    double min_filament_distance(const Vec3& point, std::size_t* index = nullptr) const;

    static constexpr double kSingularDistance = 1e-12; // [m]

private:
    void guard_singularity(const Vec3& point) const;
    void jacobian_into(const Vec3& point, double h, FieldSample& out) const;

    std::vector<CoilSpec> coils_;
    CoilBatch batch_;
    double rf_phase_;
};

/// Field and jacobian of a single loop (drive phase 0).
FieldSample loop_field(const CoilSpec& coil, const Vec3& point);

/// Superposed field and jacobian of a coil array at drive phase `rf_phase`;
/// each coil contributes with instantaneous current I cos(phase + rf_phase).
FieldSample array_field(std::span<const CoilSpec> coils, const Vec3& point,
                        double rf_phase = 0.0);

/// Jacobian dB_i/dx_j of the array field at `point`.
Mat3 field_jacobian(std::span<const CoilSpec> coils, const Vec3& point,
                    double rf_phase = 0.0);

} // namespace microtrap
