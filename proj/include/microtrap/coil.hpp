#pragma once

#include "microtrap/geometry.hpp"

namespace microtrap {

// One circular current loop in the chip plane. The loop axis is +z for every
// coil; center.z gives the plane it sits in. `current` is the drive amplitude;
// the instantaneous current at drive phase `rf_phase` is
// current * cos(phase + rf_phase) * turns.
struct CoilSpec {
    Vec3 center;
    double radius = 0.0;   // [m], > 0
    double current = 0.0;  // amplitude [A]
    double phase = 0.0;    // per-coil drive phase offset [rad]
    int turns = 1;         // >= 1

    // Throws std::invalid_argument on non-physical values.
    void validate() const;

    double instantaneous_current(double rf_phase) const;
};

} // namespace microtrap
