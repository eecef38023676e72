#pragma once

#include <string>

namespace microtrap {

// Physical dimension a config value is expected to carry.
enum class Dim {
    Dimensionless,
    Length,
    Current,
    MagneticField,
    Frequency, // cycles per second, stored in Hz; angular factors are applied
               // by the consumer where rad/s is needed
    Mass,
    Energy,
    MagneticMoment,
    Resistance,
    Time,
    Angle,
    Power,
};

std::string dim_name(Dim d);

// Parses a number with an optional unit suffix ("2.5 um", "10 mA", "1 MHz",
// "0.5 mu_B") into SI base units for the expected dimension. A bare number is
// accepted only for Dimensionless. Throws std::invalid_argument with a
// human-readable reason (no position info; the config layer adds that).
double parse_quantity(const std::string& text, Dim expected);

} // namespace microtrap
