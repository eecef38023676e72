#include "microtrap/units.hpp"

#include "microtrap/constants.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <vector>

namespace microtrap {

std::string dim_name(Dim d) {
    switch (d) {
    case Dim::Dimensionless: return "dimensionless";
    case Dim::Length: return "length";
    case Dim::Current: return "current";
    case Dim::MagneticField: return "magnetic field";
    case Dim::Frequency: return "frequency";
    case Dim::Mass: return "mass";
    case Dim::Energy: return "energy";
    case Dim::MagneticMoment: return "magnetic moment";
    case Dim::Resistance: return "resistance";
    case Dim::Time: return "time";
    case Dim::Angle: return "angle";
    case Dim::Power: return "power";
    }
    return "unknown";
}

namespace {

struct UnitEntry {
    const char* suffix;
    double factor;
};

const std::map<Dim, std::vector<UnitEntry>>& unit_table() {
    static const std::map<Dim, std::vector<UnitEntry>> table{
        {Dim::Length,
         {{"m", 1.0},
          {"cm", 1e-2},
          {"mm", 1e-3},
          {"um", 1e-6},
          {"µm", 1e-6},
          {"nm", 1e-9}}},
        {Dim::Current,
         {{"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"µA", 1e-6}, {"nA", 1e-9}}},
        {Dim::MagneticField,
         {{"T", 1.0},
          {"mT", 1e-3},
          {"uT", 1e-6},
          {"µT", 1e-6},
          {"nT", 1e-9},
          {"G", 1e-4},
          {"mG", 1e-7}}},
        {Dim::Frequency,
         {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
        {Dim::Mass, {{"kg", 1.0}, {"amu", constants.amu}, {"u", constants.amu}}},
        {Dim::Energy,
         {{"J", 1.0},
          {"eV", constants.elementary_charge},
          {"meV", 1e-3 * constants.elementary_charge},
          // energy given as an equivalent frequency, E = h f
          {"hHz", constants.planck_h},
          {"hkHz", constants.planck_h * 1e3},
          {"hMHz", constants.planck_h * 1e6}}},
        {Dim::MagneticMoment,
         {{"J/T", 1.0}, {"mu_B", constants.bohr_magneton},
          {"muB", constants.bohr_magneton}}},
        {Dim::Resistance, {{"Ohm", 1.0}, {"ohm", 1.0}, {"kOhm", 1e3}}},
        {Dim::Time,
         {{"s", 1.0},
          {"ms", 1e-3},
          {"us", 1e-6},
          {"µs", 1e-6},
          {"ns", 1e-9}}},
        {Dim::Angle, {{"rad", 1.0}, {"deg", kPi / 180.0}, {"pi", kPi}}},
        {Dim::Power, {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}}},
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

double parse_quantity(const std::string& text, Dim expected) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty value");

    // Split into leading number and trailing unit token.
    const char* begin = t.c_str();
    char* after = nullptr;
    const double value = std::strtod(begin, &after);
    if (after == begin)
        throw std::invalid_argument("expected a number, got '" + t + "'");
    std::string unit = trim(std::string(after));

    if (expected == Dim::Dimensionless) {
        if (!unit.empty())
            throw std::invalid_argument("value '" + t +
                                        "' must be dimensionless (no unit)");
        return value;
    }

    if (unit.empty()) {
        // Angles default to radians; everything else must name a unit so
        // config files stay self-describing.
        if (expected == Dim::Angle) return value;
        throw std::invalid_argument("value '" + t + "' needs a " +
                                    dim_name(expected) + " unit suffix");
    }

    const auto& entries = unit_table().at(expected);
    for (const auto& e : entries) {
        if (unit == e.suffix) return value * e.factor;
    }

    std::string known;
    for (const auto& e : entries) {
        if (!known.empty()) known += ", ";
        known += e.suffix;
    }
    throw std::invalid_argument("unknown " + dim_name(expected) + " unit '" + unit +
                                "' (known: " + known + ")");
}

} // namespace microtrap
