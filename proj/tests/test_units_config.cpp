#include "microtrap/config.hpp"
#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/io.hpp"
#include "microtrap/units.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

using namespace microtrap;

TEST_CASE("quantity parsing covers the unit table") {
    CHECK(parse_quantity("2.5 um", Dim::Length) == doctest::Approx(2.5e-6).epsilon(1e-15));
    CHECK(parse_quantity("2.5um", Dim::Length) == parse_quantity("2.5 um", Dim::Length));
    CHECK(parse_quantity("1 mm", Dim::Length) == 1e-3);
    CHECK(parse_quantity("10 mA", Dim::Current) == doctest::Approx(1e-2).epsilon(1e-15));
    CHECK(parse_quantity("1 MHz", Dim::Frequency) == 1e6);
    CHECK(parse_quantity("0.75 MHz", Dim::Frequency) == 0.75e6);
    CHECK(parse_quantity("1 G", Dim::MagneticField) == 1e-4);
    CHECK(parse_quantity("0.5 mu_B", Dim::MagneticMoment) ==
          0.5 * constants.bohr_magneton);
    CHECK(parse_quantity("9.0121831 amu", Dim::Mass) ==
          doctest::Approx(9.0121831 * constants.amu).epsilon(1e-15));
    CHECK(parse_quantity("50 Ohm", Dim::Resistance) == 50.0);
    CHECK(parse_quantity("1 eV", Dim::Energy) == constants.elementary_charge);
    CHECK(parse_quantity("3 hkHz", Dim::Energy) ==
          doctest::Approx(3e3 * constants.planck_h).epsilon(1e-15));
    CHECK(parse_quantity("2 us", Dim::Time) == 2e-6);
    CHECK(parse_quantity("90 deg", Dim::Angle) == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(parse_quantity("0.5 pi", Dim::Angle) == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(parse_quantity("1.25", Dim::Angle) == 1.25); // bare angle = radians
    CHECK(parse_quantity("2.5 mW", Dim::Power) ==
          doctest::Approx(2.5e-3).epsilon(1e-15));
    CHECK(parse_quantity("  42  ", Dim::Dimensionless) == 42.0);
    CHECK(parse_quantity("-3e-2 A", Dim::Current) == -3e-2);
}

TEST_CASE("quantity parsing rejects malformed input") {
    CHECK_THROWS_AS((void)parse_quantity("", Dim::Length), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_quantity("abc", Dim::Length), std::invalid_argument);
    // missing unit on a dimensioned value
    CHECK_THROWS_AS((void)parse_quantity("2.5", Dim::Length), std::invalid_argument);
    // wrong-dimension unit
    CHECK_THROWS_AS((void)parse_quantity("2.5 mA", Dim::Length), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_quantity("1 parsec", Dim::Length), std::invalid_argument);
    // unit on a dimensionless value
    CHECK_THROWS_AS((void)parse_quantity("3 um", Dim::Dimensionless),
                    std::invalid_argument);
}

namespace {

const char* kSample = R"(# drive layout
[layout]
kind = square
nx = 20
ny = 20
lattice_constant = 10 um
height = 2.5 um

; moment block
[moment]
mode = adiabatic
mu_eff = 0.5 mu_B
direction = 0 0 1
heights = 1 2 5 um
vacancies = 3, 7 12
exact = true
)";

} // namespace

TEST_CASE("config parsing and typed access") {
    const ConfigDoc doc = ConfigDoc::parse(kSample, "sample.config");
    CHECK(doc.has_section("layout"));
    CHECK(doc.has_section("moment"));
    CHECK_FALSE(doc.has_section("scan"));
    CHECK(doc.has("layout", "nx"));
    CHECK_FALSE(doc.has("layout", "nz"));

    CHECK(doc.string_value("layout", "kind") == "square");
    CHECK(doc.integer("layout", "nx") == 20);
    CHECK(doc.integer_or("layout", "nz", 7) == 7);
    CHECK(doc.quantity("layout", "lattice_constant", Dim::Length) ==
          doctest::Approx(10e-6).epsilon(1e-15));
    CHECK(doc.quantity_or("layout", "depth", Dim::Length, 4e-6) == 4e-6);
    CHECK(doc.quantity("moment", "mu_eff", Dim::MagneticMoment) ==
          0.5 * constants.bohr_magneton);
    CHECK(doc.boolean_or("moment", "exact", false));
    CHECK(doc.boolean_or("moment", "missing", true));

    const Vec3 dir = doc.vec3("moment", "direction", Dim::Dimensionless);
    CHECK(dir.x == 0.0);
    CHECK(dir.z == 1.0);

    const std::vector<double> hs = doc.quantity_list("moment", "heights", Dim::Length);
    REQUIRE(hs.size() == 3);
    CHECK(hs[0] == 1e-6);
    CHECK(hs[1] == 2e-6);
    CHECK(hs[2] == doctest::Approx(5e-6).epsilon(1e-15));

    const std::vector<int> vac = doc.int_list_or("moment", "vacancies");
    CHECK(vac == std::vector<int>{3, 7, 12});
    CHECK(doc.int_list_or("moment", "nothing").empty());
}

TEST_CASE("config errors carry the source location") {
    const ConfigDoc doc = ConfigDoc::parse(kSample, "sample.config");
    try {
        (void)doc.quantity("layout", "kind", Dim::Length);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sample.config:3") != std::string::npos);
        CHECK(msg.find("kind") != std::string::npos);
    }
    try {
        (void)doc.string_value("layout", "nope");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
}

TEST_CASE("config rejects malformed documents") {
    CHECK_THROWS_AS((void)ConfigDoc::parse("key = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a]\nx 1\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a]\nx =\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a]\nx = 1\n[a]\ny = 2\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a!]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)ConfigDoc::parse("[a]\nbad key = 1\n"), ConfigError);
}

TEST_CASE("key and section validation name the offending line") {
    const ConfigDoc doc = ConfigDoc::parse(kSample, "sample.config");
    CHECK_NOTHROW(doc.validate_sections({"layout", "moment"}));
    CHECK_THROWS_AS(doc.validate_sections({"layout"}), ConfigError);
    CHECK_NOTHROW(doc.validate_keys(
        "layout", {"kind", "nx", "ny", "lattice_constant", "height"}, {"kind"}));
    try {
        doc.validate_keys("layout", {"kind", "nx", "ny", "height"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lattice_constant") != std::string::npos);
        CHECK(msg.find("sample.config:6") != std::string::npos);
    }
    CHECK_THROWS_AS(doc.validate_keys("layout", {"kind"}, {"kind"}), ConfigError);
    CHECK_THROWS_AS(
        doc.validate_keys("layout",
                          {"kind", "nx", "ny", "lattice_constant", "height"},
                          {"pitch"}),
        ConfigError);
}

TEST_CASE("serialization is canonical and reparse-stable") {
    const ConfigDoc doc = ConfigDoc::parse(kSample, "sample.config");
    const std::string canon = doc.serialize();
    const ConfigDoc again = ConfigDoc::parse(canon, "canon");
    CHECK(again.serialize() == canon);
    CHECK(again.fingerprint() == doc.fingerprint());
    // comments are dropped, content is preserved
    CHECK(canon.find('#') == std::string::npos);
    CHECK(canon.find("lattice_constant = 10 um") != std::string::npos);

    // the fingerprint tracks content, not formatting
    const ConfigDoc spaced =
        ConfigDoc::parse("[layout]\nkind   =    square\n", "a");
    const ConfigDoc tight = ConfigDoc::parse("[layout]\nkind=square\n", "b");
    CHECK(spaced.fingerprint() == tight.fingerprint());
    const ConfigDoc other = ConfigDoc::parse("[layout]\nkind = ring\n", "c");
    CHECK(other.fingerprint() != tight.fingerprint());
}

TEST_CASE("canonical double formatting round-trips") {
    const std::vector<double> values{0.0,    1.0,     -1.5,        0.1,
                                     1e-300, 2.5e-6,  1.0 / 3.0,   kPi,
                                     1e21,   -533.07, 6.25e-10, 9.2740100783e-24};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-6) == "-2.5e-06");
}

TEST_CASE("csv tables serialize deterministically") {
    CsvTable t({"x", "y"});
    t.resize(2);
    t.set_row(1, {3.0, 4.5});
    t.set_row(0, {1.0, 0.1});
    const std::string out = t.serialize();
    CHECK(out == "x,y\n1,0.1\n3,4.5\n");

    CsvTable u({"a"});
    u.append_row({2.5e-6});
    CHECK(u.serialize() == "a\n2.5e-06\n");
}

TEST_CASE("fnv fingerprints are stable and input-sensitive") {
    const std::uint64_t h1 = fnv1a64("abc");
    const std::uint64_t h2 = fnv1a64("abd");
    CHECK(h1 != h2);
    CHECK(fnv1a64("abc") == h1);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
}
