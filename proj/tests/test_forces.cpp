#include "microtrap/constants.hpp"
#include "microtrap/fieldcore.hpp"
#include "microtrap/forces.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace microtrap;

namespace {

CoilSpec reference_coil() {
    CoilSpec c;
    c.center = {0, 0, 0};
    c.radius = 2.5e-6;
    c.current = 10e-3;
    return c;
}

std::vector<CoilSpec> random_layout(std::mt19937_64& gen, int n) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<CoilSpec> coils;
    for (int i = 0; i < n; ++i) {
        CoilSpec c;
        c.center = {unif(gen) * 2e-5, unif(gen) * 2e-5, unif(gen) * 2e-6};
        c.radius = 1.5e-6 + std::abs(unif(gen)) * 3e-6;
        c.current = unif(gen) * 0.02;
        if (c.current == 0.0) c.current = 5e-3;
        coils.push_back(c);
    }
    return coils;
}

} // namespace

TEST_CASE("pinned axial force matches the analytic axial gradient") {
    const CoilSpec c = reference_coil();
    const double mu = 0.5 * constants.bohr_magneton;
    const MomentModel moment = MomentModel::pinned(mu, {0, 0, 1});
    const FieldSample s = loop_field(c, {0, 0, c.radius});
    const ForceResult f = dipole_force(s, moment);

    const double want = mu * oracles::axial_dBz_dz(c, c.radius);
    CHECK(std::abs(want) == doctest::Approx(2.47e-21).epsilon(2e-3));
    CHECK(f.F.z == doctest::Approx(want).epsilon(1e-6));
    CHECK(std::abs(f.F.x) <= 1e-9 * std::abs(f.F.z));
    CHECK(std::abs(f.F.y) <= 1e-9 * std::abs(f.F.z));
    CHECK(f.response_frequency_multiplier == 1);
}

TEST_CASE("adiabatic force on the axis reduces to the pinned axial force") {
    const CoilSpec c = reference_coil();
    const double mu = 0.5 * constants.bohr_magneton;
    const FieldSample s = loop_field(c, {0, 0, 0.7 * c.radius});
    const ForceResult fa = dipole_force(s, MomentModel::adiabatic(mu));
    const ForceResult fp = dipole_force(s, MomentModel::pinned(mu, {0, 0, 1}));
    // on axis the field points along +z, so the adiabatic direction is +z
    CHECK(oracles::rel_err(fa.F.z, fp.F.z) < 1e-12);
    CHECK(std::abs(fa.F.x) <= 1e-9 * std::abs(fa.F.z));
    CHECK(std::abs(fa.F.y) <= 1e-9 * std::abs(fa.F.z));
    CHECK(fa.response_frequency_multiplier == 2);
}

TEST_CASE("pinned diagonal moment combines jacobian columns") {
    auto gen = oracles::rng(0xd1a6);
    const auto coils = random_layout(gen, 4);
    const FieldEvaluator eval(coils);
    const double mu = constants.bohr_magneton;
    const double s2 = 1.0 / std::sqrt(2.0);
    const MomentModel moment = MomentModel::pinned(mu, {s2, s2, 0});
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Vec3 p{unif(gen) * 1e-5, unif(gen) * 1e-5, 3e-6 + std::abs(unif(gen)) * 5e-6};
        const FieldSample s = eval.sample(p);
        const ForceResult f = dipole_force(s, moment);
        const Mat3& J = s.jacobian;
        const Vec3 want{mu * s2 * (J(0, 0) + J(1, 0)),
                        mu * s2 * (J(0, 1) + J(1, 1)),
                        mu * s2 * (J(0, 2) + J(1, 2))};
        CHECK(oracles::rel_err(f.F, want) < 1e-14);
    }
}

TEST_CASE("force parity under a global current flip") {
    auto gen = oracles::rng(0xf11b);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto coils = random_layout(gen, 5);
        auto flipped = coils;
        for (auto& c : flipped) c.current = -c.current;
        const FieldEvaluator fwd(coils), rev(flipped);
        const Vec3 p{unif(gen) * 1e-5, unif(gen) * 1e-5, 4e-6 + std::abs(unif(gen)) * 4e-6};
        const FieldSample sf = fwd.sample(p);
        const FieldSample sr = rev.sample(p);

        const MomentModel adia = MomentModel::adiabatic(0.5 * constants.bohr_magneton);
        const Vec3 Fa1 = dipole_force(sf, adia).F;
        const Vec3 Fa2 = dipole_force(sr, adia).F;
        CHECK(Fa2.x == Fa1.x);
        CHECK(Fa2.y == Fa1.y);
        CHECK(Fa2.z == Fa1.z);

        const MomentModel pin =
            MomentModel::pinned(0.5 * constants.bohr_magneton,
                                Vec3{unif(gen), unif(gen), unif(gen) + 2.0}.normalized());
        const Vec3 Fp1 = dipole_force(sf, pin).F;
        const Vec3 Fp2 = dipole_force(sr, pin).F;
        CHECK(Fp2.x == -Fp1.x);
        CHECK(Fp2.y == -Fp1.y);
        CHECK(Fp2.z == -Fp1.z);
    }
}

TEST_CASE("a zero moment feels no force") {
    const CoilSpec c = reference_coil();
    const FieldSample s = loop_field(c, {1e-6, 0.4e-6, 2e-6});
    const ForceResult f = dipole_force(s, MomentModel::pinned(0.0, {0, 0, 1}));
    CHECK(f.F.x == 0.0);
    CHECK(f.F.y == 0.0);
    CHECK(f.F.z == 0.0);
    const ForceResult fa = dipole_force(s, MomentModel::adiabatic(0.0));
    CHECK(fa.F.norm() == 0.0);
}

TEST_CASE("pinned force ignores the bias field entirely") {
    const CoilSpec c = reference_coil();
    const FieldSample s = loop_field(c, {0.8e-6, -0.3e-6, 1.7e-6});
    const MomentModel pin = MomentModel::pinned(constants.bohr_magneton, {0, 1, 0});
    const Vec3 f0 = dipole_force(s, pin, {0, 0, 0}).F;
    const Vec3 f1 = dipole_force(s, pin, {0.5, -0.2, 1.0}).F;
    CHECK(f1.x == f0.x);
    CHECK(f1.y == f0.y);
    CHECK(f1.z == f0.z);
}

TEST_CASE("bias field steers the adiabatic direction") {
    const CoilSpec c = reference_coil();
    const double mu = constants.bohr_magneton;
    const FieldSample s = loop_field(c, {0, 0, c.radius});
    // a bias much larger than the coil field pins the direction to it
    const Vec3 big_bias{1.0, 0, 0};
    const Vec3 fa = dipole_force(s, MomentModel::adiabatic(mu), big_bias).F;
    const Vec3 fp = dipole_force(s, MomentModel::pinned(mu, {1, 0, 0})).F;
    CHECK(oracles::rel_err(fa, fp) < 1e-2);
}

TEST_CASE("adiabatic moment rejects an exact field zero") {
    FieldSample s;
    s.point = {0, 0, 0};
    s.B = {0, 0, 0};
    s.jacobian(0, 0) = 1.0;
    const MomentModel adia = MomentModel::adiabatic(constants.bohr_magneton);
    CHECK_THROWS_AS((void)dipole_force(s, adia), std::invalid_argument);
    // cancellation against the bias counts as a zero too
    s.B = {0, 0, 2e-3};
    CHECK_THROWS_AS((void)dipole_force(s, adia, {0, 0, -2e-3}), std::invalid_argument);
    // the pinned mode has no such failure point
    CHECK_NOTHROW((void)dipole_force(s, MomentModel::pinned(1e-24, {0, 0, 1}),
                                     {0, 0, -2e-3}));
}

TEST_CASE("adiabaticity ratio reference points") {
    const MomentModel half = MomentModel::adiabatic(0.5 * constants.bohr_magneton);
    const CoilSpec c = reference_coil();
    const double b_center = constants.mu0 * c.current / (2.0 * c.radius);
    CHECK(adiabaticity_ratio(b_center, half, 1e6) ==
          doctest::Approx(17.588).epsilon(1e-2));
    CHECK(adiabaticity_ratio(1e-4, half, 1e6) ==
          doctest::Approx(0.6998).epsilon(1e-2));
    // scales inversely with the drive frequency
    CHECK(adiabaticity_ratio(1e-4, half, 2e6) ==
          doctest::Approx(0.5 * adiabaticity_ratio(1e-4, half, 1e6)).epsilon(1e-12));
    CHECK_THROWS_AS((void)adiabaticity_ratio(1e-4, half, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)adiabaticity_ratio(1e-4, half, -1e6), std::invalid_argument);
    CHECK_THROWS_AS((void)adiabaticity_ratio(-1.0, half, 1e6), std::invalid_argument);
}

TEST_CASE("mirror-symmetric layout gives mirror-symmetric forces") {
    // 3x3 grid centered at the origin is symmetric under x -> -x
    std::vector<CoilSpec> coils;
    for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) {
            CoilSpec c = reference_coil();
            c.center = {i * 10e-6, j * 10e-6, 0};
            coils.push_back(c);
        }
    const FieldEvaluator eval(coils);
    const MomentModel adia = MomentModel::adiabatic(0.5 * constants.bohr_magneton);
    auto gen = oracles::rng(0x3131);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        const Vec3 p{unif(gen) * 1.2e-5, unif(gen) * 1.2e-5,
                     2e-6 + std::abs(unif(gen)) * 6e-6};
        const Vec3 q{-p.x, p.y, p.z};
        const Vec3 fp = dipole_force(eval.sample(p), adia).F;
        const Vec3 fq = dipole_force(eval.sample(q), adia).F;
        // the mirror pairs each coil with its partner across the plane, so
        // the per-coil sums accumulate in reversed order; equality holds only
        // up to that non-associativity
        const double scale = std::max(fp.norm(), 1e-300);
        CHECK(std::abs(fq.x + fp.x) <= 1e-11 * scale);
        CHECK(std::abs(fq.y - fp.y) <= 1e-11 * scale);
        CHECK(std::abs(fq.z - fp.z) <= 1e-11 * scale);
    }
}

TEST_CASE("force maps enumerate the grid in flat order and are thread-stable") {
    std::vector<CoilSpec> coils{reference_coil()};
    coils[0].center = {1e-6, 0, 0};
    ScanGrid grid;
    grid.origin = {0, 0, 2e-6};
    grid.axes = {{"x", {1, 0, 0}, -4e-6, 4e-6, 5}, {"z", {0, 0, 1}, 0.0, 3e-6, 4}};
    const MomentModel pin = MomentModel::pinned(constants.bohr_magneton, {0, 0, 1});

    const auto rows1 = force_map(coils, pin, grid, {}, 0.0, 1);
    const auto rows4 = force_map(coils, pin, grid, {}, 0.0, 4);
    REQUIRE(rows1.size() == grid.total());
    REQUIRE(rows4.size() == rows1.size());
    for (std::size_t k = 0; k < rows1.size(); ++k) {
        const Vec3 want = grid.point(k);
        CHECK(rows1[k].point.x == want.x);
        CHECK(rows1[k].point.z == want.z);
        CHECK(rows4[k].F.x == rows1[k].F.x);
        CHECK(rows4[k].F.y == rows1[k].F.y);
        CHECK(rows4[k].F.z == rows1[k].F.z);
    }
    // the grid's flat order walks the last axis fastest
    CHECK(rows1[1].point.z > rows1[0].point.z);
    CHECK(rows1[1].point.x == rows1[0].point.x);
}

TEST_CASE("moment model validation") {
    CHECK_THROWS_AS(MomentModel::adiabatic(-1e-24), std::invalid_argument);
    CHECK_THROWS_AS(MomentModel::adiabatic(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
    CHECK_THROWS_AS(MomentModel::pinned(1e-24, {0, 0, 0}), std::invalid_argument);
    MomentModel bad;
    bad.mode = MomentMode::Pinned;
    bad.mu_eff = 1e-24;
    bad.direction = {0, 0, 2.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_NOTHROW(MomentModel::pinned(1e-24, {0, 0, -5.0}));
    CHECK_NOTHROW(MomentModel::adiabatic(0.0));
}
