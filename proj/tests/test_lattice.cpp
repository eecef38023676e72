#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/lattice.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace microtrap;

TEST_CASE("line layout places sites symmetrically about the origin") {
    const LatticeLayout lay = make_line(3, 10e-6, 2e-6);
    REQUIRE(lay.sites.size() == 3);
    REQUIRE(lay.coils.size() == 3);
    CHECK(lay.sites[0].position.x == doctest::Approx(-10e-6).epsilon(1e-15));
    CHECK(lay.sites[1].position.x == 0.0);
    CHECK(lay.sites[2].position.x == doctest::Approx(10e-6).epsilon(1e-15));
    for (const Site& s : lay.sites) {
        CHECK(s.position.z == 2e-6);
        CHECK(s.occupied);
    }
    // coils sit in the chip plane directly below their sites
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(lay.coils[k].center.x == lay.sites[k].position.x);
        CHECK(lay.coils[k].center.z == 0.0);
    }
}

TEST_CASE("square layout is centered with row-major site indices") {
    const LatticeLayout lay = make_square(4, 3, 10e-6, 1e-6);
    REQUIRE(lay.sites.size() == 12);
    CHECK(lay.sites[0].position.x == doctest::Approx(-15e-6).epsilon(1e-15));
    CHECK(lay.sites[0].position.y == doctest::Approx(-10e-6).epsilon(1e-15));
    CHECK(lay.sites[1].position.x == doctest::Approx(-5e-6).epsilon(1e-15));
    CHECK(lay.sites[1].position.y == lay.sites[0].position.y);
    CHECK(lay.sites[4].position.y == doctest::Approx(0.0).epsilon(1e-15));
    for (int k = 0; k < 12; ++k) CHECK(lay.sites[k].index == k);
    // centroid at the origin
    Vec3 c{};
    for (const Site& s : lay.sites) c += s.position;
    CHECK(std::abs(c.x) < 1e-18);
    CHECK(std::abs(c.y) < 1e-18);
}

TEST_CASE("ring geometry follows the chord formulas") {
    const double a = 10e-6;
    for (int n : {3, 4, 7, 13, 100, 10000}) {
        const LatticeLayout lay = make_ring(n, a, 1e-6);
        REQUIRE(lay.ring.has_value());
        const RingInfo& ri = *lay.ring;
        CHECK(ri.circumradius ==
              doctest::Approx(a / (2.0 * std::sin(kPi / n))).epsilon(1e-14));
        CHECK(ri.nn_chord == a);
        CHECK(ri.nnn_chord == doctest::Approx(2.0 * a * std::cos(kPi / n)).epsilon(1e-14));

        // actual site positions reproduce the nearest-neighbor spacing
        const double d01 = (lay.sites[1].position - lay.sites[0].position).norm();
        CHECK(d01 == doctest::Approx(a).epsilon(1e-12));
        if (n >= 5) {
            const double d02 = (lay.sites[2].position - lay.sites[0].position).norm();
            CHECK(d02 == doctest::Approx(ri.nnn_chord).epsilon(1e-12));
        }
        // all sites equidistant from the center
        for (const Site& s : lay.sites) {
            const double r = std::hypot(s.position.x, s.position.y);
            CHECK(r == doctest::Approx(ri.circumradius).epsilon(1e-12));
        }
    }
    // square ring: next-nearest chord is the diagonal
    const LatticeLayout sq = make_ring(4, a, 1e-6);
    CHECK(sq.ring->nnn_chord == doctest::Approx(a * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("ring next-nearest excess matches the secant-cubed identity") {
    for (int n : {3, 5, 12, 13, 39, 200}) {
        const double c = std::cos(kPi / n);
        const double want = 1.0 / (c * c * c) - 1.0;
        CHECK(ring_nnn_excess(n) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(ring_nnn_excess(3) == doctest::Approx(7.0).epsilon(1e-14));
    // monotone decreasing toward the straight-chain limit
    for (int n = 4; n <= 60; ++n)
        CHECK(ring_nnn_excess(n) < ring_nnn_excess(n - 1));
    CHECK_THROWS_AS((void)ring_nnn_excess(2), std::invalid_argument);
}

TEST_CASE("smallest ring below an excess threshold") {
    CHECK(smallest_ring_below(0.10) == 13);
    CHECK(smallest_ring_below(0.01) == 39);
    for (double thr : {0.10, 0.05, 0.01, 0.002}) {
        const int n = smallest_ring_below(thr);
        CHECK(ring_nnn_excess(n) < thr);
        CHECK(ring_nnn_excess(n - 1) >= thr);
    }
    CHECK_THROWS_AS((void)smallest_ring_below(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)smallest_ring_below(-0.1), std::invalid_argument);
}

TEST_CASE("large rings approach the straight-chain coupling ratio") {
    const LatticeLayout lay = make_ring(500, 10e-6, 1e-6);
    const RingInfo& ri = *lay.ring;
    const double q = ri.nn_chord / ri.nnn_chord;
    CHECK(std::abs(q * q * q - 0.125) < 1e-4);
    CHECK(ring_nnn_excess(500) / 8.0 < 1e-4);
    // but a small ring is still far from it
    CHECK(std::abs(std::pow(1.0 / (2.0 * std::cos(kPi / 6)), 3.0) - 0.125) > 1e-2);
}

TEST_CASE("ladder ring stores the large-n leg relation") {
    const double a1 = 10e-6, dr = 5e-6, h = 1e-6;
    const int n = 24;
    const LatticeLayout lay = make_ladder_ring(n, a1, dr, h);
    REQUIRE(lay.ladder.has_value());
    REQUIRE(lay.sites.size() == 2u * n);
    const LadderInfo& li = *lay.ladder;
    CHECK(li.a2 == a1 + 4.0 * kPi * dr / n);
    // rungs are radial with the requested length
    for (int k = 0; k < n; ++k) {
        const Vec3 rung = lay.sites[n + k].position - lay.sites[k].position;
        CHECK(rung.norm() == doctest::Approx(dr).epsilon(1e-12));
        CHECK(rung.z == 0.0);
    }
    // inner leg spacing is the requested nearest-neighbor constant
    const double inner = (lay.sites[1].position - lay.sites[0].position).norm();
    CHECK(inner == doctest::Approx(a1).epsilon(1e-12));
}

TEST_CASE("ladder leg asymmetry and its rung-count inverse") {
    const double a1 = 10e-6, dr = 5e-6;
    for (int n : {10, 24, 25, 176, 1872}) {
        const double a2 = a1 + 4.0 * kPi * dr / n;
        const double q = a1 / a2;
        CHECK(ladder_leg_asymmetry(n, a1, dr) ==
              doctest::Approx(1.0 - q * q * q).epsilon(1e-14));
    }

    // rung counts where the asymmetry crosses 10% and 1%, for legs spaced
    // twice the rung length; the crossover depends only on dr/a1
    CHECK(ladder_rungs_for_asymmetry(0.10, a1, dr) == 176);
    CHECK(ladder_rungs_for_asymmetry(0.01, a1, dr) == 1872);
    CHECK(ladder_rungs_for_asymmetry(0.10, 2 * a1, 2 * dr) == 176);
    CHECK(ladder_rungs_for_asymmetry(0.01, 4e-6, 2e-6) == 1872);
    // nearest-integer rounding: the continuous crossover lies within half a
    // rung of the returned count, so the neighbors bracket the threshold
    CHECK(ladder_leg_asymmetry(175, a1, dr) > 0.10);
    CHECK(ladder_leg_asymmetry(177, a1, dr) < 0.10);
    CHECK(ladder_leg_asymmetry(1871, a1, dr) > 0.01);
    CHECK(ladder_leg_asymmetry(1873, a1, dr) < 0.01);
    CHECK(ladder_leg_asymmetry(1873, a1, dr) < ladder_leg_asymmetry(1872, a1, dr));

    // two dozen rungs put the outer/inner coupling ratio near one half
    CHECK(1.0 - ladder_leg_asymmetry(24, a1, dr) == doctest::Approx(0.49776).epsilon(1e-3));
    CHECK(1.0 - ladder_leg_asymmetry(25, a1, dr) == doctest::Approx(0.51038).epsilon(1e-3));
    CHECK(1.0 - ladder_leg_asymmetry(24, a1, dr) > 0.48);
    CHECK(1.0 - ladder_leg_asymmetry(24, a1, dr) < 0.52);
    CHECK(1.0 - ladder_leg_asymmetry(25, a1, dr) > 0.48);
    CHECK(1.0 - ladder_leg_asymmetry(25, a1, dr) < 0.52);

    CHECK_THROWS_AS((void)ladder_rungs_for_asymmetry(0.0, a1, dr), std::invalid_argument);
    CHECK_THROWS_AS((void)ladder_rungs_for_asymmetry(1.0, a1, dr), std::invalid_argument);
    CHECK_THROWS_AS((void)ladder_leg_asymmetry(2, a1, dr), std::invalid_argument);
}

TEST_CASE("generator argument validation") {
    CHECK_THROWS_AS((void)make_line(0, 1e-5, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS((void)make_line(3, 0.0, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS((void)make_line(3, 1e-5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)make_square(2, 0, 1e-5, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS((void)make_ring(2, 1e-5, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS((void)make_ladder_ring(2, 1e-5, 5e-6, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS((void)make_ladder_ring(8, 1e-5, 0.0, 1e-6), std::invalid_argument);
}

TEST_CASE("defects vacate sites without renumbering them") {
    const LatticeLayout base = make_line(3, 10e-6, 1e-6);
    const LatticeLayout vac = apply_defects(base, {1});
    CHECK(vac.occupied_count() == 2);
    CHECK(vac.occupied_indices() == std::vector<int>{0, 2});
    CHECK(vac.sites.size() == 3);
    CHECK_FALSE(vac.sites[1].occupied);
    // the vacated coil keeps its drive by default
    CHECK(vac.coils[1].current == base.coils[1].current);
    // the input layout is untouched
    CHECK(base.sites[1].occupied);

    const LatticeLayout dark = apply_defects(base, {1}, {}, false);
    CHECK(dark.coils[1].current == 0.0);
    CHECK(dark.coils[0].current == base.coils[0].current);
}

TEST_CASE("defects attach pinning fields and validate their axes") {
    const LatticeLayout base = make_line(3, 10e-6, 1e-6);
    PinnedField pin;
    pin.axis = {0, 0, 1};
    pin.strength = 2.5e-28;
    const LatticeLayout out = apply_defects(base, {}, {{2, pin}});
    REQUIRE(out.sites[2].pinned.has_value());
    CHECK(out.sites[2].pinned->strength == 2.5e-28);
    CHECK_FALSE(out.sites[0].pinned.has_value());

    PinnedField bad = pin;
    bad.axis = {0, 0, 2};
    CHECK_THROWS_AS((void)apply_defects(base, {}, {{2, bad}}), std::invalid_argument);
    CHECK_THROWS_AS((void)apply_defects(base, {7}), std::invalid_argument);
    CHECK_THROWS_AS((void)apply_defects(base, {}, {{-1, pin}}), std::invalid_argument);
}

TEST_CASE("ratio analysis per layout kind") {
    SUBCASE("ring reports the next-nearest excess") {
        const RatioReport rep = ratio_analysis(make_ring(13, 10e-6, 1e-6));
        REQUIRE(rep.headline_ratio.has_value());
        CHECK(*rep.headline_ratio == doctest::Approx(ring_nnn_excess(13)).epsilon(1e-14));
        REQUIRE(rep.rows.size() >= 2);
        CHECK(rep.rows[0].cubic_ratio == 1.0);
        const double over = rep.rows[1].over_nn;
        CHECK(rep.rows[1].cubic_ratio ==
              doctest::Approx(1.0 / (over * over * over)).epsilon(1e-14));
    }
    SUBCASE("ladder reports the leg asymmetry") {
        const RatioReport rep = ratio_analysis(make_ladder_ring(24, 10e-6, 5e-6, 1e-6));
        REQUIRE(rep.headline_ratio.has_value());
        CHECK(*rep.headline_ratio ==
              doctest::Approx(ladder_leg_asymmetry(24, 10e-6, 5e-6)).epsilon(1e-14));
    }
    SUBCASE("line distances fall off with the cube") {
        const RatioReport rep = ratio_analysis(make_line(5, 10e-6, 1e-6));
        CHECK_FALSE(rep.headline_ratio.has_value());
        CHECK(rep.nn_distance == doctest::Approx(10e-6).epsilon(1e-12));
        bool found_double = false;
        for (const auto& row : rep.rows) {
            if (std::abs(row.over_nn - 2.0) < 1e-9) {
                found_double = true;
                CHECK(std::abs(row.cubic_ratio - 0.125) < 1e-12);
            }
        }
        CHECK(found_double);
    }
    SUBCASE("needs at least two occupied sites") {
        const LatticeLayout one = make_line(1, 10e-6, 1e-6);
        CHECK_THROWS_AS((void)ratio_analysis(one), std::invalid_argument);
    }
}

TEST_CASE("layout JSON round-trips exactly") {
    LatticeLayout lay = make_ladder_ring(6, 10e-6, 5e-6, 2e-6);
    PinnedField pin;
    pin.axis = {1, 0, 0};
    pin.strength = 1e-28;
    lay = apply_defects(lay, {3}, {{5, pin}}, false);

    const std::string text = lay.to_json().dump();
    const LatticeLayout back = LatticeLayout::from_json(nlohmann::json::parse(text));

    CHECK(back.kind == lay.kind);
    CHECK(back.lattice_constant == lay.lattice_constant);
    CHECK(back.ion_height == lay.ion_height);
    REQUIRE(back.sites.size() == lay.sites.size());
    REQUIRE(back.coils.size() == lay.coils.size());
    for (std::size_t k = 0; k < lay.sites.size(); ++k) {
        CHECK(back.sites[k].index == lay.sites[k].index);
        CHECK(back.sites[k].position.x == lay.sites[k].position.x);
        CHECK(back.sites[k].position.y == lay.sites[k].position.y);
        CHECK(back.sites[k].position.z == lay.sites[k].position.z);
        CHECK(back.sites[k].occupied == lay.sites[k].occupied);
        CHECK(back.sites[k].trap_frequency.x == lay.sites[k].trap_frequency.x);
    }
    CHECK(back.coils[3].current == 0.0);
    REQUIRE(back.sites[5].pinned.has_value());
    CHECK(back.sites[5].pinned->strength == 1e-28);
    REQUIRE(back.ladder.has_value());
    CHECK(back.ladder->a2 == lay.ladder->a2);

    // a constants mismatch is rejected instead of silently reinterpreted
    nlohmann::json tampered = lay.to_json();
    tampered["constants"]["mu0"] = 1.3e-6;
    CHECK_THROWS_AS((void)LatticeLayout::from_json(tampered), ConfigError);

    nlohmann::json empty;
    empty["kind"] = "line";
    CHECK_THROWS_AS((void)LatticeLayout::from_json(empty), ConfigError);
}
