#include "microtrap/constants.hpp"
#include "microtrap/elliptic.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using microtrap::elliptic_KE;
using microtrap::kPi;

TEST_CASE("degenerate modulus gives the quarter circle") {
    const auto [K, E] = elliptic_KE(0.0);
    CHECK(K == doctest::Approx(kPi / 2.0).epsilon(1e-15));
    CHECK(E == doctest::Approx(kPi / 2.0).epsilon(1e-15));
}

TEST_CASE("half parameter reference values") {
    const auto [K, E] = elliptic_KE(0.5);
    CHECK(K == doctest::Approx(1.854075).epsilon(1e-6));
    CHECK(E == doctest::Approx(1.350644).epsilon(1e-6));
    CHECK(oracles::rel_err(K, oracles::K_ref(0.5)) < 1e-14);
    CHECK(oracles::rel_err(E, oracles::E_ref(0.5)) < 1e-14);
}

TEST_CASE("matches the standard-library special functions over the domain") {
    // Dense sweep plus hard cases near both endpoints. The reference is
    // parameterized by the modulus k = sqrt(m); past m = 0.999999 its own
    // k -> 1 - k^2 round trip dominates the comparison, so the bound there
    // reflects the reference, not the kernel.
    for (double m :
         {1e-300, 1e-16, 1e-8, 1e-4, 0.01, 0.1, 0.25, 0.5,  0.75,
          0.9,    0.99,  0.999, 0.999999, 1.0 - 1e-9, 1.0 - 1e-12}) {
        const auto [K, E] = elliptic_KE(m);
        CAPTURE(m);
        const double tol = m > 0.999999 ? 1e-10 : 1e-14;
        CHECK(oracles::rel_err(K, oracles::K_ref(m)) < tol);
        CHECK(oracles::rel_err(E, oracles::E_ref(m)) < tol);
    }
    auto gen = oracles::rng(0x5ca1ab1e);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double m = unif(gen);
        if (m >= 1.0) continue;
        CAPTURE(m);
        const auto [K, E] = elliptic_KE(m);
        CHECK(oracles::rel_err(K, oracles::K_ref(m)) < 1e-14);
        CHECK(oracles::rel_err(E, oracles::E_ref(m)) < 1e-14);
    }
}

TEST_CASE("limiting behavior toward the singular endpoint") {
    // K grows logarithmically, E tends to 1.
    const double K1 = elliptic_KE(1.0 - 1e-6).K;
    const double K2 = elliptic_KE(1.0 - 1e-12).K;
    CHECK(K2 > K1);
    CHECK(K2 == doctest::Approx(0.5 * std::log(16.0 / 1e-12)).epsilon(1e-6));
    CHECK(elliptic_KE(1.0 - 1e-12).E == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("monotonic in the parameter") {
    double prevK = elliptic_KE(0.0).K;
    double prevE = elliptic_KE(0.0).E;
    for (int i = 1; i <= 99; ++i) {
        const double m = i / 100.0;
        const auto [K, E] = elliptic_KE(m);
        CHECK(K > prevK);
        CHECK(E < prevE);
        prevK = K;
        prevE = E;
    }
}

TEST_CASE("Legendre relation holds at machine precision") {
    auto gen = oracles::rng(0xe111);
    std::uniform_real_distribution<double> unif(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 200; ++i) {
        const double m = unif(gen);
        const auto [K, E] = elliptic_KE(m);
        const auto [Kc, Ec] = elliptic_KE(1.0 - m);
        const double legendre = E * Kc + Ec * K - K * Kc;
        CAPTURE(m);
        CHECK(legendre == doctest::Approx(kPi / 2.0).epsilon(1e-13));
    }
}

TEST_CASE("rejects parameters outside the domain") {
    CHECK_THROWS_AS(elliptic_KE(-1e-16), std::domain_error);
    CHECK_THROWS_AS(elliptic_KE(-0.5), std::domain_error);
    CHECK_THROWS_AS(elliptic_KE(1.0), std::domain_error);
    CHECK_THROWS_AS(elliptic_KE(1.5), std::domain_error);
    CHECK_THROWS_AS(elliptic_KE(std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
    CHECK_THROWS_AS(elliptic_KE(std::numeric_limits<double>::infinity()),
                    std::domain_error);
}
