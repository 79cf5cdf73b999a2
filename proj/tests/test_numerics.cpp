#include <doctest.h>

#include <cmath>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"

using namespace overrun;

// Reference values computed with 40-digit mpmath (erfc and its root).

TEST_CASE("phi_bar matches high-precision values") {
    CHECK(phi_bar(0.0) == 0.5);
    CHECK(phi_bar(1.959964) == doctest::Approx(0.024999999096442404).epsilon(1e-12));
    CHECK(std::abs(phi_bar(0.5) - 0.30853753872598689636) < 1e-14);
    CHECK(std::abs(phi_bar(1.23) - 0.10934855242569194136) < 1e-14);
    CHECK(std::abs(phi_bar(-2.0) - 0.9772498680518207928) < 1e-14);
    CHECK(phi_bar(-0.5) + phi_bar(0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("phi_bar keeps relative accuracy in the upper tail") {
    const double z[] = {3.0, 6.0, 7.5, 8.0, 10.0};
    const double ref[] = {0.0013498980316300945267, 9.865876450376981407e-10, 3.1908916729108962278e-14,
                          6.2209605742717841235e-16, 7.619853024160526066e-24};
    for (int i = 0; i < 5; ++i) {
        CAPTURE(z[i]);
        CHECK(std::abs(phi_bar(z[i]) / ref[i] - 1.0) < 1e-6);
    }
}

TEST_CASE("phi_bar is strictly decreasing") {
    // Below about -5 the upper tail rounds to 1 in double precision.
    double prev = phi_bar(-5.0);
    for (int i = 1; i <= 10000; ++i) {
        const double z = -5.0 + 13.0 * i / 10000.0;
        const double v = phi_bar(z);
        REQUIRE(v < prev);
        prev = v;
    }
}

TEST_CASE("z_of matches high-precision quantiles") {
    CHECK(z_of(0.5) == 0.0);
    CHECK(std::abs(z_of(0.025) - 1.9599639845400542355) < 1e-9);
    CHECK(std::abs(z_of(0.975) + 1.9599639845400542355) < 1e-9);
    CHECK(std::abs(z_of(0.001) - 3.0902323061678135415) < 1e-9);
    CHECK(std::abs(z_of(1e-8) - 5.6120012441747881279) < 1e-9);
    CHECK(std::abs(z_of(0.3) - 0.52440051270804078404) < 1e-9);
}

TEST_CASE("z_of inverts phi_bar") {
    CHECK(std::abs(z_of(phi_bar(1.23)) - 1.23) < 1e-9);
    for (int i = 0; i <= 1300; ++i) {
        const double z = -5.0 + 0.01 * i;
        REQUIRE(std::abs(z_of(phi_bar(z)) - z) <= 1e-8);
    }
    for (double u : {1e-300, 1e-20, 1e-5, 0.2, 0.7, 0.9999}) {
        CAPTURE(u);
        CHECK(std::abs(phi_bar(z_of(u)) / u - 1.0) < 1e-9);
    }
}

TEST_CASE("z_of is strictly decreasing") {
    double prev = z_of(1e-6);
    for (int i = 1; i < 1000; ++i) {
        const double z = z_of(1e-6 + (1.0 - 2e-6) * i / 1000.0);
        REQUIRE(z < prev);
        prev = z;
    }
}

TEST_CASE("z_of rejects arguments outside (0, 1)") {
    CHECK_THROWS_AS(z_of(0.0), DomainError);
    CHECK_THROWS_AS(z_of(1.0), DomainError);
    CHECK_THROWS_AS(z_of(-0.1), DomainError);
    CHECK_THROWS_AS(z_of(1.5), DomainError);
    CHECK_THROWS_AS(z_of(std::nan("")), DomainError);
}

TEST_CASE("two-sided p doubles the smaller tail") {
    CHECK(two_sided(0.01) == doctest::Approx(0.02));
    CHECK(two_sided(0.99) == doctest::Approx(0.02));
    CHECK(two_sided(0.5) == 1.0);
    CHECK(two_sided(0.7) == doctest::Approx(0.6));
}
