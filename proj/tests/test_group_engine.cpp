#include <doctest.h>

#include <cmath>
#include <random>

#include "overrun/errors.hpp"
#include "overrun/group_engine.hpp"
#include "overrun/numerics.hpp"
#include "overrun/reproduce.hpp"

using namespace overrun;

namespace {

// Two analyses at t = 1, 2; continue while -2.2 < X(1) < 2.0; reject at the
// end when X(2) >= 2.1 or X(2) <= -1.9.
GroupDesign two_stage() {
    GroupDesign d;
    d.times = {1.0, 2.0};
    d.continue_lo = {-2.2};
    d.continue_hi = {2.0};
    d.final_lo = -1.9;
    d.final_hi = 2.1;
    return d;
}

}  // namespace

TEST_CASE("a single analysis reduces to the normal tail") {
    const auto d = GroupDesign::symmetric({4.0}, 3.0);
    for (double delta : {-0.5, 0.0, 0.7}) {
        const auto dens = gs_stage_densities(d, delta);
        CHECK(dens.upper_stop[0] == doctest::Approx(phi_bar((3.0 - 4.0 * delta) / 2.0)).epsilon(1e-14));
        CHECK(gs_stagewise_p(d, 1, 2.5, delta) == doctest::Approx(phi_bar((2.5 - 4.0 * delta) / 2.0)).epsilon(1e-14));
    }
}

TEST_CASE("two-stage masses match direct integration") {
    // Reference values: mpmath quadrature of the bivariate normal.
    const auto d0 = gs_stage_densities(two_stage(), 0.0);
    CHECK(std::abs(d0.upper_stop[0] - 0.0227501319481792) < 1e-12);
    CHECK(std::abs(d0.lower_stop[0] - 0.0139034475134986) < 1e-12);
    CHECK(std::abs(d0.upper_stop[1] - 0.0551420554720054) < 1e-8);
    CHECK(std::abs(d0.lower_stop[1] - 0.0793834499140261) < 1e-8);
    const auto d4 = gs_stage_densities(two_stage(), 0.4);
    CHECK(std::abs(d4.upper_stop[0] - 0.054799291699558) < 1e-12);
    CHECK(std::abs(d4.lower_stop[0] - 0.00466118802371875) < 1e-12);
    CHECK(std::abs(d4.upper_stop[1] - 0.137883727101224) < 1e-8);
    CHECK(std::abs(d4.lower_stop[1] - 0.0254176739552272) < 1e-8);
    CHECK(std::abs(gs_stagewise_p(two_stage(), 2, 2.5, 0.0) - 0.0510871682097112) < 1e-8);
}

TEST_CASE("stage masses sum to one") {
    const auto d = cases::obf();
    for (double delta : {-1.0, 0.0, 1.0}) {
        CAPTURE(delta);
        CHECK(std::abs(gs_stage_densities(d, delta).total_mass() - 1.0) < 1e-6);
    }
}

TEST_CASE("O'Brien-Fleming design has the nominal level") {
    const auto d = cases::obf();
    const double level = rejection_probability(d, 0.0, 1) + rejection_probability(d, 0.0, -1);
    CHECK(std::abs(level - 0.05) < 0.001);
}

TEST_CASE("O'Brien-Fleming constant") {
    const auto times = GroupDesign::equally_spaced(5, 10.781);
    const double c = obf_constant(times, 0.05);
    CHECK(std::abs(c - 6.6988) < 0.003);
    CHECK(std::abs(c / std::sqrt(10.781) - 2.040) < 0.001);
    CHECK(obf_constant({3.0}, 0.05) == doctest::Approx(z_of(0.025) * std::sqrt(3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(obf_constant(times, 1.5), DomainError);
}

TEST_CASE("horizon for a target power") {
    const auto h = required_horizon(5, 0.05, 0.9, 1.0);
    CHECK(std::abs(h.t_max - 10.781) < 0.02);
    CHECK(h.times.size() == 5);
    CHECK(std::abs(rejection_probability(GroupDesign::symmetric(h.times, h.constant), 1.0, 1) - 0.9) < 1e-8);
    const auto one = required_horizon(1, 0.05, 0.8, 0.5);
    const double fixed = std::pow(z_of(0.025) + z_of(0.2), 2) / 0.25;
    CHECK(one.t_max == doctest::Approx(fixed).epsilon(1e-14));
    // Negative drift: power against smaller drifts.
    CHECK(required_horizon(5, 0.05, 0.9, -1.0).t_max == doctest::Approx(h.t_max).epsilon(1e-6));
    CHECK_THROWS_AS(required_horizon(5, 0.9, 0.5, 1.0), DomainError);
}

TEST_CASE("group-sequential MADIT stagewise p") {
    const auto d = cases::madit_gs();
    const double p = gs_stagewise_p(d, 3, 10.210, 0.0);
    CHECK(std::abs(two_sided(p) - 0.0039) < 0.0003);
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double v = gs_stagewise_p(d, 3, 10.210, -1.0 + 3.0 * i / 49.0);
        REQUIRE(v > prev);
        prev = v;
    }
}

TEST_CASE("stagewise p is continuous in x within a stage") {
    const auto d = cases::obf();
    for (double x : {7.0, 9.5, -7.5}) {
        const auto k = 2;
        CHECK(std::abs(gs_stagewise_p(d, k, x, 0.2) - gs_stagewise_p(d, k, x + 1e-9, 0.2)) <= 1e-8);
    }
}

TEST_CASE("symmetric design at zero drift: p(x) + p(-x) = 1") {
    const auto d = cases::obf();
    for (int k = 1; k <= 5; ++k) {
        const double x = k < 5 ? 7.3 : 2.0;
        CAPTURE(k);
        CHECK(std::abs(gs_stagewise_p(d, k, x, 0.0) + gs_stagewise_p(d, k, -x, 0.0) - 1.0) < 1e-6);
    }
}

TEST_CASE("outcomes inside a continuation interval are rejected") {
    const auto d = cases::obf();
    CHECK_THROWS_AS(gs_stagewise_p(d, 2, 1.0, 0.0), InputError);
    CHECK_THROWS_AS(gs_stagewise_p(d, 6, 9.0, 0.0), InputError);
    CHECK_NOTHROW(gs_stagewise_p(d, 5, 1.0, 0.0));
}

TEST_CASE("design validation") {
    GroupDesign d = two_stage();
    d.times = {2.0, 1.0};
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = two_stage();
    d.continue_lo = {3.0};
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = two_stage();
    d.continue_hi.clear();
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("rescheduling keeps earlier analyses") {
    const auto d = cases::obf();
    const auto r = d.rescheduled(3, 1.5);
    REQUIRE(r.stages() == 3);
    CHECK(r.time(1) == d.time(1));
    CHECK(r.time(2) == d.time(2));
    CHECK(r.time(3) == doctest::Approx(d.time(3) + 1.5));
    CHECK(r.continue_hi.size() == 2);
    CHECK(r.final_hi == d.continue_hi[2]);
    CHECK_THROWS_AS(d.rescheduled(3, -1.0), InputError);
}

TEST_CASE("three-stage recursion against brute-force simulation") {
    GroupDesign d;
    d.times = {1.0, 2.5, 4.0};
    d.continue_lo = {-2.0, -1.0};
    d.continue_hi = {2.5, 2.8};
    d.final_lo = 0.5;
    d.final_hi = 3.2;
    const double delta = 0.3;
    const auto dens = gs_stage_densities(d, delta);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    const int n = 400000;
    std::vector<int> up(3), down(3);
    for (int i = 0; i < n; ++i) {
        double x = 0.0, prev = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double t = d.times[static_cast<std::size_t>(k)];
            x += delta * (t - prev) + std::sqrt(t - prev) * z(rng);
            prev = t;
            const double hi = k < 2 ? d.continue_hi[static_cast<std::size_t>(k)] : d.final_hi;
            const double lo = k < 2 ? d.continue_lo[static_cast<std::size_t>(k)] : d.final_lo;
            if (x >= hi) {
                ++up[static_cast<std::size_t>(k)];
                break;
            }
            if (x <= lo) {
                ++down[static_cast<std::size_t>(k)];
                break;
            }
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        for (const auto& [count, exact] : {std::pair{up[k], dens.upper_stop[k]}, std::pair{down[k], dens.lower_stop[k]}}) {
            const double rate = static_cast<double>(count) / n;
            const double se = std::sqrt(exact * (1.0 - exact) / n);
            CHECK(std::abs(rate - exact) < 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("group simulation reports stages") {
    const auto d = cases::obf();
    const auto a = simulate_group(d, 0.5, 2000, 3);
    const auto b = simulate_group(d, 0.5, 2000, 3);
    REQUIRE(a.size() == 2000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].stage);
        REQUIRE(a[i].value == b[i].value);
        if (*a[i].stage < 5) REQUIRE(std::abs(a[i].value) >= 6.6988);
    }
}
