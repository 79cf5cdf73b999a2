#include <doctest.h>

#include <cmath>

#include "overrun/errors.hpp"
#include "overrun/linear_engine.hpp"
#include "overrun/numerics.hpp"
#include "overrun/reproduce.hpp"

using namespace overrun;

namespace {

// Single-line first passage P(max_{s<=t} X(s) - b s >= a), from the
// reflection principle.
double one_line(double a, double b, double delta, double t) {
    const double r = b - delta;
    return phi_bar((a + r * t) / std::sqrt(t)) + std::exp(-2.0 * a * r) * phi_bar((a - r * t) / std::sqrt(t));
}

}  // namespace

TEST_CASE("one-boundary reduction matches the reflection formula") {
    // Values from 40-digit mpmath evaluation of one_line.
    struct Case {
        double delta, t, ref;
    };
    const Case cases[] = {{0.0, 0.5, 0.157299207050285}, {0.0, 1.0, 0.317310507862914},
                          {0.0, 2.0, 0.479500122186953}, {0.0, 5.0, 0.654720846018577},
                          {0.5, 0.5, 0.249211773341739}, {0.5, 1.0, 0.49013833994533},
                          {0.5, 2.0, 0.713791788077904}, {0.5, 5.0, 0.908565379489319}};
    for (const auto& c : cases) {
        CAPTURE(c.delta);
        CAPTURE(c.t);
        const auto d = LinearDesign::truncated(1.0, 0.0, -1e6, 0.0, c.t);
        const auto table = crossing_table(d, c.delta);
        CHECK(std::abs(table.upper_total() - c.ref) < 2e-4);
        CHECK(std::abs(one_line(1.0, 0.0, c.delta, c.t) - c.ref) < 1e-12);
    }
    const auto sloped = LinearDesign::truncated(2.0, 0.3, -1e6, 0.0, 3.0);
    CHECK(std::abs(crossing_table(sloped, 0.7).upper_total() - 0.482244093911633) < 2e-4);
}

TEST_CASE("two horizontal boundaries match the gambler's ruin formulas") {
    // Lines +1 and -2 with a horizon long enough that survivors are ~1e-7.
    const double a = 1.0, b = 2.0;
    const auto d = LinearDesign::truncated(a, 0.0, -b, 0.0, 40.0);
    for (double delta : {-0.4, 0.0, 0.3}) {
        CAPTURE(delta);
        const double ref = delta == 0.0 ? b / (a + b)
                                        : (1.0 - std::exp(2.0 * delta * b)) /
                                              (std::exp(-2.0 * delta * a) - std::exp(2.0 * delta * b));
        const auto table = crossing_table(d, delta);
        CHECK(std::abs(table.upper_total() - ref) < 2e-4);
    }
    // E(T) = a b at zero drift.
    CHECK(std::abs(expected_stop_time(d, 0.0) - a * b) < 2e-3);
}

TEST_CASE("crossing masses of a closing design sum to one") {
    const auto d = cases::triangular();
    for (double delta : {-1.0, 0.0, 0.5, 1.0}) {
        CAPTURE(delta);
        const auto t = crossing_table(d, delta);
        CHECK(std::abs(t.upper_total() + t.lower_total() - 1.0) < 1e-4);
        for (int i = 0; i < t.steps(); ++i) {
            REQUIRE(t.upper_mass[static_cast<std::size_t>(i)] >= 0.0);
            REQUIRE(t.lower_mass[static_cast<std::size_t>(i)] >= 0.0);
            REQUIRE(t.upper_cum[static_cast<std::size_t>(i + 1)] >= t.upper_cum[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("halving the sub-step barely moves the upper crossing probability") {
    const auto d = cases::triangular();
    EngineOptions coarse, fine;
    coarse.steps = 1000;
    fine.steps = 2000;
    for (double delta : {0.0, 0.8233}) {
        CHECK(std::abs(crossing_table(d, delta, coarse).upper_total() -
                       crossing_table(d, delta, fine).upper_total()) <= 2e-4);
    }
}

TEST_CASE("paths start inside the band") {
    const auto t = crossing_table(cases::triangular(), 0.5);
    CHECK(t.upper_at(0.0) == 0.0);
    CHECK(t.upper_at(1e-3) < 1e-9);
    CHECK(t.lower_at(1e-3) < 1e-9);
}

TEST_CASE("triangular test operating characteristics") {
    const auto d = cases::triangular();
    CHECK(std::abs(crossing_table(d, 0.0).upper_total() - 0.025) < 0.001);
    CHECK(std::abs(crossing_table(d, 1.0).lower_total() - 0.025) < 0.001);
    CHECK(std::abs(expected_stop_time(d, 0.0) - 7.776) < 0.02);
    CHECK(std::abs(expected_stop_time(d, 0.8233) - 9.382) < 0.02);
    CHECK(std::abs(expected_stop_time(d, 0.5) - 11.217) < 0.02);
}

TEST_CASE("other boundary treatments stay close to the bridge result") {
    const auto d = cases::triangular();
    EngineOptions shift, none;
    shift.continuity = Continuity::Shift;
    none.continuity = Continuity::None;
    const double bridge = crossing_table(d, 0.0).upper_total();
    CHECK(std::abs(crossing_table(d, 0.0, shift).upper_total() - bridge) < 5e-4);
    // Plain discrete monitoring misses crossings between sub-steps.
    CHECK(crossing_table(d, 0.0, none).upper_total() < bridge);
}

TEST_CASE("stagewise p for an upper crossing") {
    const auto d = cases::madit();
    const auto o = cases::madit_outcome();
    const double p = stagewise_p_linear(d, o, 0.0);
    CHECK(std::abs(p - 0.0042) < 0.0002);
    CHECK(stagewise_p_linear(d, o, 0.5) > p);
    CHECK(stagewise_p_linear(d, o, 6.0) > 0.999);
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double v = stagewise_p_linear(d, o, -1.0 + 3.0 * i / 49.0);
        REQUIRE(v > prev);
        prev = v;
    }
}

TEST_CASE("lower crossings rank below every upper crossing, later ones lower") {
    const auto d = cases::triangular();
    const double up_total = crossing_table(d, 0.0).upper_total();
    const TrialOutcome early{2.0, d.lower(2.0), Boundary::Lower, {}};
    const TrialOutcome late{10.0, d.lower(10.0), Boundary::Lower, {}};
    const double p_early = stagewise_p_linear(d, early, 0.0);
    const double p_late = stagewise_p_linear(d, late, 0.0);
    CHECK(p_early > up_total);
    CHECK(p_late < p_early);
    CHECK(p_early == doctest::Approx(1.0 - crossing_table_until(d, 0.0, 2.0).lower_total()).epsilon(1e-12));
}

TEST_CASE("final-region p for a truncated design") {
    const auto d = LinearDesign::truncated(3.0, 0.0, -3.0, 0.0, 4.0);
    const auto table = crossing_table(d, 0.0);
    const TrialOutcome hi{4.0, 2.0, Boundary::Final, {}};
    const TrialOutcome lo{4.0, -2.0, Boundary::Final, {}};
    const double p_hi = stagewise_p_linear(d, hi, 0.0);
    const double p_lo = stagewise_p_linear(d, lo, 0.0);
    CHECK(p_hi > table.upper_total());
    CHECK(p_lo > p_hi);
    // Symmetric design at zero drift.
    CHECK(p_hi + p_lo == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("outcomes are checked against the design") {
    const auto d = cases::madit();
    CHECK_THROWS_AS(checked_outcome(d, {12.037, 9.0, Boundary::Upper, {}}), InputError);
    CHECK_THROWS_AS(checked_outcome(d, {12.037, 10.21, Boundary::Final, {}}), InputError);
    CHECK_THROWS_AS(checked_outcome(d, {-1.0, 0.0, Boundary::Upper, {}}), InputError);
    const auto snapped = checked_outcome(d, {12.037, 10.2102, Boundary::Upper, {}});
    CHECK(snapped.value == doctest::Approx(d.upper(12.037)).epsilon(1e-14));
}

TEST_CASE("degenerate designs and options are rejected") {
    CHECK_THROWS_AS(LinearDesign::closed(1.0, 0.0, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(LinearDesign::closed(1.0, 0.5, -1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(LinearDesign::truncated(1.0, 0.0, -1.0, 0.0, -2.0), ConfigError);
    EngineOptions few;
    few.steps = 50;
    CHECK_THROWS_AS(crossing_table(cases::triangular(), 0.0, few), ConfigError);
}

TEST_CASE("simulation is deterministic and agrees with the recursion") {
    const auto d = cases::triangular();
    const auto a = simulate_paths(d, 0.0, 1000, 42);
    const auto b = simulate_paths(d, 0.0, 1000, 42);
    REQUIRE(a.outcomes.size() == b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) REQUIRE(a.outcomes[i].time == b.outcomes[i].time);

    const std::int64_t n = 1000000;
    const auto sim = simulate_paths(d, 0.0, n, 2024);
    const double p = crossing_table(d, 0.0).upper_total();
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(sim.rate(Boundary::Upper) - p) < 3.0 * se);
    const double se_t = sim.time_sd() / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sim.mean_time() - expected_stop_time(d, 0.0)) < 3.0 * se_t);
}
