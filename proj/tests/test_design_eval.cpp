#include <doctest.h>

#include <cmath>

#include "overrun/design_eval.hpp"
#include "overrun/errors.hpp"
#include "overrun/reproduce.hpp"

using namespace overrun;

namespace {

OverrunData model(OverrunModel m, double c, double rho = 1.0) {
    OverrunData o;
    o.model = m;
    o.c = c;
    o.rho = rho;
    return o;
}

}  // namespace

TEST_CASE("coverage band against quadrature") {
    // mpmath quadrature of P(combined p < gamma) over uniform p1 in the band.
    CHECK(std::abs(coverage_band(0.1, 0.4, 2.0, 0.5, 1.0, 0.3) - 0.173037661665468) < 1e-10);
    CHECK(std::abs(coverage_band(0.001, 0.05, 10.0, 0.2, 0.5, 0.025) - 0.0239983402060686) < 1e-10);
    CHECK(coverage_band(0.2, 0.2, 2.0, 0.5, 1.0, 0.3) == 0.0);
    // Without overrun the band contributes its p1-length below gamma.
    CHECK(coverage_band(0.1, 0.4, 2.0, 0.0, 1.0, 0.3) == doctest::Approx(0.2));
}

TEST_CASE("proportional overrun gives exact coverage") {
    const auto tri = cases::triangular();
    const auto prop = model(OverrunModel::Proportional, 0.3);
    for (double delta : {-1.0, 0.0, 0.4, 1.5}) {
        const auto q = coverage_q(tri, prop, {0.025, 0.5, 0.975}, delta);
        CHECK(std::abs(q[0] - 0.025) < 1e-3);
        CHECK(std::abs(q[1] - 0.5) < 1e-3);
        CHECK(std::abs(q[2] - 0.975) < 1e-3);
    }
    const auto obf = cases::obf();
    for (double delta : {-0.7, 0.0, 0.9}) {
        const auto q = coverage_q(obf, model(OverrunModel::Proportional, 0.1), {0.025, 0.5}, delta, FinalStage::Combine);
        CHECK(std::abs(q[0] - 0.025) < 1e-4);
        CHECK(std::abs(q[1] - 0.5) < 1e-4);
    }
}

TEST_CASE("no overrun information: q equals gamma") {
    const auto none = model(OverrunModel::Constant, 0.0);
    CHECK(std::abs(coverage_q(cases::triangular(), none, 0.3, 0.6) - 0.3) < 1e-3);
    CHECK(std::abs(coverage_q(cases::obf(), none, 0.3, 0.6) - 0.3) < 1e-4);
}

TEST_CASE("constant overrun on the triangular design stays near nominal") {
    const auto tri = cases::triangular();
    const auto grid = drift_grid(-2.5, 2.5, 0.25);
    const auto r = coverage_sweep(tri, model(OverrunModel::Constant, 0.5), {0.5}, {0.9, 0.95}, grid);
    REQUIRE(r.q.size() == grid.size());
    CHECK(r.q_inf[0] > 0.468);
    CHECK(r.q_sup[0] < 0.532);
    CHECK(r.Q_inf[0] > 0.895);
    CHECK(r.Q_sup[0] < 0.921);
    CHECK(r.Q_inf[1] > 0.947);
    CHECK(r.Q_sup[1] < 0.962);
}

TEST_CASE("symmetric design: q(delta) + q(-delta) with gamma and 1-gamma") {
    const auto obf = cases::obf();
    const auto m = model(OverrunModel::Constant, 0.5);
    for (double delta : {0.3, 1.1}) {
        const double a = coverage_q(obf, m, 0.2, delta);
        const double b = coverage_q(obf, m, 0.8, -delta);
        CHECK(std::abs(a + b - 1.0) < 1e-6);
    }
}

TEST_CASE("Q is the difference of two q values") {
    const auto tri = cases::triangular();
    const auto m = model(OverrunModel::SqrtProportional, 0.4);
    const auto q = coverage_q(tri, m, {0.05, 0.95}, 0.3);
    CHECK(coverage_Q(tri, m, 0.9, 0.3) == doctest::Approx(q[1] - q[0]).epsilon(1e-12));
}

TEST_CASE("drift grid") {
    const auto g = drift_grid(-2.5, 2.5, 0.05);
    REQUIRE(g.size() == 101);
    CHECK(g.front() == -2.5);
    CHECK(g.back() == doctest::Approx(2.5));
    CHECK(std::abs(g[50]) < 1e-12);
    CHECK_THROWS_AS(drift_grid(1.0, 0.0, 0.1), ConfigError);
}

TEST_CASE("reversal probabilities") {
    const auto tri = cases::triangular();
    const auto r = reversal_probs(tri, 0.5, 0.2, 1.0, 0.025);
    CHECK(r.reject_to_accept >= 0.0);
    CHECK(r.reject_to_accept <= r.power);
    CHECK(r.accept_to_reject >= 0.0);
    CHECK(r.accept_to_reject <= 1.0 - r.power);
    CHECK(r.overrun_power == doctest::Approx(r.power - r.reject_to_accept + r.accept_to_reject).epsilon(1e-14));
    CHECK(std::abs(r.reject_to_accept - 0.0793) < 0.002);
    CHECK(std::abs(r.accept_to_reject - 0.0791) < 0.002);

    CHECK_THROWS_AS(reversal_probs(tri, 0.5, 0.0, 1.0, 0.025), ConfigError);
    const auto tiny = reversal_probs(tri, 0.5, 0.2, 1e-10, 0.025);
    CHECK(tiny.reject_to_accept < 1e-3);
    CHECK(tiny.accept_to_reject < 1e-3);
}

TEST_CASE("reversals shrink as the overrun weight decreases") {
    const auto tri = cases::triangular();
    double prev = 1.0;
    for (double rho : {1.0, 0.5, 0.1, 0.01}) {
        const double ra = reversal_probs(tri, 0.5, 0.2, rho, 0.025).reject_to_accept;
        CHECK(ra < prev);
        prev = ra;
    }
}

TEST_CASE("overrun power under the null stays at the level") {
    CHECK(overrun_power(cases::triangular(), 0.0, 0.2, 1.0, 0.025) <= 0.025 + 2e-3);
    const auto g = reversal_probs(cases::obf(), 0.0, 0.3, 1.0, 0.025);
    CHECK(g.overrun_power <= 0.025 + 2e-3);
    CHECK(g.overrun_power == doctest::Approx(g.power - g.reject_to_accept + g.accept_to_reject).epsilon(1e-14));
}
