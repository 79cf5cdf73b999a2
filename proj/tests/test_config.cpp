#include <doctest.h>

#include <string>

#include "overrun/config.hpp"
#include "overrun/errors.hpp"
#include "overrun/runner.hpp"

using namespace overrun;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "test.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kLinear = R"({
  "design": {"kind": "linear", "upper_intercept": 7.935, "upper_slope": 0.189,
             "lower_intercept": -7.935, "lower_slope": 0.566},
  "outcome": {"t": 12.037, "x": 10.210, "hit": "upper"},
  "overrun": {"t_o": 1.240, "y": 2.957},
  "options": {"level": 0.9, "steps": 500, "continuity": "shift"}
})";

}  // namespace

TEST_CASE("a full linear config parses") {
    const auto c = parse_config(kLinear);
    const auto& d = std::get<LinearDesign>(c.design);
    CHECK(d.upper_intercept == 7.935);
    CHECK(d.closes());
    REQUIRE(c.outcome);
    CHECK(c.outcome->hit == Boundary::Upper);
    CHECK(c.outcome->time == 12.037);
    REQUIRE(c.overrun);
    CHECK(c.overrun->y == 2.957);
    CHECK(c.options.level == 0.9);
    CHECK(c.options.engine.steps == 500);
    CHECK(c.options.engine.continuity == Continuity::Shift);
    CHECK_FALSE(c.eval);
}

TEST_CASE("unknown keys are named with their path") {
    const auto msg = error_of(R"({"design": {"kind": "linear", "upper_intercept": 1, "upper_slope": 0,
        "lower_intercept": -1, "lower_slope": 0, "t_max": 2, "uper": 3}})");
    CHECK(msg.find("design.uper") != std::string::npos);
    CHECK(error_of(R"({"design": {"kind": "obf", "stages": 3, "t_max": 5}, "extra": 1})").find("extra") !=
          std::string::npos);
}

TEST_CASE("out-of-range values are rejected") {
    const auto msg = error_of(R"({"design": {"kind": "obf", "stages": 3, "t_max": 5},
        "overrun": {"t_o": -1, "y": 0}})");
    CHECK(msg.find("overrun.t_o") != std::string::npos);
    CHECK(error_of(R"({"design": {"kind": "obf", "stages": 3, "t_max": 5}, "options": {"level": 1.2}})")
              .find("options.level") != std::string::npos);
    CHECK(error_of(R"({"design": {"kind": "obf", "stages": 3, "t_max": 5}, "options": {"method": "magic"}})")
              .find("options.method") != std::string::npos);
    CHECK(error_of(R"({"design": {"kind": "obf", "stages": "3", "t_max": 5}})").find("design.stages") !=
          std::string::npos);
    CHECK_FALSE(error_of(R"({"outcome": {"t": 1, "x": 1, "hit": "upper"}})").empty());
}

TEST_CASE("syntax errors report line and column") {
    const auto msg = error_of("{\n  \"design\": {\"kind\": \"linear\",,}\n}");
    CHECK(msg.find("test.json:2:") != std::string::npos);
}

TEST_CASE("O'Brien-Fleming design from a power requirement") {
    const auto c = parse_config(
        R"({"design": {"kind": "obf", "alpha": 0.05, "stages": 5, "power": 0.9, "power_delta": 1.0}})");
    const auto& d = std::get<GroupDesign>(c.design);
    REQUIRE(d.stages() == 5);
    CHECK(std::abs(d.times.back() - 10.781) < 0.02);
    CHECK(std::abs(d.continue_hi[0] - 6.6988) < 0.01);
}

TEST_CASE("explicit group design and stage outcome") {
    const auto c = parse_config(R"({
      "design": {"kind": "group", "times": [1, 2], "continue_lo": [-2.2], "continue_hi": [2.0],
                 "final_lo": -1.9, "final_hi": 2.1},
      "outcome": {"stage": 2, "x": 2.5},
      "eval": {"mode": "coverage", "gammas": [0.1, 0.5], "delta_grid": {"lo": -1, "hi": 1, "step": 0.5},
               "final_stage": "combine"}
    })");
    REQUIRE(c.outcome);
    CHECK(c.outcome->stage == 2);
    REQUIRE(c.eval);
    CHECK(c.eval->delta_grid.size() == 5);
    CHECK(c.eval->final_stage == FinalStage::Combine);
    CHECK(c.eval->gammas.size() == 2);
}

TEST_CASE("deletion needs a group design") {
    auto c = parse_config(std::string(kLinear));
    c.options.method = MethodChoice::Deletion;
    CHECK_THROWS_AS(run_analysis(c), ConfigError);
}

TEST_CASE("missing files are config errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
