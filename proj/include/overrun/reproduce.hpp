#pragma once

// Reference cases with known values: the MADIT and MADIT-II analyses,
// the group-sequential MADIT variant, and operating characteristics of a
// triangular and an O'Brien-Fleming design.

#include <string>
#include <vector>

#include "overrun/combine.hpp"
#include "overrun/group_engine.hpp"
#include "overrun/linear_engine.hpp"
#include "overrun/runner.hpp"

namespace overrun {

namespace cases {

// MADIT: u = 7.935 + 0.189 t, l = -7.935 + 0.566 t, upper hit at
// (12.037, 10.210), overrun (t_o, y) = (1.240, 2.957).
LinearDesign madit();
TrialOutcome madit_outcome();
OverrunData madit_overrun();

// MADIT-II: u = 11.77 + 0.1273 t, l = -11.77 + 0.3819 t, upper hit at
// (45.415, 17.551), overrun (0.483, 1.441).
LinearDesign madit2();
TrialOutcome madit2_outcome();
OverrunData madit2_overrun();

// Five-analysis O'Brien-Fleming version of MADIT: equally spaced with the
// third analysis at 12.037, two-sided level 0.05. Stops at stage 3 with
// x = 10.210.
GroupDesign madit_gs();

// Triangular test: intercepts +-5.99, slopes 0.25 (upper) and 0.75
// (lower), closing at t = 23.96.
LinearDesign triangular();

// O'Brien-Fleming: five equally spaced analyses to 10.781, |X| >= 6.6988.
GroupDesign obf();

}  // namespace cases

struct Check {
    std::string label;
    double value = 0.0;
    double lo = 0.0;  // accepted range
    double hi = 0.0;
    std::string expected;  // as printed

    bool pass() const { return value >= lo && value <= hi; }
};

struct CaseResult {
    std::string id;
    std::string title;
    std::vector<Check> checks;

    bool passed() const;
};

std::vector<std::string> reproduce_case_ids();

// Throws ConfigError for an unknown id.
CaseResult reproduce(const std::string& id, const EngineOptions& options = {});

std::string render(const CaseResult& r, Format f);

}  // namespace overrun
