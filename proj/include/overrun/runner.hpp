#pragma once

// Glue between configs and the numerical modules, plus text rendering of
// the results for the command-line tool.

#include <cstdint>
#include <string>

#include "overrun/config.hpp"
#include "overrun/design_eval.hpp"
#include "overrun/inference.hpp"

namespace overrun {

enum class Format { Human, Machine, Csv };

Format parse_format(const std::string& name);

// Runs the analysis the config describes. Throws ConfigError when the
// outcome is missing or the requested method does not fit the design.
InferenceReport run_analysis(const Config& config);

CoverageReport run_coverage(const Config& config);
ReversalReport run_reversal(const Config& config);

struct SimulationSummary {
    double delta = 0.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    double upper_rate = 0.0;
    double lower_rate = 0.0;
    double final_rate = 0.0;
    double mean_time = 0.0;
    double time_sd = 0.0;
    // The same quantities from the numerical engines, for comparison.
    double upper_exact = 0.0;
    double lower_exact = 0.0;
    double mean_time_exact = 0.0;
    std::vector<TrialOutcome> outcomes;
};

SimulationSummary run_simulation(const Config& config, std::uint64_t seed);

std::string render(const InferenceReport& r, Format f, bool two_sided);
std::string render(const CoverageReport& r, Format f);
std::string render(const ReversalReport& r, Format f);
std::string render(const SimulationSummary& s, Format f);

}  // namespace overrun
