#pragma once

// Analysis configuration files.
//
// A config is a JSON object with the blocks "design" (required), "outcome",
// "overrun", "options", "eval" and "simulate". Parsing is strict: unknown
// keys, wrong types and out-of-range values raise ConfigError naming the
// offending field (and line and column for syntax errors). The key reference
// is in README.md.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "overrun/combine.hpp"
#include "overrun/design_eval.hpp"
#include "overrun/group_engine.hpp"
#include "overrun/linear_engine.hpp"

namespace overrun {

using Design = std::variant<LinearDesign, GroupDesign>;

enum class MethodChoice { Auto, Combination, Deletion, NoOverrun };

struct OptionsBlock {
    double level = 0.95;
    double delta0 = 0.0;
    bool two_sided = true;
    MethodChoice method = MethodChoice::Auto;
    EngineOptions engine;
};

enum class EvalMode { Coverage, Reversal };

struct EvalBlock {
    std::optional<EvalMode> mode;
    std::vector<double> gammas{0.5};
    std::vector<double> levels{0.9, 0.95};
    std::vector<double> delta_grid = drift_grid();
    FinalStage final_stage = FinalStage::Reschedule;
    // Reversal settings: t_o = c t, weighting rho, one-sided level alpha.
    double c = 0.2;
    double rho = 1.0;
    double alpha = 0.025;
};

struct SimulateBlock {
    double delta = 0.0;
    long long trials = 10000;
};

struct Config {
    Design design;
    std::optional<TrialOutcome> outcome;
    std::optional<OverrunData> overrun;
    OptionsBlock options;
    std::optional<EvalBlock> eval;
    std::optional<SimulateBlock> simulate;
};

// Parses config text; `source` names it in error messages.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

}  // namespace overrun
