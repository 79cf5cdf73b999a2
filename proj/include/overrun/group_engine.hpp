#pragma once

// Group-sequential monitoring of a Brownian motion with drift: analyses at
// times t_1 < ... < t_K, early stopping at stage k < K when X(t_k) leaves the
// continuation interval (lo_k, hi_k), and a final analysis at t_K.
//
// Stage densities follow the usual recursive numerical integration: the
// sub-density of X(t_k) over paths still continuing is carried on a Simpson
// grid over the continuation interval (clipped to +-8 sd of the free
// process) and convolved with the normal increment to the next analysis.

#include <cstdint>
#include <vector>

#include "overrun/linear_engine.hpp"

namespace overrun {

struct GroupDesign {
    std::vector<double> times;
    std::vector<double> continue_lo;  // stages 1..K-1
    std::vector<double> continue_hi;
    double final_lo = 0.0;  // X(t_K) <= final_lo rejects downward
    double final_hi = 0.0;  // X(t_K) >= final_hi rejects upward

    // |X(t_k)| >= c stops (and rejects) at every analysis.
    static GroupDesign symmetric(std::vector<double> times, double c);
    static std::vector<double> equally_spaced(int stages, double t_max);

    int stages() const { return static_cast<int>(times.size()); }
    double time(int stage) const { return times[static_cast<std::size_t>(stage - 1)]; }
    void validate() const;

    // Analyses 1..stage-1 unchanged, analysis `stage` moved to
    // t_stage + extra_time and made final. Used when overrunning data
    // replace the analysis that triggered stopping.
    GroupDesign rescheduled(int stage, double extra_time) const;
};

// Continuing sub-density after an early analysis, Simpson-weighted.
struct StageGrid {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> weighted;

    double at(std::size_t j) const { return lo + step * static_cast<double>(j); }
    double mass() const;
};

struct StageDensity {
    double delta = 0.0;
    std::vector<double> times;
    std::vector<double> upper_stop;  // per computed stage; at K the final rejections
    std::vector<double> lower_stop;
    std::vector<StageGrid> continuing;  // after stages 1..min(computed, K-1)
    int stages_total = 0;

    int computed() const { return static_cast<int>(upper_stop.size()); }
    // P(reach stage k).
    double reach(int stage) const;
    // P(reach stage k and X(t_k) >= x).
    double exceed(int stage, double x) const;
    // Sub-density of X(t_k) over paths reaching stage k.
    double arrival_density(int stage, double x) const;
    // Sum of upper stopping masses over stages before `stage`.
    double upper_before(int stage) const;
    // Mass accepted at the final analysis (between the final thresholds).
    double final_accept() const;
    double total_mass() const;
};

// Stage recursion through `through_stage` (all stages when 0).
StageDensity gs_stage_densities(const GroupDesign& design, double delta, int through_stage = 0);

// Stagewise-ordering p-value for H: drift = delta0 against larger drifts,
// at an outcome (stage, x):
//   p = sum_{j<k} P(stop upward at j) + P(reach k, X(t_k) >= x).
// For a downward stop this equals one minus the mass of outcomes ranked
// lower, so both sides share the formula.
double gs_stagewise_p(const GroupDesign& design, int stage, double x, double delta0);
double gs_stagewise_p(const StageDensity& density, int stage, double x);

// Checks (stage, x) against the design; throws InputError.
void check_group_outcome(const GroupDesign& design, int stage, double x);

// Probability of rejecting upward (sign > 0) or downward (sign < 0).
double rejection_probability(const GroupDesign& design, double delta, int sign);

// Constant c for which the symmetric design |X(t_k)| >= c has two-sided
// type I error alpha.
double obf_constant(const std::vector<double>& times, double alpha);

struct Horizon {
    double t_max = 0.0;
    double constant = 0.0;
    std::vector<double> times;
};

// Equally spaced symmetric design with two-sided level alpha and the given
// power at drift delta (rejection in the direction of delta).
Horizon required_horizon(int stages, double alpha, double power, double delta);

// Direct simulation of the analyses. Outcomes carry the stage; the final
// stage reports Upper/Lower when a final threshold is crossed.
std::vector<TrialOutcome> simulate_group(const GroupDesign& design, double delta, std::int64_t n,
                                         std::uint64_t seed);

}  // namespace overrun
