#pragma once

// Brownian motion with drift monitored continuously against two straight
// boundaries u(t) = a_u + b_u t and l(t) = a_l + b_l t.
//
// The continuous-time problem is approximated by a Markov recursion over
// equal sub-steps of the time axis. At every sub-step the density of paths
// still inside the band is carried on a uniform Simpson grid spanning the
// band, propagated by the Gaussian transition kernel, and cut at the
// boundaries. Three treatments of the boundaries are available:
//
//   Bridge - the kernel is multiplied by the Brownian-bridge survival
//            probability against each line and the mass leaving the band is
//            the exact single-line first-passage probability over the step.
//            Exact for one line; the only neglected event is touching both
//            lines within one sub-step.
//   Shift  - discrete monitoring at the sub-step ends against boundaries
//            moved inward by 0.5826 sqrt(dt) (Siegmund's correction).
//   None   - plain discrete monitoring.

#include <cstdint>
#include <optional>
#include <vector>

namespace overrun {

enum class Boundary { Upper, Lower, Final };

enum class Continuity { Bridge, Shift, None };

// Default sub-step count over [0, t_max]. Reads OVERRUN_STEPS when set.
int default_steps();

struct EngineOptions {
    int steps = default_steps();
    Continuity continuity = Continuity::Bridge;
    int max_nodes = 801;
};

struct LinearDesign {
    double upper_intercept = 0.0;
    double upper_slope = 0.0;
    double lower_intercept = 0.0;
    double lower_slope = 0.0;
    double t_max = 0.0;

    // Boundaries that close at their intersection (triangular tests).
    static LinearDesign closed(double upper_intercept, double upper_slope, double lower_intercept,
                               double lower_slope);
    // Boundaries with forced termination at t_max.
    static LinearDesign truncated(double upper_intercept, double upper_slope,
                                  double lower_intercept, double lower_slope, double t_max);

    double upper(double t) const { return upper_intercept + upper_slope * t; }
    double lower(double t) const { return lower_intercept + lower_slope * t; }

    // True when the boundaries meet at t_max, so the stopping time is bounded
    // with no final region.
    bool closes() const;

    // Throws ConfigError on a degenerate design.
    void validate() const;
};

struct TrialOutcome {
    double time = 0.0;
    double value = 0.0;
    Boundary hit = Boundary::Upper;
    std::optional<int> stage;  // group designs only, 1-based
};

// Checks an outcome against the design and snaps near-boundary values onto
// the boundary. Throws InputError when inconsistent.
TrialOutcome checked_outcome(const LinearDesign& design, TrialOutcome outcome);

// Sub-step crossing masses of a single run of the recursion. Index i of the
// per-step vectors refers to the interval (time[i], time[i+1]].
struct CrossingTable {
    double delta = 0.0;
    std::vector<double> time;
    std::vector<double> upper_mass;
    std::vector<double> lower_mass;
    std::vector<double> upper_cum;  // size time.size(), upper_cum[0] == 0
    std::vector<double> lower_cum;

    // Density of paths still in the band at time.back(), on a uniform grid
    // [survivor_lo, survivor_lo + (n-1) survivor_step].
    double survivor_lo = 0.0;
    double survivor_step = 0.0;
    std::vector<double> survivor_density;

    int steps() const { return static_cast<int>(upper_mass.size()); }
    double end_time() const { return time.back(); }

    // P^U(t), P^L(t) with linear interpolation between grid times.
    double upper_at(double t) const;
    double lower_at(double t) const;

    double upper_total() const { return upper_cum.back(); }
    double lower_total() const { return lower_cum.back(); }
    double survivor_mass() const;
    // Survivor mass with X(end_time) >= x.
    double survivor_mass_above(double x) const;
};

// Runs the recursion over [0, t_max].
CrossingTable crossing_table(const LinearDesign& design, double delta,
                             const EngineOptions& options = {});

// Runs the recursion over [0, t_end] only, with the sub-step length of the
// full table (rounded so that t_end is a grid time).
CrossingTable crossing_table_until(const LinearDesign& design, double delta, double t_end,
                                   const EngineOptions& options = {});

// Stagewise p-value for H: drift = delta0 against larger drifts. Upper
// crossings are the most extreme (earlier more extreme), then final
// positions from high to low, then lower crossings with later ones more
// extreme than earlier ones.
double stagewise_p_linear(const LinearDesign& design, const TrialOutcome& outcome, double delta0,
                          const EngineOptions& options = {});

// E_delta(T). Paths still running at t_max count as stopping there.
double expected_stop_time(const LinearDesign& design, double delta,
                          const EngineOptions& options = {});
double expected_stop_time(const CrossingTable& table);

struct SimulationOptions {
    int steps = 1000;  // sub-steps over [0, t_max]
    Continuity continuity = Continuity::Bridge;
};

struct SimulationResult {
    std::vector<TrialOutcome> outcomes;

    double rate(Boundary hit) const;
    double mean_time() const;
    double time_sd() const;
    // Fraction of trials that hit the given boundary no later than t.
    double empirical_at(Boundary hit, double t) const;
};

// Euler path sampling on the sub-step grid with the same boundary treatment
// as the recursion. Deterministic for a given seed.
SimulationResult simulate_paths(const LinearDesign& design, double delta, std::int64_t n,
                                std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace overrun
