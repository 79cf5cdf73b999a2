#pragma once

// Weighted-Z combination of p-values, and its use for data that arrive after
// a sequential trial has stopped ("overrunning").
//
// Two independent p-values are combined as phi_bar(w1 z(p1) + w2 z(p2)) with
// w1^2 + w2^2 = 1. After stopping at information t with stagewise p-value
// p1, overrunning information t_o with increment y gives
//
//   p = phi_bar( [sqrt(t) z(p1) + sqrt(rho) (y - delta0 t_o)] / sqrt(t + rho t_o) )
//
// i.e. weights proportional to sqrt(t) and sqrt(rho t_o). rho = 1 uses the
// observed information; smaller rho down-weights the lagged data.

#include <optional>
#include <vector>

#include "overrun/group_engine.hpp"

namespace overrun {

struct WeightPair {
    double w1 = 0.0;
    double w2 = 0.0;

    // Weights with squares proportional to the two informations.
    static WeightPair from_information(double first, double second);
    // Throws InputError unless both are positive with w1^2 + w2^2 = 1.
    void validate() const;
};

// phi_bar(w1 z(p1) + w2 z(p2)). DomainError unless both p lie in (0, 1).
double combine_two(double p1, double p2, const WeightPair& w);

// Stage weights for repeated pairwise combination: row k (0-based) holds
// w_{k:0..k}, row 0 is {1}, and w_{k:i}^2 = w_{k-1:i}^2 (1 - w_{k:k}^2).
using StageWeights = std::vector<std::vector<double>>;

// Builds stage weights with squares proportional to the given informations.
StageWeights stage_weights_from_information(const std::vector<double>& information);

// Throws InputError when the rows break the recurrence or normalisation.
void check_stage_weights(const StageWeights& weights, std::size_t count);

// Combines p_1..p_K by applying combine_two stage by stage.
double combine_recursive(const std::vector<double>& ps, const StageWeights& weights);

// The same in one step: phi_bar(sum_i w_{K:i} z(p_i)) with the last row.
double combine_direct(const std::vector<double>& ps, const StageWeights& weights);

enum class OverrunModel {
    Constant,          // t_o = c
    SqrtProportional,  // t_o = c sqrt(t)
    Proportional,      // t_o = c t
    ObservedOnly,      // t_o as observed, no model
};

struct OverrunData {
    double t_o = 0.0;
    double y = 0.0;
    OverrunModel model = OverrunModel::ObservedOnly;
    std::optional<double> c;
    double rho = 1.0;

    // Overrun information the model assigns to stopping at information t.
    // Falls back to the observed t_o when the model has no coefficient.
    double information_at(double t) const;

    // Checks t_o >= 0, rho > 0 and, for the proportional model with a
    // coefficient, t_o == c t. Throws InputError.
    void validate(double t) const;
};

// The combination formula above. t_o == 0 returns p1 unchanged. p1 at 0 or 1
// (possible far from the data) maps to 0 or 1.
double combine_overrun(double p1, double t, double t_o, double y, double rho, double delta0);

// Continuous monitoring: p1 is the stagewise p-value at delta0.
double combine_overrun_linear(double p1, double t, const OverrunData& overrun, double delta0);

// Group-sequential monitoring. Stopping at an interim stage k < K combines
// the stagewise p-value at t_k with the overrun; at the final stage the
// overrun is absorbed into a rescheduled last analysis at t_K + t_o
// evaluated at x + y.
double combine_overrun_gs(const GroupDesign& design, int stage, double x, const OverrunData& overrun,
                          double delta0);

}  // namespace overrun
