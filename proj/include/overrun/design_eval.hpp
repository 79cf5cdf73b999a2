#pragma once

// Operating characteristics of the combination method.
//
// Coverage. For an upper bound delta_hat_g at nominal confidence g, the true
// coverage at drift d is
//
//   q_g(d) = E_d Phi( (sqrt(T) z(p1(T, X; d)) - sqrt(T + rho T_o) z(g)) / sqrt(rho T_o) )
//
// where (T, X) is the stopping point, p1 the stagewise p-value and T_o the
// overrun information the model assigns to T. Since p1 is a function of the
// stopping point that is uniform under d, the expectation over one stage (or
// one time step) is an integral over an interval of p1 values, which is how
// it is evaluated here. Interval coverage is Q_L(d) = q_{(1+L)/2} - q_{(1-L)/2}.
//
// Reversals. With t_o = c t, a rejection on reaching the upper boundary
// turns into acceptance after the overrun with probability
//
//   Phi( sqrt((1 + rho c) / (rho c)) z_a - z(p1_0) / sqrt(rho c) - d sqrt(c t) )
//
// given the crossing, p1_0 being the stagewise p-value under drift 0. The
// reverse change uses lower stops and the upper tail.

#include <vector>

#include "overrun/combine.hpp"
#include "overrun/group_engine.hpp"
#include "overrun/linear_engine.hpp"

namespace overrun {

// How a group-sequential trial that reaches its last analysis is handled.
enum class FinalStage {
    Reschedule,  // final analysis moved to t_K + t_o (the modified p-value)
    Combine,     // combination at t_K like any other stage
};

// q_g(d) for several g at one drift. The overrun model supplies T_o(T) and
// rho; observed t_o and y are ignored.
std::vector<double> coverage_q(const LinearDesign& design, const OverrunData& model,
                               const std::vector<double>& gammas, double delta,
                               const EngineOptions& options = {});
std::vector<double> coverage_q(const GroupDesign& design, const OverrunData& model,
                               const std::vector<double>& gammas, double delta,
                               FinalStage final_stage = FinalStage::Reschedule);

double coverage_q(const LinearDesign& design, const OverrunData& model, double gamma, double delta,
                  const EngineOptions& options = {});
double coverage_q(const GroupDesign& design, const OverrunData& model, double gamma, double delta,
                  FinalStage final_stage = FinalStage::Reschedule);

double coverage_Q(const LinearDesign& design, const OverrunData& model, double level, double delta,
                  const EngineOptions& options = {});
double coverage_Q(const GroupDesign& design, const OverrunData& model, double level, double delta,
                  FinalStage final_stage = FinalStage::Reschedule);

// Integral of the coverage integrand over p1 in [p_lo, p_hi] for stopping
// information t and overrun information t_o.
double coverage_band(double p_lo, double p_hi, double t, double t_o, double rho, double gamma);

// Drift grid from lo to hi inclusive in steps of `step`.
std::vector<double> drift_grid(double lo = -2.5, double hi = 2.5, double step = 0.05);

struct CoverageReport {
    std::vector<double> delta_grid;
    std::vector<double> gammas;
    std::vector<double> levels;
    std::vector<std::vector<double>> q;  // [delta][gamma]
    std::vector<std::vector<double>> Q;  // [delta][level]
    std::vector<double> q_inf, q_sup;
    std::vector<double> Q_inf, Q_sup;
};

CoverageReport coverage_sweep(const LinearDesign& design, const OverrunData& model,
                              const std::vector<double>& gammas, const std::vector<double>& levels,
                              const std::vector<double>& delta_grid, const EngineOptions& options = {});
CoverageReport coverage_sweep(const GroupDesign& design, const OverrunData& model,
                              const std::vector<double>& gammas, const std::vector<double>& levels,
                              const std::vector<double>& delta_grid,
                              FinalStage final_stage = FinalStage::Reschedule);

struct Reversal {
    double reject_to_accept = 0.0;
    double accept_to_reject = 0.0;
    double power = 0.0;          // upper rejection probability without overrun
    double overrun_power = 0.0;  // power - R->A + A->R
};

// alpha is the one-sided level for drift 0. Linear designs integrate over
// the crossing densities; group designs over the interim stopping regions
// (an overrun after the last analysis is part of that analysis).
Reversal reversal_probs(const LinearDesign& design, double delta, double c, double rho, double alpha,
                        const EngineOptions& options = {});
Reversal reversal_probs(const GroupDesign& design, double delta, double c, double rho, double alpha);

double overrun_power(const LinearDesign& design, double delta, double c, double rho, double alpha,
                     const EngineOptions& options = {});
double overrun_power(const GroupDesign& design, double delta, double c, double rho, double alpha);

struct ReversalReport {
    std::vector<double> delta_grid;
    std::vector<Reversal> rows;
    double c = 0.0;
    double rho = 1.0;
    double alpha = 0.025;
};

ReversalReport reversal_sweep(const LinearDesign& design, const std::vector<double>& delta_grid, double c,
                              double rho, double alpha, const EngineOptions& options = {});
ReversalReport reversal_sweep(const GroupDesign& design, const std::vector<double>& delta_grid, double c,
                              double rho, double alpha);

}  // namespace overrun
