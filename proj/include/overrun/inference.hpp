#pragma once

// Confidence bounds by inverting a family of p-values p(delta) that increases
// in the hypothesised drift: the bound at confidence gamma solves
// p(delta) = gamma. The median-unbiased estimate is the gamma = 0.5 bound and
// the equal-tail interval at level L uses gamma = (1 -+ L) / 2.

#include <functional>
#include <optional>
#include <string>

#include "overrun/combine.hpp"
#include "overrun/group_engine.hpp"
#include "overrun/linear_engine.hpp"

namespace overrun {

enum class Method { NoOverrun, Combination, CombinationGS, Deletion };

std::string to_string(Method m);

struct InferenceReport {
    double one_sided_p = 0.0;
    double two_sided_p = 0.0;
    double delta0 = 0.0;
    double level = 0.95;
    double delta_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double hr_hat = 0.0;
    double hr_lo = 0.0;
    double hr_hi = 0.0;
    Method method = Method::NoOverrun;
};

using PValueFamily = std::function<double(double)>;

struct BoundSearch {
    double start = 0.0;       // first guess, also the bracket centre
    double half_width = 5.0;  // initial bracket half width for the fallback
};

// Solves p(delta) = gamma. Newton steps on z(p(delta)) - z(gamma) with a
// forward difference of 1e-4 (at most 20), then bracketing on
// [start -+ half_width], widened to [-10, 10]. Throws NumericalError when
// no bracket is found.
double solve_bound(const PValueFamily& p_of_delta, double gamma, const BoundSearch& search = {});

struct AnalysisOptions {
    double level = 0.95;
    double delta0 = 0.0;
    EngineOptions engine;
};

// p-values, estimate and interval for a continuously monitored trial; with a
// non-empty overrun the weighted-Z combination is used.
InferenceReport analyze(const LinearDesign& design, const TrialOutcome& outcome,
                        const std::optional<OverrunData>& overrun, const AnalysisOptions& options = {});

// The same for a group-sequential trial stopped at (stage, x).
InferenceReport analyze(const GroupDesign& design, int stage, double x,
                        const std::optional<OverrunData>& overrun, const AnalysisOptions& options = {});

// Deletion method: the stopping analysis is replaced by one at t_k + t_o,
// earlier analyses unchanged, and the stagewise p-value is taken at x + y.
InferenceReport deletion_analyze(const GroupDesign& design, int stage, double x,
                                 const OverrunData& overrun, const AnalysisOptions& options = {});

// Report from an arbitrary p-value family.
InferenceReport invert(const PValueFamily& p_of_delta, const BoundSearch& search, Method method,
                       const AnalysisOptions& options);

}  // namespace overrun
