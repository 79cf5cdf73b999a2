#include "overrun/inference.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"

namespace overrun {

namespace {

constexpr double kDifference = 1e-4;
constexpr int kMaxNewton = 20;
constexpr double kWideLimit = 10.0;

bool interior(double p) { return p > 0.0 && p < 1.0; }

std::optional<double> newton(const PValueFamily& p_of_delta, double gamma, double start) {
    const double target = z_of(gamma);
    double delta = start;
    for (int i = 0; i < kMaxNewton; ++i) {
        const double p = p_of_delta(delta);
        if (!interior(p)) return std::nullopt;
        const double f = z_of(p) - target;
        if (f == 0.0) return delta;
        const double p_eps = p_of_delta(delta + kDifference);
        if (!interior(p_eps)) return std::nullopt;
        const double slope = (z_of(p_eps) - target - f) / kDifference;
        if (!(slope < 0.0)) return std::nullopt;
        const double next = delta - f / slope;
        if (!std::isfinite(next) || std::abs(next) > kWideLimit) return std::nullopt;
        if (std::abs(next - delta) <= 1e-13 * std::max(1.0, std::abs(delta))) return next;
        delta = next;
    }
    return std::nullopt;
}

double bracketed(const PValueFamily& p_of_delta, double gamma, const BoundSearch& search) {
    auto f = [&](double d) { return p_of_delta(d) - gamma; };
    double lo = search.start - search.half_width;
    double hi = search.start + search.half_width;
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
        lo = std::min(lo, -kWideLimit);
        hi = std::max(hi, kWideLimit);
        f_lo = f(lo);
        f_hi = f(hi);
        if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
            throw NumericalError("confidence bound not bracketed within drift [-10, 10]");
        }
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    boost::uintmax_t iterations = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(50),
                                                     iterations);
    return 0.5 * (r.first + r.second);
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::NoOverrun:
            return "no-overrun";
        case Method::Combination:
            return "combination";
        case Method::CombinationGS:
            return "combination-gs";
        case Method::Deletion:
            return "deletion";
    }
    return "unknown";
}

double solve_bound(const PValueFamily& p_of_delta, double gamma, const BoundSearch& search) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("confidence coefficient must lie in (0, 1)");
    if (auto d = newton(p_of_delta, gamma, search.start)) {
        // Newton can stall on a plateau of the discretised p; only accept a
        // root that is one to the accuracy the callers rely on.
        if (std::abs(p_of_delta(*d) - gamma) <= 1e-9) return *d;
    }
    return bracketed(p_of_delta, gamma, search);
}

InferenceReport invert(const PValueFamily& p_of_delta, const BoundSearch& search, Method method,
                       const AnalysisOptions& options) {
    if (!(options.level > 0.0 && options.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
    InferenceReport r;
    r.method = method;
    r.level = options.level;
    r.delta0 = options.delta0;
    r.one_sided_p = p_of_delta(options.delta0);
    r.two_sided_p = two_sided(r.one_sided_p);

    const double tail = 0.5 * (1.0 - options.level);
    r.delta_hat = solve_bound(p_of_delta, 0.5, search);
    // half_width is 5 standard errors, so this offsets by z(tail) of them.
    const double offset = z_of(tail) * search.half_width / 5.0;
    r.ci_lo = solve_bound(p_of_delta, tail, BoundSearch{r.delta_hat - offset, search.half_width});
    r.ci_hi = solve_bound(p_of_delta, 1.0 - tail, BoundSearch{r.delta_hat + offset, search.half_width});
    r.hr_hat = std::exp(-r.delta_hat);
    r.hr_lo = std::exp(-r.ci_hi);
    r.hr_hi = std::exp(-r.ci_lo);
    return r;
}

InferenceReport analyze(const LinearDesign& design, const TrialOutcome& outcome,
                        const std::optional<OverrunData>& overrun, const AnalysisOptions& options) {
    const auto checked = checked_outcome(design, outcome);
    const bool lagged = overrun && overrun->t_o > 0.0;
    if (overrun) overrun->validate(checked.time);

    PValueFamily p;
    double info = checked.time;
    double position = checked.value;
    if (lagged) {
        const OverrunData data = *overrun;
        p = [design, checked, data, engine = options.engine](double d) {
            return combine_overrun_linear(stagewise_p_linear(design, checked, d, engine), checked.time, data, d);
        };
        info += data.t_o;
        position += data.y;
    } else {
        p = [design, checked, engine = options.engine](double d) {
            return stagewise_p_linear(design, checked, d, engine);
        };
    }
    BoundSearch search{position / info, 5.0 / std::sqrt(info)};
    return invert(p, search, lagged ? Method::Combination : Method::NoOverrun, options);
}

InferenceReport analyze(const GroupDesign& design, int stage, double x,
                        const std::optional<OverrunData>& overrun, const AnalysisOptions& options) {
    check_group_outcome(design, stage, x);
    const double t = design.time(stage);
    if (overrun) overrun->validate(t);
    const bool lagged = overrun && (overrun->t_o > 0.0 || overrun->y != 0.0);

    PValueFamily p;
    double info = t;
    double position = x;
    if (lagged) {
        const OverrunData data = *overrun;
        p = [design, stage, x, data](double d) { return combine_overrun_gs(design, stage, x, data, d); };
        info += data.t_o;
        position += data.y;
    } else {
        p = [design, stage, x](double d) { return gs_stagewise_p(design, stage, x, d); };
    }
    BoundSearch search{position / info, 5.0 / std::sqrt(info)};
    return invert(p, search, lagged ? Method::CombinationGS : Method::NoOverrun, options);
}

InferenceReport deletion_analyze(const GroupDesign& design, int stage, double x,
                                 const OverrunData& overrun, const AnalysisOptions& options) {
    check_group_outcome(design, stage, x);
    overrun.validate(design.time(stage));
    const auto late = design.rescheduled(stage, overrun.t_o);
    const double moved = x + overrun.y;
    auto p = [late, stage, moved](double d) { return gs_stagewise_p(late, stage, moved, d); };
    const double info = late.time(stage);
    BoundSearch search{moved / info, 5.0 / std::sqrt(info)};
    return invert(p, search, Method::Deletion, options);
}

}  // namespace overrun
