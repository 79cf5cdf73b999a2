#include "overrun/group_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"
#include "quadrature.hpp"

namespace overrun {

namespace {

constexpr int kMinNodes = 601;
constexpr int kMaxNodes = 40001;
constexpr double kFreeReach = 8.0;
constexpr double kNodesPerSd = 4.0;

double below(const StageDensity& d, int stage, double x);

}  // namespace

GroupDesign GroupDesign::symmetric(std::vector<double> times, double c) {
    GroupDesign d;
    const auto k = times.size();
    d.times = std::move(times);
    d.continue_lo.assign(k > 0 ? k - 1 : 0, -c);
    d.continue_hi.assign(k > 0 ? k - 1 : 0, c);
    d.final_lo = -c;
    d.final_hi = c;
    d.validate();
    return d;
}

std::vector<double> GroupDesign::equally_spaced(int stages, double t_max) {
    if (stages < 1) throw ConfigError("a group design needs at least one analysis");
    std::vector<double> t(static_cast<std::size_t>(stages));
    for (int k = 1; k <= stages; ++k) t[static_cast<std::size_t>(k - 1)] = t_max * k / stages;
    return t;
}

void GroupDesign::validate() const {
    const int k = stages();
    if (k < 1) throw ConfigError("a group design needs at least one analysis");
    if (continue_lo.size() != static_cast<std::size_t>(k - 1) ||
        continue_hi.size() != static_cast<std::size_t>(k - 1)) {
        throw ConfigError("a group design with K analyses needs K-1 continuation intervals");
    }
    double prev = 0.0;
    for (double t : times) {
        if (!std::isfinite(t) || !(t > prev)) {
            throw ConfigError("analysis times must be positive and strictly increasing");
        }
        prev = t;
    }
    for (std::size_t i = 0; i < continue_lo.size(); ++i) {
        if (!(continue_lo[i] < continue_hi[i])) {
            throw ConfigError("continuation interval " + std::to_string(i + 1) + " is empty");
        }
    }
    if (!(final_lo <= final_hi)) throw ConfigError("final thresholds are out of order");
}

GroupDesign GroupDesign::rescheduled(int stage, double extra_time) const {
    validate();
    if (stage < 1 || stage > stages()) throw InputError("stage out of range");
    if (!(extra_time >= 0.0)) throw InputError("overrun information must be non-negative");
    GroupDesign d;
    const auto k = static_cast<std::size_t>(stage);
    d.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(k));
    d.times.back() += extra_time;
    d.continue_lo.assign(continue_lo.begin(), continue_lo.begin() + static_cast<std::ptrdiff_t>(k - 1));
    d.continue_hi.assign(continue_hi.begin(), continue_hi.begin() + static_cast<std::ptrdiff_t>(k - 1));
    if (stage < stages()) {
        d.final_lo = continue_lo[k - 1];
        d.final_hi = continue_hi[k - 1];
    } else {
        d.final_lo = final_lo;
        d.final_hi = final_hi;
    }
    return d;
}

double StageGrid::mass() const {
    double m = 0.0;
    for (double g : weighted) m += g;
    return m;
}

double StageDensity::reach(int stage) const {
    if (stage <= 1) return 1.0;
    return continuing[static_cast<std::size_t>(stage - 2)].mass();
}

double StageDensity::exceed(int stage, double x) const {
    const double t = times[static_cast<std::size_t>(stage - 1)];
    if (stage == 1) return phi_bar((x - delta * t) / std::sqrt(t));
    const double dt = t - times[static_cast<std::size_t>(stage - 2)];
    const double sd = std::sqrt(dt);
    const double mu = delta * dt;
    const auto& grid = continuing[static_cast<std::size_t>(stage - 2)];
    double p = 0.0;
    for (std::size_t j = 0; j < grid.weighted.size(); ++j) {
        p += grid.weighted[j] * phi_bar((x - grid.at(j) - mu) / sd);
    }
    return p;
}

double StageDensity::arrival_density(int stage, double x) const {
    const double t = times[static_cast<std::size_t>(stage - 1)];
    if (stage == 1) {
        const double sd = std::sqrt(t);
        return normal_pdf((x - delta * t) / sd) / sd;
    }
    const double dt = t - times[static_cast<std::size_t>(stage - 2)];
    const double sd = std::sqrt(dt);
    const auto& grid = continuing[static_cast<std::size_t>(stage - 2)];
    if (grid.weighted.empty()) return 0.0;
    const double center = x - delta * dt;
    const double d0 = center - grid.lo;
    return detail::gaussian_sum(grid.weighted.data(), 0, static_cast<int>(grid.weighted.size()) - 1,
                                d0, grid.step, sd) *
           kInvSqrt2Pi / sd;
}

double StageDensity::upper_before(int stage) const {
    double s = 0.0;
    for (int j = 1; j < stage; ++j) s += upper_stop[static_cast<std::size_t>(j - 1)];
    return s;
}

double StageDensity::final_accept() const {
    const int k = stages_total;
    return reach(k) - upper_stop[static_cast<std::size_t>(k - 1)] -
           lower_stop[static_cast<std::size_t>(k - 1)];
}

double StageDensity::total_mass() const {
    double s = 0.0;
    for (std::size_t j = 0; j < upper_stop.size(); ++j) s += upper_stop[j] + lower_stop[j];
    return s + final_accept();
}

namespace {

double below(const StageDensity& d, int stage, double x) {
    const double t = d.times[static_cast<std::size_t>(stage - 1)];
    if (stage == 1) return phi((x - d.delta * t) / std::sqrt(t));
    const double dt = t - d.times[static_cast<std::size_t>(stage - 2)];
    const double sd = std::sqrt(dt);
    const double mu = d.delta * dt;
    const auto& grid = d.continuing[static_cast<std::size_t>(stage - 2)];
    double p = 0.0;
    for (std::size_t j = 0; j < grid.weighted.size(); ++j) {
        p += grid.weighted[j] * phi((x - grid.at(j) - mu) / sd);
    }
    return p;
}

}  // namespace

StageDensity gs_stage_densities(const GroupDesign& design, double delta, int through_stage) {
    design.validate();
    const int K = design.stages();
    const int n = through_stage <= 0 ? K : std::min(through_stage, K);

    StageDensity d;
    d.delta = delta;
    d.times = design.times;
    d.stages_total = K;
    for (int k = 1; k <= n; ++k) {
        const double hi = k < K ? design.continue_hi[static_cast<std::size_t>(k - 1)] : design.final_hi;
        const double lo = k < K ? design.continue_lo[static_cast<std::size_t>(k - 1)] : design.final_lo;
        d.upper_stop.push_back(d.exceed(k, hi));
        d.lower_stop.push_back(below(d, k, lo));
        if (k == n || k == K) break;

        // Continuing density after stage k, resolved for the next increment.
        const double t = design.time(k);
        const double next_sd = std::sqrt(design.time(k + 1) - t);
        const double reach = kFreeReach * std::sqrt(t);
        const double g_lo = std::max(lo, delta * t - reach);
        const double g_hi = std::min(hi, delta * t + reach);
        StageGrid grid;
        if (g_hi > g_lo) {
            const double width = g_hi - g_lo;
            const double wanted = std::ceil(width * kNodesPerSd / next_sd) + 1.0;
            const int nodes = detail::odd_at_least(
                static_cast<int>(std::clamp(wanted, double(kMinNodes), double(kMaxNodes))));
            grid.lo = g_lo;
            grid.step = width / (nodes - 1);
            const auto w = detail::simpson_weights(nodes, grid.step);
            grid.weighted.resize(static_cast<std::size_t>(nodes));
            for (std::size_t j = 0; j < w.size(); ++j) {
                grid.weighted[j] = w[j] * d.arrival_density(k, grid.at(j));
            }
        }
        d.continuing.push_back(std::move(grid));
    }
    return d;
}

void check_group_outcome(const GroupDesign& design, int stage, double x) {
    design.validate();
    if (stage < 1 || stage > design.stages()) {
        throw InputError("stage " + std::to_string(stage) + " outside 1.." +
                         std::to_string(design.stages()));
    }
    if (!std::isfinite(x)) throw InputError("stage outcome must be finite");
    if (stage < design.stages()) {
        const auto k = static_cast<std::size_t>(stage - 1);
        const double tol = 1e-9 * std::max(1.0, std::abs(x));
        if (x > design.continue_lo[k] + tol && x < design.continue_hi[k] - tol) {
            throw InputError("x = " + std::to_string(x) + " lies inside the continuation interval of stage " +
                             std::to_string(stage));
        }
    }
}

double gs_stagewise_p(const StageDensity& density, int stage, double x) {
    return density.upper_before(stage) + density.exceed(stage, x);
}

double gs_stagewise_p(const GroupDesign& design, int stage, double x, double delta0) {
    check_group_outcome(design, stage, x);
    const auto density = gs_stage_densities(design, delta0, stage);
    return gs_stagewise_p(density, stage, x);
}

double rejection_probability(const GroupDesign& design, double delta, int sign) {
    const auto d = gs_stage_densities(design, delta);
    double s = 0.0;
    const auto& v = sign >= 0 ? d.upper_stop : d.lower_stop;
    for (double m : v) s += m;
    return s;
}

double obf_constant(const std::vector<double>& times, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (times.empty()) throw ConfigError("no analysis times");
    const double t_last = times.back();
    const double lo = z_of(alpha / 2.0) * std::sqrt(t_last);
    if (times.size() == 1) return lo;
    const double hi = z_of(alpha / (2.0 * static_cast<double>(times.size()))) * std::sqrt(t_last);

    auto excess = [&](double c) {
        const auto d = gs_stage_densities(GroupDesign::symmetric(times, c), 0.0);
        double s = 0.0;
        for (std::size_t j = 0; j < d.upper_stop.size(); ++j) s += d.upper_stop[j] + d.lower_stop[j];
        return s - alpha;
    };
    const double f_lo = excess(lo);
    const double f_hi = excess(hi);
    if (!(f_lo >= 0.0 && f_hi <= 0.0)) {
        throw NumericalError("boundary constant not bracketed by the fixed-sample and Bonferroni values");
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    boost::uintmax_t iterations = 100;
    const auto r = boost::math::tools::toms748_solve(excess, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(44),
                                                     iterations);
    if (iterations >= 100) throw NumericalError("boundary constant search did not converge");
    return 0.5 * (r.first + r.second);
}

Horizon required_horizon(int stages, double alpha, double power, double delta) {
    if (stages < 1) throw ConfigError("a group design needs at least one analysis");
    if (!(alpha > 0.0 && alpha < power && power < 1.0)) {
        throw DomainError("need 0 < alpha < power < 1");
    }
    if (delta == 0.0 || !std::isfinite(delta)) throw DomainError("power drift must be non-zero");
    const int sign = delta > 0.0 ? 1 : -1;

    // With equal spacing, X(s t)/sqrt(s) is again a Brownian motion under the
    // null, so the level-alpha constant scales as sqrt(t_K): solving it once on
    // the unit horizon decouples the two conditions.
    const double unit_constant = obf_constant(GroupDesign::equally_spaced(stages, 1.0), alpha);
    auto shortfall = [&](double t_max) {
        const auto design =
            GroupDesign::symmetric(GroupDesign::equally_spaced(stages, t_max), unit_constant * std::sqrt(t_max));
        return rejection_probability(design, delta, sign) - power;
    };

    const double fixed = std::pow(z_of(alpha / 2.0) + z_of(1.0 - power), 2) / (delta * delta);
    if (stages == 1) {
        Horizon h;
        h.t_max = fixed;
        h.constant = unit_constant * std::sqrt(fixed);
        h.times = {fixed};
        return h;
    }
    double lo = 0.8 * fixed;
    double hi = 2.0 * fixed;
    double f_lo = shortfall(lo);
    double f_hi = shortfall(hi);
    for (int i = 0; i < 20 && f_lo > 0.0; ++i) {
        lo *= 0.5;
        f_lo = shortfall(lo);
    }
    for (int i = 0; i < 20 && f_hi < 0.0; ++i) {
        hi *= 2.0;
        f_hi = shortfall(hi);
    }
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) throw NumericalError("horizon search failed to bracket");
    boost::uintmax_t iterations = 100;
    const auto r = boost::math::tools::toms748_solve(shortfall, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(44),
                                                     iterations);
    if (iterations >= 100) throw NumericalError("horizon search did not converge");
    Horizon h;
    h.t_max = 0.5 * (r.first + r.second);
    h.constant = unit_constant * std::sqrt(h.t_max);
    h.times = GroupDesign::equally_spaced(stages, h.t_max);
    return h;
}

std::vector<TrialOutcome> simulate_group(const GroupDesign& design, double delta, std::int64_t n,
                                         std::uint64_t seed) {
    design.validate();
    if (n < 1) throw ConfigError("simulation needs at least one trial");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int K = design.stages();
    std::vector<TrialOutcome> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double x = 0.0;
        double prev = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double t = design.time(k);
            x += delta * (t - prev) + std::sqrt(t - prev) * normal(rng);
            prev = t;
            const bool last = k == K;
            const double hi = last ? design.final_hi : design.continue_hi[static_cast<std::size_t>(k - 1)];
            const double lo = last ? design.final_lo : design.continue_lo[static_cast<std::size_t>(k - 1)];
            if (x >= hi || x <= lo || last) {
                TrialOutcome o;
                o.time = t;
                o.value = x;
                o.stage = k;
                o.hit = x >= hi ? Boundary::Upper : (x <= lo ? Boundary::Lower : Boundary::Final);
                out.push_back(o);
                break;
            }
        }
    }
    return out;
}

}  // namespace overrun
