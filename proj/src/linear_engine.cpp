#include "overrun/linear_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"
#include "quadrature.hpp"

namespace overrun {

namespace {

constexpr double kSiegmundShift = 0.5826;
constexpr double kKernelReach = 8.0;   // kernel truncation, in sub-step sd
constexpr double kEdgeReach = 12.0;    // nodes farther than this (in sd) cannot cross in one sub-step
constexpr double kBridgeReach = 10.0;  // bridge factors are 1 to double precision beyond this
constexpr double kFreeReach = 10.0;    // grid covers the free process to this many sd
constexpr double kNodesPerSd = 4.0;
constexpr int kMinNodes = 21;
constexpr double kApexTol = 1e-9;

// Probability that x + delta s + W(s) touches a line starting `distance`
// above x with slope `rel_slope` relative to the drift, within `dt`.
double line_hit(double distance, double rel_slope, double dt, double sd) {
    if (distance <= 0.0) return 1.0;
    const double first = phi_bar((distance + rel_slope * dt) / sd);
    const double tail = phi_bar((distance - rel_slope * dt) / sd);
    double second = 0.0;
    if (tail > 0.0) {
        const double log_second = -2.0 * distance * rel_slope + std::log(tail);
        second = log_second < 0.0 ? std::exp(log_second) : 1.0;
    }
    return std::min(1.0, first + second);
}

struct BandGrid {
    double lo = 0.0;  // grid extent, inside the band [lower, upper]
    double hi = 0.0;
    double step = 0.0;
    int nodes = 0;
    std::vector<double> weighted;  // Simpson weight * density

    double at(int j) const { return lo + step * j; }
};

class Recursion {
public:
    Recursion(const LinearDesign& design, double delta, const EngineOptions& options)
        : design_(design), delta_(delta), options_(options) {}

    CrossingTable run(double t_end, int n_steps) const;

private:
    BandGrid make_grid(double band_lo, double band_hi, double t, double sigma) const;
    void propagate(const BandGrid& src, double src_band_lo, double src_band_hi, double band_lo,
                   double band_hi, double dt, double sigma, BandGrid& target) const;

    const LinearDesign& design_;
    double delta_;
    const EngineOptions& options_;
};

// Grid over the part of the band the free process can reach by time t.
BandGrid Recursion::make_grid(double band_lo, double band_hi, double t, double sigma) const {
    BandGrid g;
    const double reach = kFreeReach * std::sqrt(t);
    g.lo = std::max(band_lo, delta_ * t - reach);
    g.hi = std::min(band_hi, delta_ * t + reach);
    if (!(g.hi > g.lo)) {
        g.nodes = 0;
        return g;
    }
    const double width = g.hi - g.lo;
    const int wanted = static_cast<int>(std::ceil(width * kNodesPerSd / sigma)) + 1;
    g.nodes = detail::odd_at_least(std::clamp(wanted, kMinNodes, options_.max_nodes));
    g.step = width / (g.nodes - 1);
    g.weighted.assign(static_cast<std::size_t>(g.nodes), 0.0);
    return g;
}

// Fills target.weighted with Simpson-weighted densities at the new time.
// Under the bridge treatment the kernel from x to x' is multiplied by
// (1 - exp(-2 a a' / dt)) for each line, a and a' being the distances to the
// line at the two ends of the sub-step.
void Recursion::propagate(const BandGrid& src, double src_band_lo, double src_band_hi,
                          double band_lo, double band_hi, double dt, double sigma,
                          BandGrid& target) const {
    const bool bridge = options_.continuity == Continuity::Bridge;
    const double mu = delta_ * dt;
    const double norm = kInvSqrt2Pi / sigma;
    const double reach = kKernelReach * sigma;
    const double edge = kBridgeReach * sigma;
    const double inv2s2 = 0.5 / (sigma * sigma);
    const auto weights = detail::simpson_weights(target.nodes, target.step);
    const int n_src = src.nodes;
    const double h = src.step;
    std::vector<double> hi_factor;

    for (int j = 0; j < target.nodes; ++j) {
        const double x = target.at(j);
        const double center = x - mu;
        const double dist_hi = band_hi - x;
        const double dist_lo = x - band_lo;
        double density = 0.0;
        if (bridge && (dist_hi <= 0.0 || dist_lo <= 0.0)) {
            density = 0.0;
        } else if (n_src == 1) {
            const double d = center - src.lo;
            double f = src.weighted[0] * std::exp(-d * d * inv2s2);
            if (bridge) {
                f *= -std::expm1(-2.0 * (src_band_hi - src.lo) * dist_hi / dt);
                f *= -std::expm1(-2.0 * (src.lo - src_band_lo) * dist_lo / dt);
            }
            density = f;
        } else {
            const int first = std::max(0, static_cast<int>(std::ceil((center - reach - src.lo) / h)));
            const int last =
                std::min(n_src - 1, static_cast<int>(std::floor((center + reach - src.lo) / h)));
            if (first <= last) {
                const double d0 = center - src.at(first);
                if (bridge && (dist_hi < edge || dist_lo < edge)) {
                    // Line factors are geometric in the source index; build the
                    // upper one from the edge inward so underflow is harmless.
                    const auto count = static_cast<std::size_t>(last - first + 1);
                    hi_factor.assign(count, 1.0);
                    if (dist_hi < edge) {
                        double v = std::exp(-2.0 * (src_band_hi - src.at(last)) * dist_hi / dt);
                        const double r = std::exp(-2.0 * h * dist_hi / dt);
                        for (std::size_t k = count; k-- > 0;) {
                            hi_factor[k] = 1.0 - v;
                            v *= r;
                        }
                    }
                    double lo_v = dist_lo < edge
                                      ? std::exp(-2.0 * (src.at(first) - src_band_lo) * dist_lo / dt)
                                      : 0.0;
                    const double lo_r = dist_lo < edge ? std::exp(-2.0 * h * dist_lo / dt) : 0.0;
                    double e = std::exp(-d0 * d0 * inv2s2);
                    double r = std::exp((2.0 * d0 * h - h * h) * inv2s2);
                    const double q = std::exp(-2.0 * h * h * inv2s2);
                    for (int m = first; m <= last; ++m) {
                        density += src.weighted[static_cast<std::size_t>(m)] * e *
                                   hi_factor[static_cast<std::size_t>(m - first)] * (1.0 - lo_v);
                        e *= r;
                        r *= q;
                        lo_v *= lo_r;
                    }
                } else {
                    density = detail::gaussian_sum(src.weighted.data(), first, last, d0, h, sigma);
                }
            }
        }
        target.weighted[static_cast<std::size_t>(j)] =
            weights[static_cast<std::size_t>(j)] * density * norm;
    }
}

CrossingTable Recursion::run(double t_end, int n_steps) const {
    CrossingTable table;
    table.delta = delta_;
    const double dt = t_end / n_steps;
    const double sigma = std::sqrt(dt);
    const Continuity mode = options_.continuity;
    const double shift = mode == Continuity::Shift ? kSiegmundShift * sigma : 0.0;
    const bool reaches_apex =
        design_.closes() && std::abs(t_end - design_.t_max) <= kApexTol * std::max(1.0, t_end);

    table.time.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int i = 0; i <= n_steps; ++i) table.time[static_cast<std::size_t>(i)] = i * dt;
    table.time.back() = t_end;
    table.upper_mass.assign(static_cast<std::size_t>(n_steps), 0.0);
    table.lower_mass.assign(static_cast<std::size_t>(n_steps), 0.0);

    // The starting point mass is a one-node grid carrying weight one.
    BandGrid grid;
    grid.lo = grid.hi = 0.0;
    grid.nodes = 1;
    grid.weighted = {1.0};
    double band_lo = design_.lower(0.0);
    double band_hi = design_.upper(0.0);
    bool absorbed = false;

    const double up_rel = design_.upper_slope - delta_;
    const double lo_rel = delta_ - design_.lower_slope;
    const double mu = delta_ * dt;

    for (int i = 0; i < n_steps && !absorbed; ++i) {
        const double t_next = table.time[static_cast<std::size_t>(i) + 1];
        const double next_lo = design_.lower(t_next) + shift;
        const double next_hi = design_.upper(t_next) - shift;
        const bool collapse = next_hi - next_lo <= 0.0 || (i == n_steps - 1 && reaches_apex);

        double up = 0.0;
        double down = 0.0;
        double mass = 0.0;
        for (int m = 0; m < grid.nodes; ++m) {
            const double g = grid.weighted[static_cast<std::size_t>(m)];
            if (g == 0.0) continue;
            const double x = grid.at(m);
            mass += g;
            double pu = 0.0;
            double pl = 0.0;
            if (mode == Continuity::Bridge) {
                const double du = band_hi - x;
                const double dl = x - band_lo;
                if (du < kEdgeReach * sigma + std::abs(up_rel) * dt) pu = line_hit(du, up_rel, dt, sigma);
                if (dl < kEdgeReach * sigma + std::abs(lo_rel) * dt) pl = line_hit(dl, lo_rel, dt, sigma);
            } else {
                pu = phi_bar((next_hi - x - mu) / sigma);
                pl = phi((next_lo - x - mu) / sigma);
            }
            if (pu + pl > 1.0) {
                const double both = pu + pl;
                pu /= both;
                pl /= both;
            }
            up += g * pu;
            down += g * pl;
        }

        if (collapse) {
            // The band closes within this sub-step: every remaining path
            // leaves through one of the two lines.
            if (up + down > 0.0) {
                const double scale = mass / (up + down);
                up *= scale;
                down *= scale;
            }
            table.upper_mass[static_cast<std::size_t>(i)] = up;
            table.lower_mass[static_cast<std::size_t>(i)] = down;
            absorbed = true;
            break;
        }
        table.upper_mass[static_cast<std::size_t>(i)] = up;
        table.lower_mass[static_cast<std::size_t>(i)] = down;

        BandGrid next = make_grid(next_lo, next_hi, t_next, sigma);
        if (next.nodes == 0) {
            absorbed = true;
            break;
        }
        propagate(grid, band_lo, band_hi, next_lo, next_hi, dt, sigma, next);
        grid = std::move(next);
        band_lo = next_lo;
        band_hi = next_hi;
    }

    table.upper_cum.assign(table.time.size(), 0.0);
    table.lower_cum.assign(table.time.size(), 0.0);
    for (std::size_t i = 0; i < table.upper_mass.size(); ++i) {
        table.upper_cum[i + 1] = table.upper_cum[i] + table.upper_mass[i];
        table.lower_cum[i + 1] = table.lower_cum[i] + table.lower_mass[i];
    }

    if (!absorbed && grid.nodes > 1) {
        const auto w = detail::simpson_weights(grid.nodes, grid.step);
        table.survivor_lo = grid.lo;
        table.survivor_step = grid.step;
        table.survivor_density.resize(static_cast<std::size_t>(grid.nodes));
        for (std::size_t j = 0; j < w.size(); ++j) {
            table.survivor_density[j] = grid.weighted[j] / w[j];
        }
    }
    return table;
}

void check_options(const EngineOptions& options) {
    if (options.steps < 100) {
        throw ConfigError("engine steps must be at least 100, got " + std::to_string(options.steps));
    }
    if (options.max_nodes < kMinNodes) {
        throw ConfigError("engine max_nodes must be at least " + std::to_string(kMinNodes));
    }
}

double interpolate(const std::vector<double>& time, const std::vector<double>& cum, double t) {
    if (t <= time.front()) return 0.0;
    if (t >= time.back()) return cum.back();
    const auto it = std::upper_bound(time.begin(), time.end(), t);
    const auto i = static_cast<std::size_t>(it - time.begin());
    const double t0 = time[i - 1];
    const double t1 = time[i];
    const double f = (t - t0) / (t1 - t0);
    return cum[i - 1] + f * (cum[i] - cum[i - 1]);
}

}  // namespace

int default_steps() {
    if (const char* env = std::getenv("OVERRUN_STEPS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 100 && v <= 10'000'000) return static_cast<int>(v);
    }
    return 1000;
}

LinearDesign LinearDesign::closed(double upper_intercept, double upper_slope,
                                  double lower_intercept, double lower_slope) {
    if (!(lower_slope > upper_slope)) {
        throw ConfigError("closed design needs the lower slope to exceed the upper slope");
    }
    LinearDesign d{upper_intercept, upper_slope, lower_intercept, lower_slope, 0.0};
    d.t_max = (upper_intercept - lower_intercept) / (lower_slope - upper_slope);
    d.validate();
    return d;
}

LinearDesign LinearDesign::truncated(double upper_intercept, double upper_slope,
                                     double lower_intercept, double lower_slope, double t_max) {
    LinearDesign d{upper_intercept, upper_slope, lower_intercept, lower_slope, t_max};
    d.validate();
    return d;
}

bool LinearDesign::closes() const {
    if (!(lower_slope > upper_slope)) return false;
    const double apex = (upper_intercept - lower_intercept) / (lower_slope - upper_slope);
    return std::abs(apex - t_max) <= kApexTol * std::max(1.0, apex);
}

void LinearDesign::validate() const {
    const bool finite = std::isfinite(upper_intercept) && std::isfinite(upper_slope) &&
                        std::isfinite(lower_intercept) && std::isfinite(lower_slope) &&
                        std::isfinite(t_max);
    if (!finite) throw ConfigError("linear design has non-finite parameters");
    if (!(lower_intercept < 0.0 && 0.0 < upper_intercept)) {
        throw ConfigError("linear design needs lower intercept < 0 < upper intercept");
    }
    if (!(t_max > 0.0)) throw ConfigError("linear design needs t_max > 0");
    if (lower_slope > upper_slope) {
        const double apex = (upper_intercept - lower_intercept) / (lower_slope - upper_slope);
        if (t_max > apex + kApexTol * std::max(1.0, apex)) {
            throw ConfigError("linear design t_max lies beyond the boundary intersection at t = " +
                              std::to_string(apex));
        }
    }
}

TrialOutcome checked_outcome(const LinearDesign& design, TrialOutcome outcome) {
    const double t = outcome.time;
    if (!(t > 0.0) || t > design.t_max * (1.0 + 1e-12)) {
        throw InputError("stopping time must lie in (0, t_max]");
    }
    const double tol = 1e-3 * std::max(1.0, std::abs(outcome.value));
    switch (outcome.hit) {
        case Boundary::Upper: {
            const double u = design.upper(t);
            if (std::abs(outcome.value - u) > tol) {
                throw InputError("upper-boundary outcome x = " + std::to_string(outcome.value) +
                                 " is off the boundary u(t) = " + std::to_string(u));
            }
            outcome.value = u;
            break;
        }
        case Boundary::Lower: {
            const double l = design.lower(t);
            if (std::abs(outcome.value - l) > tol) {
                throw InputError("lower-boundary outcome x = " + std::to_string(outcome.value) +
                                 " is off the boundary l(t) = " + std::to_string(l));
            }
            outcome.value = l;
            break;
        }
        case Boundary::Final:
            if (design.closes()) throw InputError("closed design has no final region");
            if (std::abs(t - design.t_max) > 1e-9 * std::max(1.0, design.t_max)) {
                throw InputError("final outcome must occur at t_max");
            }
            if (outcome.value >= design.upper(t) || outcome.value <= design.lower(t)) {
                throw InputError("final outcome must lie strictly between the boundaries");
            }
            outcome.time = design.t_max;
            break;
    }
    return outcome;
}

double CrossingTable::upper_at(double t) const { return interpolate(time, upper_cum, t); }

double CrossingTable::lower_at(double t) const { return interpolate(time, lower_cum, t); }

double CrossingTable::survivor_mass() const {
    if (survivor_density.size() < 2) return 0.0;
    const auto w = detail::simpson_weights(static_cast<int>(survivor_density.size()), survivor_step);
    double m = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) m += w[j] * survivor_density[j];
    return m;
}

double CrossingTable::survivor_mass_above(double x) const {
    const auto n = survivor_density.size();
    if (n < 2) return 0.0;
    const double hi = survivor_lo + survivor_step * static_cast<double>(n - 1);
    if (x >= hi) return 0.0;
    if (x <= survivor_lo) return survivor_mass();
    // Trapezoid over the cells above x, with the cut cell interpolated.
    const double pos = (x - survivor_lo) / survivor_step;
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    const double fx = survivor_density[k] + frac * (survivor_density[k + 1] - survivor_density[k]);
    double m = 0.5 * (fx + survivor_density[k + 1]) * (1.0 - frac) * survivor_step;
    for (std::size_t j = k + 1; j + 1 < n; ++j) {
        m += 0.5 * (survivor_density[j] + survivor_density[j + 1]) * survivor_step;
    }
    return m;
}

CrossingTable crossing_table(const LinearDesign& design, double delta,
                             const EngineOptions& options) {
    design.validate();
    check_options(options);
    return Recursion(design, delta, options).run(design.t_max, options.steps);
}

CrossingTable crossing_table_until(const LinearDesign& design, double delta, double t_end,
                                   const EngineOptions& options) {
    design.validate();
    check_options(options);
    if (!(t_end > 0.0)) throw InputError("table end time must be positive");
    if (t_end >= design.t_max * (1.0 - 1e-12)) {
        return Recursion(design, delta, options).run(design.t_max, options.steps);
    }
    const int n = std::max(
        1, static_cast<int>(std::ceil(options.steps * t_end / design.t_max - 1e-9)));
    return Recursion(design, delta, options).run(t_end, n);
}

double stagewise_p_linear(const LinearDesign& design, const TrialOutcome& outcome, double delta0,
                          const EngineOptions& options) {
    const TrialOutcome o = checked_outcome(design, outcome);
    switch (o.hit) {
        case Boundary::Upper:
            return crossing_table_until(design, delta0, o.time, options).upper_total();
        case Boundary::Lower:
            return 1.0 - crossing_table_until(design, delta0, o.time, options).lower_total();
        case Boundary::Final: {
            const auto table = crossing_table(design, delta0, options);
            return table.upper_total() + table.survivor_mass_above(o.value);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double expected_stop_time(const CrossingTable& table) {
    double e = 0.0;
    for (std::size_t i = 0; i < table.upper_mass.size(); ++i) {
        const double mid = 0.5 * (table.time[i] + table.time[i + 1]);
        e += mid * (table.upper_mass[i] + table.lower_mass[i]);
    }
    return e + table.end_time() * table.survivor_mass();
}

double expected_stop_time(const LinearDesign& design, double delta, const EngineOptions& options) {
    if (!std::isfinite(design.t_max)) throw ConfigError("expected stopping time needs a bounded design");
    return expected_stop_time(crossing_table(design, delta, options));
}

double SimulationResult::rate(Boundary hit) const {
    if (outcomes.empty()) return 0.0;
    const auto n = std::count_if(outcomes.begin(), outcomes.end(),
                                 [hit](const TrialOutcome& o) { return o.hit == hit; });
    return static_cast<double>(n) / static_cast<double>(outcomes.size());
}

double SimulationResult::mean_time() const {
    if (outcomes.empty()) return 0.0;
    double s = 0.0;
    for (const auto& o : outcomes) s += o.time;
    return s / static_cast<double>(outcomes.size());
}

double SimulationResult::time_sd() const {
    if (outcomes.size() < 2) return 0.0;
    const double m = mean_time();
    double s = 0.0;
    for (const auto& o : outcomes) s += (o.time - m) * (o.time - m);
    return std::sqrt(s / static_cast<double>(outcomes.size() - 1));
}

double SimulationResult::empirical_at(Boundary hit, double t) const {
    if (outcomes.empty()) return 0.0;
    const auto n = std::count_if(outcomes.begin(), outcomes.end(), [&](const TrialOutcome& o) {
        return o.hit == hit && o.time <= t;
    });
    return static_cast<double>(n) / static_cast<double>(outcomes.size());
}

SimulationResult simulate_paths(const LinearDesign& design, double delta, std::int64_t n,
                                std::uint64_t seed, const SimulationOptions& options) {
    design.validate();
    if (n < 1) throw ConfigError("simulation needs at least one path");
    if (options.steps < 1) throw ConfigError("simulation needs at least one sub-step");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const int steps = options.steps;
    const double dt = design.t_max / steps;
    const double sd = std::sqrt(dt);
    const double shift = options.continuity == Continuity::Shift ? kSiegmundShift * sd : 0.0;
    const bool bridge = options.continuity == Continuity::Bridge;

    SimulationResult result;
    result.outcomes.reserve(static_cast<std::size_t>(n));
    for (std::int64_t path = 0; path < n; ++path) {
        double x = 0.0;
        TrialOutcome out;
        bool stopped = false;
        for (int i = 1; i <= steps && !stopped; ++i) {
            const double t0 = (i - 1) * dt;
            const double t1 = i == steps ? design.t_max : i * dt;
            const double x1 = x + delta * dt + sd * normal(rng);
            const double u0 = design.upper(t0) - shift;
            const double u1 = design.upper(t1) - shift;
            const double l0 = design.lower(t0) + shift;
            const double l1 = design.lower(t1) + shift;
            if (x1 >= u1 || (i == steps && design.closes() && x1 >= l1)) {
                const double du0 = u0 - x;
                const double du1 = u1 - x1;
                const double s = bridge && du0 - du1 > 0.0 ? du0 / (du0 - du1) : 1.0;
                out.time = t0 + std::clamp(s, 0.0, 1.0) * (t1 - t0);
                out.hit = Boundary::Upper;
                stopped = true;
            } else if (x1 <= l1 || (i == steps && design.closes())) {
                const double dl0 = x - l0;
                const double dl1 = x1 - l1;
                const double s = bridge && dl0 - dl1 > 0.0 ? dl0 / (dl0 - dl1) : 1.0;
                out.time = t0 + std::clamp(s, 0.0, 1.0) * (t1 - t0);
                out.hit = Boundary::Lower;
                stopped = true;
            } else if (bridge) {
                const double eu = 2.0 * (u0 - x) * (u1 - x1) / dt;
                const double el = 2.0 * (x - l0) * (x1 - l1) / dt;
                const double pu = eu < 40.0 ? std::exp(-eu) : 0.0;
                const double pl = el < 40.0 ? std::exp(-el) : 0.0;
                if (pu > 0.0 || pl > 0.0) {
                    const double v = uniform(rng);
                    if (v < pu) {
                        out.hit = Boundary::Upper;
                        out.time = 0.5 * (t0 + t1);
                        stopped = true;
                    } else if (v < pu + pl) {
                        out.hit = Boundary::Lower;
                        out.time = 0.5 * (t0 + t1);
                        stopped = true;
                    }
                }
            }
            if (!stopped) x = x1;
        }
        if (stopped) {
            out.value = out.hit == Boundary::Upper ? design.upper(out.time) : design.lower(out.time);
        } else {
            out.time = design.t_max;
            out.value = x;
            out.hit = Boundary::Final;
        }
        result.outcomes.push_back(out);
    }
    return result;
}

}  // namespace overrun
