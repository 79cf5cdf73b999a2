#include "overrun/design_eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"

namespace overrun {

namespace {

constexpr double kZClip = 38.0;
constexpr double kQuadTol = 1e-11;
constexpr unsigned kQuadDepth = 18;
constexpr double kTailReach = 10.0;

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kQuadDepth, kQuadTol);
}

// z_of without the domain error: saturates where p1 underflows.
double z_clipped(double p) {
    if (p <= phi_bar(kZClip)) return kZClip;
    if (p >= phi_bar(-kZClip)) return -kZClip;
    return z_of(p);
}

double coverage_point(double p, double t, double t_o, double rho, double z_gamma) {
    if (t_o <= 0.0) return z_clipped(p) > z_gamma ? 1.0 : 0.0;
    const double a = std::sqrt(t / (rho * t_o));
    const double b = std::sqrt((t + rho * t_o) / (rho * t_o)) * z_gamma;
    return phi(a * z_clipped(p) - b);
}

void check_gammas(const std::vector<double>& gammas) {
    for (double g : gammas) {
        if (!(g > 0.0 && g < 1.0)) throw ConfigError("confidence coefficients must lie in (0, 1)");
    }
}

void check_model(const OverrunData& model) {
    if (!(model.rho > 0.0)) throw ConfigError("weighting factor rho must be > 0");
    if (model.c && !(*model.c >= 0.0)) throw ConfigError("overrun coefficient c must be >= 0");
    if (model.model == OverrunModel::ObservedOnly && !(model.t_o >= 0.0)) {
        throw ConfigError("overrun information t_o must be >= 0");
    }
}

std::vector<double> linear_coverage(const CrossingTable& table, const OverrunData& model,
                                    const std::vector<double>& gammas) {
    const int n = table.steps();
    const double survivors = table.survivor_mass();
    const double below_lower = table.upper_total() + survivors + table.lower_total();
    std::vector<double> out;
    out.reserve(gammas.size());
    for (double gamma : gammas) {
        const double zg = z_of(gamma);
        double q = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            const double t = 0.5 * (table.time[s] + table.time[s + 1]);
            const double t_o = model.information_at(t);
            const double mu = table.upper_mass[s];
            const double ml = table.lower_mass[s];
            if (t_o <= 0.0) {
                q += coverage_band(table.upper_cum[s], table.upper_cum[s + 1], t, 0.0, model.rho, gamma);
                q += coverage_band(below_lower - table.lower_cum[s + 1], below_lower - table.lower_cum[s], t,
                                   0.0, model.rho, gamma);
                continue;
            }
            // Midpoint rule in p1: each sub-step carries little mass.
            if (mu > 0.0) q += mu * coverage_point(table.upper_cum[s] + 0.5 * mu, t, t_o, model.rho, zg);
            if (ml > 0.0) {
                q += ml * coverage_point(below_lower - table.lower_cum[s] - 0.5 * ml, t, t_o, model.rho, zg);
            }
        }
        if (survivors > 0.0) {
            const double t = table.end_time();
            q += coverage_band(table.upper_total(), table.upper_total() + survivors, t, model.information_at(t),
                               model.rho, gamma);
        }
        out.push_back(std::clamp(q, 0.0, 1.0));
    }
    return out;
}

std::vector<double> group_coverage(const GroupDesign& design, const StageDensity& d, const OverrunData& model,
                                   const std::vector<double>& gammas, FinalStage final_stage) {
    const int K = design.stages();
    std::vector<double> out;
    out.reserve(gammas.size());
    for (double gamma : gammas) {
        double q = 0.0;
        double before = 0.0;  // upper stopping mass at earlier stages
        for (int k = 1; k <= K; ++k) {
            const double t = design.time(k);
            const double t_o = model.information_at(t);
            const double reach = d.reach(k);
            if (k == K && final_stage == FinalStage::Reschedule) {
                // The rescheduled analysis is an exact stagewise p-value, so
                // all that matters is where its range starts.
                q += std::clamp(gamma - before, 0.0, reach);
                break;
            }
            if (k == K) {
                q += coverage_band(before, before + reach, t, t_o, model.rho, gamma);
                break;
            }
            const double up = d.upper_stop[static_cast<std::size_t>(k - 1)];
            const double low = d.lower_stop[static_cast<std::size_t>(k - 1)];
            q += coverage_band(before, before + up, t, t_o, model.rho, gamma);
            q += coverage_band(before + reach - low, before + reach, t, t_o, model.rho, gamma);
            before += up;
        }
        out.push_back(std::clamp(q, 0.0, 1.0));
    }
    return out;
}

CoverageReport make_report(const std::vector<double>& gammas, const std::vector<double>& levels,
                           const std::vector<double>& delta_grid,
                           const std::function<std::vector<double>(double, const std::vector<double>&)>& eval) {
    if (delta_grid.empty()) throw ConfigError("empty drift grid");
    check_gammas(gammas);
    for (double l : levels) {
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("interval levels must lie in (0, 1)");
    }
    // One evaluation per drift covers the requested g and both tails of
    // every interval level.
    std::vector<double> all = gammas;
    for (double l : levels) {
        all.push_back(0.5 * (1.0 + l));
        all.push_back(0.5 * (1.0 - l));
    }
    CoverageReport r;
    r.delta_grid = delta_grid;
    r.gammas = gammas;
    r.levels = levels;
    constexpr double inf = std::numeric_limits<double>::infinity();
    r.q_inf.assign(gammas.size(), inf);
    r.q_sup.assign(gammas.size(), -inf);
    r.Q_inf.assign(levels.size(), inf);
    r.Q_sup.assign(levels.size(), -inf);
    for (double delta : delta_grid) {
        const auto v = eval(delta, all);
        std::vector<double> qs(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(gammas.size()));
        std::vector<double> Qs;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            Qs.push_back(v[gammas.size() + 2 * j] - v[gammas.size() + 2 * j + 1]);
        }
        for (std::size_t j = 0; j < qs.size(); ++j) {
            r.q_inf[j] = std::min(r.q_inf[j], qs[j]);
            r.q_sup[j] = std::max(r.q_sup[j], qs[j]);
        }
        for (std::size_t j = 0; j < Qs.size(); ++j) {
            r.Q_inf[j] = std::min(r.Q_inf[j], Qs[j]);
            r.Q_sup[j] = std::max(r.Q_sup[j], Qs[j]);
        }
        r.q.push_back(std::move(qs));
        r.Q.push_back(std::move(Qs));
    }
    return r;
}

void check_reversal_args(double c, double rho, double alpha) {
    if (!(c > 0.0)) throw ConfigError("reversal probabilities need c > 0");
    if (!(rho > 0.0)) throw ConfigError("weighting factor rho must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

struct ReversalTerms {
    double scale_alpha;  // sqrt((1 + rho c) / (rho c)) z_alpha
    double scale_z;      // 1 / sqrt(rho c)
    double c;
    double delta;

    double shift(double p0, double t) const {
        return scale_alpha - scale_z * z_clipped(p0) - delta * std::sqrt(c * t);
    }
};

ReversalTerms reversal_terms(double delta, double c, double rho, double alpha) {
    return {std::sqrt((1.0 + rho * c) / (rho * c)) * z_of(alpha), 1.0 / std::sqrt(rho * c), c, delta};
}

Reversal linear_reversal(const CrossingTable& table, const CrossingTable& null_table, double c, double rho,
                         double alpha) {
    if (null_table.steps() != table.steps()) throw NumericalError("crossing tables on different grids");
    const auto terms = reversal_terms(table.delta, c, rho, alpha);
    const double null_below_lower =
        null_table.upper_total() + null_table.survivor_mass() + null_table.lower_total();
    Reversal r;
    for (int i = 0; i < table.steps(); ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double t = 0.5 * (table.time[s] + table.time[s + 1]);
        if (table.upper_mass[s] > 0.0) {
            const double p0 = null_table.upper_cum[s] + 0.5 * null_table.upper_mass[s];
            r.reject_to_accept += table.upper_mass[s] * phi(terms.shift(p0, t));
        }
        if (table.lower_mass[s] > 0.0) {
            const double p0 = null_below_lower - null_table.lower_cum[s] - 0.5 * null_table.lower_mass[s];
            r.accept_to_reject += table.lower_mass[s] * phi_bar(terms.shift(p0, t));
        }
    }
    r.power = table.upper_total();
    r.overrun_power = r.power - r.reject_to_accept + r.accept_to_reject;
    return r;
}

Reversal group_reversal(const GroupDesign& design, const StageDensity& d, const StageDensity& null_d,
                        double c, double rho, double alpha) {
    const auto terms = reversal_terms(d.delta, c, rho, alpha);
    Reversal r;
    double null_before = 0.0;
    for (int k = 1; k < design.stages(); ++k) {
        const double t = design.time(k);
        const double hi = design.continue_hi[static_cast<std::size_t>(k - 1)];
        const double lo = design.continue_lo[static_cast<std::size_t>(k - 1)];
        const double reach = kTailReach * std::sqrt(t);
        auto up = [&](double x) {
            const double f = d.arrival_density(k, x);
            if (f <= 0.0) return 0.0;
            return f * phi(terms.shift(null_before + null_d.exceed(k, x), t));
        };
        auto down = [&](double x) {
            const double f = d.arrival_density(k, x);
            if (f <= 0.0) return 0.0;
            return f * phi_bar(terms.shift(null_before + null_d.exceed(k, x), t));
        };
        r.reject_to_accept += integrate(up, hi, std::max(hi, d.delta * t) + reach);
        r.accept_to_reject += integrate(down, std::min(lo, d.delta * t) - reach, lo);
        null_before += null_d.upper_stop[static_cast<std::size_t>(k - 1)];
    }
    for (double m : d.upper_stop) r.power += m;
    r.overrun_power = r.power - r.reject_to_accept + r.accept_to_reject;
    return r;
}

}  // namespace

double coverage_band(double p_lo, double p_hi, double t, double t_o, double rho, double gamma) {
    p_lo = std::max(p_lo, 0.0);
    p_hi = std::min(p_hi, 1.0);
    if (!(p_hi > p_lo)) return 0.0;
    if (t_o <= 0.0) return std::max(0.0, std::min(p_hi, gamma) - p_lo);
    const double zg = z_of(gamma);
    const double a = std::sqrt(t / (rho * t_o));
    const double b = std::sqrt((t + rho * t_o) / (rho * t_o)) * zg;
    // Over a tiny band the integrand is constant to rounding.
    if (p_hi - p_lo < 1e-12) return (p_hi - p_lo) * coverage_point(0.5 * (p_lo + p_hi), t, t_o, rho, zg);
    // In z = z(p1) the integrand is Phi(a z - b) phi(z), smooth but with a
    // step of width 1/a near b/a; split there to help the quadrature.
    const double z_lo = z_clipped(p_hi);
    const double z_hi = z_clipped(p_lo);
    auto f = [a, b](double z) { return phi(a * z - b) * normal_pdf(z); };
    const double mid = b / a;
    if (mid > z_lo && mid < z_hi) return integrate(f, z_lo, mid) + integrate(f, mid, z_hi);
    return integrate(f, z_lo, z_hi);
}

std::vector<double> coverage_q(const LinearDesign& design, const OverrunData& model,
                               const std::vector<double>& gammas, double delta, const EngineOptions& options) {
    check_gammas(gammas);
    check_model(model);
    return linear_coverage(crossing_table(design, delta, options), model, gammas);
}

std::vector<double> coverage_q(const GroupDesign& design, const OverrunData& model,
                               const std::vector<double>& gammas, double delta, FinalStage final_stage) {
    check_gammas(gammas);
    check_model(model);
    return group_coverage(design, gs_stage_densities(design, delta), model, gammas, final_stage);
}

double coverage_q(const LinearDesign& design, const OverrunData& model, double gamma, double delta,
                  const EngineOptions& options) {
    return coverage_q(design, model, std::vector<double>{gamma}, delta, options)[0];
}

double coverage_q(const GroupDesign& design, const OverrunData& model, double gamma, double delta,
                  FinalStage final_stage) {
    return coverage_q(design, model, std::vector<double>{gamma}, delta, final_stage)[0];
}

double coverage_Q(const LinearDesign& design, const OverrunData& model, double level, double delta,
                  const EngineOptions& options) {
    const auto v = coverage_q(design, model, {0.5 * (1.0 + level), 0.5 * (1.0 - level)}, delta, options);
    return v[0] - v[1];
}

double coverage_Q(const GroupDesign& design, const OverrunData& model, double level, double delta,
                  FinalStage final_stage) {
    const auto v = coverage_q(design, model, {0.5 * (1.0 + level), 0.5 * (1.0 - level)}, delta, final_stage);
    return v[0] - v[1];
}

std::vector<double> drift_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("invalid drift grid");
    const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> g;
    for (int i = 0; i <= n; ++i) g.push_back(lo + step * i);
    return g;
}

CoverageReport coverage_sweep(const LinearDesign& design, const OverrunData& model,
                              const std::vector<double>& gammas, const std::vector<double>& levels,
                              const std::vector<double>& delta_grid, const EngineOptions& options) {
    check_model(model);
    return make_report(gammas, levels, delta_grid, [&](double delta, const std::vector<double>& g) {
        return linear_coverage(crossing_table(design, delta, options), model, g);
    });
}

CoverageReport coverage_sweep(const GroupDesign& design, const OverrunData& model,
                              const std::vector<double>& gammas, const std::vector<double>& levels,
                              const std::vector<double>& delta_grid, FinalStage final_stage) {
    check_model(model);
    return make_report(gammas, levels, delta_grid, [&](double delta, const std::vector<double>& g) {
        return group_coverage(design, gs_stage_densities(design, delta), model, g, final_stage);
    });
}

Reversal reversal_probs(const LinearDesign& design, double delta, double c, double rho, double alpha,
                        const EngineOptions& options) {
    check_reversal_args(c, rho, alpha);
    return linear_reversal(crossing_table(design, delta, options), crossing_table(design, 0.0, options), c, rho,
                           alpha);
}

Reversal reversal_probs(const GroupDesign& design, double delta, double c, double rho, double alpha) {
    check_reversal_args(c, rho, alpha);
    return group_reversal(design, gs_stage_densities(design, delta), gs_stage_densities(design, 0.0), c, rho,
                          alpha);
}

double overrun_power(const LinearDesign& design, double delta, double c, double rho, double alpha,
                     const EngineOptions& options) {
    return reversal_probs(design, delta, c, rho, alpha, options).overrun_power;
}

double overrun_power(const GroupDesign& design, double delta, double c, double rho, double alpha) {
    return reversal_probs(design, delta, c, rho, alpha).overrun_power;
}

ReversalReport reversal_sweep(const LinearDesign& design, const std::vector<double>& delta_grid, double c,
                              double rho, double alpha, const EngineOptions& options) {
    check_reversal_args(c, rho, alpha);
    if (delta_grid.empty()) throw ConfigError("empty drift grid");
    const auto null_table = crossing_table(design, 0.0, options);
    ReversalReport r{delta_grid, {}, c, rho, alpha};
    for (double delta : delta_grid) {
        r.rows.push_back(linear_reversal(crossing_table(design, delta, options), null_table, c, rho, alpha));
    }
    return r;
}

ReversalReport reversal_sweep(const GroupDesign& design, const std::vector<double>& delta_grid, double c,
                              double rho, double alpha) {
    check_reversal_args(c, rho, alpha);
    if (delta_grid.empty()) throw ConfigError("empty drift grid");
    const auto null_d = gs_stage_densities(design, 0.0);
    ReversalReport r{delta_grid, {}, c, rho, alpha};
    for (double delta : delta_grid) {
        r.rows.push_back(group_reversal(design, gs_stage_densities(design, delta), null_d, c, rho, alpha));
    }
    return r;
}

}  // namespace overrun
