#include "overrun/runner.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "overrun/errors.hpp"

namespace overrun {

namespace {

using nlohmann::json;

std::string hit_name(Boundary b) {
    switch (b) {
        case Boundary::Upper:
            return "upper";
        case Boundary::Lower:
            return "lower";
        case Boundary::Final:
            return "final";
    }
    return "?";
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string pvalue(double p) {
    std::ostringstream os;
    if (p < 1e-3) {
        os << std::scientific << std::setprecision(3) << p;
    } else {
        os << std::fixed << std::setprecision(5) << p;
    }
    return os.str();
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

const GroupDesign& group_of(const Config& c) { return std::get<GroupDesign>(c.design); }

}  // namespace

Format parse_format(const std::string& name) {
    if (name == "human") return Format::Human;
    if (name == "machine") return Format::Machine;
    if (name == "csv") return Format::Csv;
    throw ConfigError("unknown format '" + name + "' (human, machine, csv)");
}

InferenceReport run_analysis(const Config& config) {
    if (!config.outcome) throw ConfigError("analysis needs an outcome block");
    AnalysisOptions opt;
    opt.level = config.options.level;
    opt.delta0 = config.options.delta0;
    opt.engine = config.options.engine;

    auto overrun = config.overrun;
    const auto choice = config.options.method;
    if (choice == MethodChoice::NoOverrun) overrun.reset();
    if (choice == MethodChoice::Combination && !overrun) {
        throw ConfigError("method combination needs an overrun block");
    }

    if (std::holds_alternative<LinearDesign>(config.design)) {
        if (choice == MethodChoice::Deletion) {
            throw ConfigError("the deletion method applies to group designs only");
        }
        return analyze(std::get<LinearDesign>(config.design), *config.outcome, overrun, opt);
    }
    const auto& g = group_of(config);
    const int stage = *config.outcome->stage;
    if (choice == MethodChoice::Deletion) {
        if (!overrun) throw ConfigError("method deletion needs an overrun block");
        return deletion_analyze(g, stage, config.outcome->value, *overrun, opt);
    }
    return analyze(g, stage, config.outcome->value, overrun, opt);
}

CoverageReport run_coverage(const Config& config) {
    const EvalBlock e = config.eval.value_or(EvalBlock{});
    if (!config.overrun) throw ConfigError("coverage evaluation needs an overrun block (the model)");
    const auto& model = *config.overrun;
    if (std::holds_alternative<LinearDesign>(config.design)) {
        return coverage_sweep(std::get<LinearDesign>(config.design), model, e.gammas, e.levels, e.delta_grid,
                              config.options.engine);
    }
    return coverage_sweep(group_of(config), model, e.gammas, e.levels, e.delta_grid, e.final_stage);
}

ReversalReport run_reversal(const Config& config) {
    const EvalBlock e = config.eval.value_or(EvalBlock{});
    if (std::holds_alternative<LinearDesign>(config.design)) {
        return reversal_sweep(std::get<LinearDesign>(config.design), e.delta_grid, e.c, e.rho, e.alpha,
                              config.options.engine);
    }
    return reversal_sweep(group_of(config), e.delta_grid, e.c, e.rho, e.alpha);
}

SimulationSummary run_simulation(const Config& config, std::uint64_t seed) {
    const SimulateBlock s = config.simulate.value_or(SimulateBlock{});
    SimulationSummary out;
    out.delta = s.delta;
    out.trials = s.trials;
    out.seed = seed;
    if (std::holds_alternative<LinearDesign>(config.design)) {
        const auto& d = std::get<LinearDesign>(config.design);
        SimulationOptions so;
        so.steps = config.options.engine.steps;
        so.continuity = config.options.engine.continuity;
        auto res = simulate_paths(d, s.delta, s.trials, seed, so);
        out.upper_rate = res.rate(Boundary::Upper);
        out.lower_rate = res.rate(Boundary::Lower);
        out.final_rate = res.rate(Boundary::Final);
        out.mean_time = res.mean_time();
        out.time_sd = res.time_sd();
        const auto table = crossing_table(d, s.delta, config.options.engine);
        out.upper_exact = table.upper_total();
        out.lower_exact = table.lower_total();
        out.mean_time_exact = expected_stop_time(table);
        out.outcomes = std::move(res.outcomes);
        return out;
    }
    const auto& g = group_of(config);
    out.outcomes = simulate_group(g, s.delta, s.trials, seed);
    double sum = 0.0, sq = 0.0;
    for (const auto& o : out.outcomes) {
        if (o.hit == Boundary::Upper) out.upper_rate += 1.0;
        if (o.hit == Boundary::Lower) out.lower_rate += 1.0;
        if (o.hit == Boundary::Final) out.final_rate += 1.0;
        sum += o.time;
        sq += o.time * o.time;
    }
    const double n = static_cast<double>(out.outcomes.size());
    out.upper_rate /= n;
    out.lower_rate /= n;
    out.final_rate /= n;
    out.mean_time = sum / n;
    out.time_sd = n > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1))) : 0.0;
    const auto dens = gs_stage_densities(g, s.delta);
    double m = 0.0;
    for (int k = 1; k <= g.stages(); ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        out.upper_exact += dens.upper_stop[i];
        out.lower_exact += dens.lower_stop[i];
        const double stop = k < g.stages() ? dens.upper_stop[i] + dens.lower_stop[i] : dens.reach(k);
        m += stop * g.time(k);
    }
    out.mean_time_exact = m;
    return out;
}

std::string render(const InferenceReport& r, Format f, bool two_sided) {
    std::ostringstream os;
    if (f == Format::Machine) {
        json j{{"method", to_string(r.method)},
               {"delta0", r.delta0},
               {"one_sided_p", r.one_sided_p},
               {"two_sided_p", r.two_sided_p},
               {"level", r.level},
               {"delta_hat", r.delta_hat},
               {"ci_lo", r.ci_lo},
               {"ci_hi", r.ci_hi},
               {"hr_hat", r.hr_hat},
               {"hr_lo", r.hr_lo},
               {"hr_hi", r.hr_hi}};
        os << j.dump() << '\n';
        return os.str();
    }
    if (f == Format::Csv) {
        os << "method,delta0,one_sided_p,two_sided_p,level,delta_hat,ci_lo,ci_hi,hr_hat,hr_lo,hr_hi\n";
        os << std::setprecision(10) << to_string(r.method) << ',' << r.delta0 << ',' << r.one_sided_p << ','
           << r.two_sided_p << ',' << r.level << ',' << r.delta_hat << ',' << r.ci_lo << ',' << r.ci_hi << ','
           << r.hr_hat << ',' << r.hr_lo << ',' << r.hr_hi << '\n';
        return os.str();
    }
    const std::string pct = fixed(100.0 * r.level, 1) + "%";
    os << "method            " << to_string(r.method) << '\n';
    if (two_sided) {
        os << "p (2-sided)       " << pvalue(r.two_sided_p) << "   (1-sided " << pvalue(r.one_sided_p)
           << ", drift " << fixed(r.delta0, 4) << ")\n";
    } else {
        os << "p (1-sided)       " << pvalue(r.one_sided_p) << "   (drift " << fixed(r.delta0, 4) << ")\n";
    }
    os << "drift estimate    " << fixed(r.delta_hat, 4) << "   " << pct << " CI (" << fixed(r.ci_lo, 4) << ", "
       << fixed(r.ci_hi, 4) << ")\n";
    os << "hazard ratio      " << fixed(r.hr_hat, 4) << "   " << pct << " CI (" << fixed(r.hr_lo, 4) << ", "
       << fixed(r.hr_hi, 4) << ")\n";
    return os.str();
}

std::string render(const CoverageReport& r, Format f) {
    std::ostringstream os;
    if (f == Format::Machine) {
        json rows = json::array();
        for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
            rows.push_back({{"delta", r.delta_grid[i]}, {"q", r.q[i]}, {"Q", r.Q[i]}});
        }
        json j{{"gammas", r.gammas}, {"levels", r.levels}, {"rows", rows},
               {"q_inf", r.q_inf},   {"q_sup", r.q_sup},   {"Q_inf", r.Q_inf}, {"Q_sup", r.Q_sup}};
        os << j.dump() << '\n';
        return os.str();
    }
    if (f == Format::Csv) {
        os << "delta";
        for (double g : r.gammas) os << ",q_" << g;
        for (double l : r.levels) os << ",Q_" << l;
        os << '\n' << std::setprecision(10);
        for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
            os << r.delta_grid[i];
            for (double v : r.q[i]) os << ',' << v;
            for (double v : r.Q[i]) os << ',' << v;
            os << '\n';
        }
        return os.str();
    }
    os << pad("delta", 8);
    for (double g : r.gammas) os << pad("q_" + fixed(g, 3), 10);
    for (double l : r.levels) os << pad("Q_" + fixed(l, 3), 10);
    os << '\n';
    for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
        os << pad(fixed(r.delta_grid[i], 3), 8);
        for (double v : r.q[i]) os << pad(fixed(v, 4), 10);
        for (double v : r.Q[i]) os << pad(fixed(v, 4), 10);
        os << '\n';
    }
    os << pad("inf", 8);
    for (double v : r.q_inf) os << pad(fixed(v, 4), 10);
    for (double v : r.Q_inf) os << pad(fixed(v, 4), 10);
    os << '\n' << pad("sup", 8);
    for (double v : r.q_sup) os << pad(fixed(v, 4), 10);
    for (double v : r.Q_sup) os << pad(fixed(v, 4), 10);
    os << '\n';
    return os.str();
}

std::string render(const ReversalReport& r, Format f) {
    std::ostringstream os;
    if (f == Format::Machine) {
        json rows = json::array();
        for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
            const auto& v = r.rows[i];
            rows.push_back({{"delta", r.delta_grid[i]},
                            {"reject_to_accept", v.reject_to_accept},
                            {"accept_to_reject", v.accept_to_reject},
                            {"pow", v.power},
                            {"ovpow", v.overrun_power}});
        }
        json j{{"c", r.c}, {"rho", r.rho}, {"alpha", r.alpha}, {"rows", rows}};
        os << j.dump() << '\n';
        return os.str();
    }
    if (f == Format::Csv) {
        os << "delta,reject_to_accept,accept_to_reject,pow,ovpow\n" << std::setprecision(10);
        for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
            const auto& v = r.rows[i];
            os << r.delta_grid[i] << ',' << v.reject_to_accept << ',' << v.accept_to_reject << ',' << v.power
               << ',' << v.overrun_power << '\n';
        }
        return os.str();
    }
    os << "c = " << r.c << ", rho = " << r.rho << ", alpha = " << r.alpha << '\n';
    os << pad("delta", 8) << pad("P(R->A)", 10) << pad("P(A->R)", 10) << pad("pow", 10) << pad("ovpow", 10)
       << '\n';
    double worst = 0.0;
    for (std::size_t i = 0; i < r.delta_grid.size(); ++i) {
        const auto& v = r.rows[i];
        worst = std::max(worst, v.power - v.overrun_power);
        os << pad(fixed(r.delta_grid[i], 3), 8) << pad(fixed(v.reject_to_accept, 5), 10)
           << pad(fixed(v.accept_to_reject, 5), 10) << pad(fixed(v.power, 4), 10)
           << pad(fixed(v.overrun_power, 4), 10) << '\n';
    }
    os << "largest power loss " << fixed(worst, 5) << '\n';
    return os.str();
}

std::string render(const SimulationSummary& s, Format f) {
    std::ostringstream os;
    if (f == Format::Csv) {
        os << "trial,time,value,hit,stage\n" << std::setprecision(10);
        for (std::size_t i = 0; i < s.outcomes.size(); ++i) {
            const auto& o = s.outcomes[i];
            os << i + 1 << ',' << o.time << ',' << o.value << ',' << hit_name(o.hit) << ','
               << (o.stage ? std::to_string(*o.stage) : std::string()) << '\n';
        }
        return os.str();
    }
    if (f == Format::Machine) {
        json j{{"delta", s.delta},         {"trials", s.trials},         {"seed", s.seed},
               {"upper_rate", s.upper_rate}, {"lower_rate", s.lower_rate}, {"final_rate", s.final_rate},
               {"mean_time", s.mean_time}, {"time_sd", s.time_sd},       {"upper_exact", s.upper_exact},
               {"lower_exact", s.lower_exact}, {"mean_time_exact", s.mean_time_exact}};
        os << j.dump() << '\n';
        return os.str();
    }
    const double n = static_cast<double>(s.trials);
    auto se = [n](double p) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); };
    os << "trials " << s.trials << "  drift " << s.delta << "  seed " << s.seed << '\n';
    os << pad("", 12) << pad("simulated", 12) << pad("s.e.", 10) << pad("numerical", 12) << '\n';
    os << pad("P(upper)", 12) << pad(fixed(s.upper_rate, 5), 12) << pad(fixed(se(s.upper_rate), 5), 10)
       << pad(fixed(s.upper_exact, 5), 12) << '\n';
    os << pad("P(lower)", 12) << pad(fixed(s.lower_rate, 5), 12) << pad(fixed(se(s.lower_rate), 5), 10)
       << pad(fixed(s.lower_exact, 5), 12) << '\n';
    os << pad("E(T)", 12) << pad(fixed(s.mean_time, 4), 12) << pad(fixed(s.time_sd / std::sqrt(n), 4), 10)
       << pad(fixed(s.mean_time_exact, 4), 12) << '\n';
    return os.str();
}

}  // namespace overrun
