#include "overrun/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "overrun/errors.hpp"

namespace overrun {

namespace {

using nlohmann::json;

// Thin cursor over one JSON object that remembers its path and which keys
// were read, so leftovers can be reported.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(where(key) + ": " + what);
    }

    std::string where(const std::string& key) const {
        if (key.empty()) return path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::optional<double> maybe_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    long long integer(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Block child(const std::string& key) {
        seen_.insert(key);
        return Block(j_.at(key), where(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail(it.key(), "unknown key");
        }
    }

    double need(const std::string& key) {
        if (!has(key)) fail(key, "missing");
        return number(key);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class E>
E choose(Block& b, const std::string& key, std::initializer_list<std::pair<const char*, E>> names, E fallback) {
    if (!b.has(key)) return fallback;
    const auto s = b.text(key);
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (s == name) return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    b.fail(key, "unknown value '" + s + "' (allowed: " + allowed + ")");
}

Design read_design(Block b) {
    const std::string kind = b.has("kind") ? b.text("kind") : "";
    if (kind == "linear") {
        const double au = b.need("upper_intercept");
        const double bu = b.need("upper_slope");
        const double al = b.need("lower_intercept");
        const double bl = b.need("lower_slope");
        const auto t_max = b.maybe_number("t_max");
        b.finish();
        try {
            return t_max ? LinearDesign::truncated(au, bu, al, bl, *t_max) : LinearDesign::closed(au, bu, al, bl);
        } catch (const Error& e) {
            b.fail("", e.what());
        }
    }
    if (kind == "group") {
        GroupDesign d;
        if (!b.has("times")) b.fail("times", "missing");
        d.times = b.numbers("times");
        d.continue_lo = b.has("continue_lo") ? b.numbers("continue_lo") : std::vector<double>{};
        d.continue_hi = b.has("continue_hi") ? b.numbers("continue_hi") : std::vector<double>{};
        d.final_lo = b.need("final_lo");
        d.final_hi = b.need("final_hi");
        b.finish();
        try {
            d.validate();
        } catch (const Error& e) {
            b.fail("", e.what());
        }
        return d;
    }
    if (kind == "obf") {
        // Symmetric |X(t_k)| >= C design with the constant solved for the
        // two-sided level; times given directly, or equally spaced up to
        // t_max, or up to the horizon giving the requested power.
        const double alpha = b.number("alpha", 0.05);
        if (!(alpha > 0.0 && alpha < 1.0)) b.fail("alpha", "must lie in (0, 1)");
        std::vector<double> times;
        if (b.has("times")) {
            times = b.numbers("times");
        } else {
            if (!b.has("stages")) b.fail("stages", "missing (or give times)");
            const auto k = b.integer("stages");
            if (k < 1 || k > 100) b.fail("stages", "must be between 1 and 100");
            if (b.has("t_max")) {
                const double t_max = b.number("t_max");
                if (!(t_max > 0.0)) b.fail("t_max", "must be positive");
                times = GroupDesign::equally_spaced(static_cast<int>(k), t_max);
            } else {
                const double power = b.need("power");
                const double at = b.need("power_delta");
                try {
                    times = required_horizon(static_cast<int>(k), alpha, power, at).times;
                } catch (const DomainError& e) {
                    b.fail("", e.what());
                }
            }
        }
        b.finish();
        try {
            return GroupDesign::symmetric(times, obf_constant(times, alpha));
        } catch (const ConfigError& e) {
            b.fail("", e.what());
        }
    }
    b.fail("kind", "expected \"linear\", \"group\" or \"obf\"");
}

TrialOutcome read_outcome(Block b, const Design& design) {
    TrialOutcome o;
    if (std::holds_alternative<GroupDesign>(design)) {
        const auto& g = std::get<GroupDesign>(design);
        if (!b.has("stage")) b.fail("stage", "missing (group designs)");
        const auto k = b.integer("stage");
        if (k < 1 || k > g.stages()) b.fail("stage", "outside 1.." + std::to_string(g.stages()));
        o.stage = static_cast<int>(k);
        o.time = g.time(*o.stage);
        if (b.has("t") && std::abs(b.number("t") - o.time) > 1e-9 * std::max(1.0, o.time)) {
            b.fail("t", "does not match the time of analysis " + std::to_string(k));
        }
        o.value = b.need("x");
        o.hit = Boundary::Final;
        if (b.has("hit")) {
            o.hit = choose<Boundary>(b, "hit", {{"upper", Boundary::Upper}, {"lower", Boundary::Lower},
                                                {"final", Boundary::Final}}, Boundary::Final);
        }
        b.finish();
        return o;
    }
    o.time = b.need("t");
    o.value = b.need("x");
    if (!b.has("hit")) b.fail("hit", "missing");
    o.hit = choose<Boundary>(b, "hit", {{"upper", Boundary::Upper}, {"lower", Boundary::Lower},
                                        {"final", Boundary::Final}}, Boundary::Upper);
    if (b.has("stage")) b.fail("stage", "only meaningful for group designs");
    b.finish();
    return o;
}

OverrunData read_overrun(Block b) {
    OverrunData o;
    o.t_o = b.number("t_o", 0.0);
    o.y = b.number("y", 0.0);
    o.model = choose<OverrunModel>(b, "model",
                                   {{"observed", OverrunModel::ObservedOnly},
                                    {"constant", OverrunModel::Constant},
                                    {"sqrt", OverrunModel::SqrtProportional},
                                    {"proportional", OverrunModel::Proportional}},
                                   OverrunModel::ObservedOnly);
    o.c = b.maybe_number("c");
    o.rho = b.number("rho", 1.0);
    if (!(o.t_o >= 0.0)) b.fail("t_o", "must be >= 0");
    if (!(o.rho > 0.0)) b.fail("rho", "must be > 0");
    if (o.c && !(*o.c >= 0.0)) b.fail("c", "must be >= 0");
    if (o.model != OverrunModel::ObservedOnly && !o.c) b.fail("c", "required by model");
    b.finish();
    return o;
}

OptionsBlock read_options(Block b) {
    OptionsBlock o;
    o.level = b.number("level", o.level);
    if (!(o.level > 0.0 && o.level < 1.0)) b.fail("level", "must lie in (0, 1)");
    o.delta0 = b.number("delta0", o.delta0);
    o.two_sided = b.boolean("two_sided", o.two_sided);
    o.method = choose<MethodChoice>(b, "method",
                                    {{"auto", MethodChoice::Auto},
                                     {"combination", MethodChoice::Combination},
                                     {"deletion", MethodChoice::Deletion},
                                     {"no-overrun", MethodChoice::NoOverrun}},
                                    MethodChoice::Auto);
    if (b.has("steps")) {
        const auto s = b.integer("steps");
        if (s < 100 || s > 1000000) b.fail("steps", "must be between 100 and 1000000");
        o.engine.steps = static_cast<int>(s);
    }
    o.engine.continuity = choose<Continuity>(b, "continuity",
                                             {{"bridge", Continuity::Bridge},
                                              {"shift", Continuity::Shift},
                                              {"none", Continuity::None}},
                                             Continuity::Bridge);
    b.finish();
    return o;
}

void check_unit(Block& b, const std::string& key, const std::vector<double>& v) {
    for (double x : v) {
        if (!(x > 0.0 && x < 1.0)) b.fail(key, "entries must lie in (0, 1)");
    }
}

EvalBlock read_eval(Block b) {
    EvalBlock e;
    if (b.has("mode")) {
        e.mode = choose<EvalMode>(b, "mode", {{"coverage", EvalMode::Coverage}, {"reversal", EvalMode::Reversal}},
                                  EvalMode::Coverage);
    }
    if (b.has("gammas")) e.gammas = b.numbers("gammas");
    if (b.has("levels")) e.levels = b.numbers("levels");
    check_unit(b, "gammas", e.gammas);
    check_unit(b, "levels", e.levels);
    if (b.has("delta_grid")) {
        const auto& raw = b.raw("delta_grid");
        if (raw.is_array()) {
            e.delta_grid.clear();
            for (const auto& v : raw) {
                if (!v.is_number()) b.fail("delta_grid", "expected numbers");
                e.delta_grid.push_back(v.get<double>());
            }
            if (e.delta_grid.empty()) b.fail("delta_grid", "empty");
        } else {
            Block g(raw, b.where("delta_grid"));
            const double lo = g.need("lo");
            const double hi = g.need("hi");
            const double step = g.need("step");
            g.finish();
            if (!(step > 0.0) || !(hi >= lo) || (hi - lo) / step > 1e6) g.fail("", "invalid grid");
            e.delta_grid = drift_grid(lo, hi, step);
        }
    }
    e.final_stage = choose<FinalStage>(b, "final_stage",
                                       {{"reschedule", FinalStage::Reschedule}, {"combine", FinalStage::Combine}},
                                       FinalStage::Reschedule);
    e.c = b.number("c", e.c);
    e.rho = b.number("rho", e.rho);
    e.alpha = b.number("alpha", e.alpha);
    if (!(e.c > 0.0)) b.fail("c", "must be > 0");
    if (!(e.rho > 0.0)) b.fail("rho", "must be > 0");
    if (!(e.alpha > 0.0 && e.alpha < 1.0)) b.fail("alpha", "must lie in (0, 1)");
    b.finish();
    return e;
}

SimulateBlock read_simulate(Block b) {
    SimulateBlock s;
    s.delta = b.number("delta", 0.0);
    if (b.has("trials")) s.trials = b.integer("trials");
    if (s.trials < 1 || s.trials > 100000000) b.fail("trials", "must be between 1 and 1e8");
    b.finish();
    return s;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error");
    }
    try {
        Block root(j, "");
        if (!root.has("design")) root.fail("design", "missing");
        Config c{read_design(root.child("design")), {}, {}, {}, {}, {}};
        if (root.has("outcome")) c.outcome = read_outcome(root.child("outcome"), c.design);
        if (root.has("overrun")) c.overrun = read_overrun(root.child("overrun"));
        if (root.has("options")) c.options = read_options(root.child("options"));
        if (root.has("eval")) c.eval = read_eval(root.child("eval"));
        if (root.has("simulate")) c.simulate = read_simulate(root.child("simulate"));
        root.finish();
        if (c.outcome && std::holds_alternative<LinearDesign>(c.design)) {
            try {
                c.outcome = checked_outcome(std::get<LinearDesign>(c.design), *c.outcome);
            } catch (const InputError& e) {
                throw ConfigError(std::string("outcome: ") + e.what());
            }
        }
        if (c.outcome && c.outcome->stage) {
            try {
                check_group_outcome(std::get<GroupDesign>(c.design), *c.outcome->stage, c.outcome->value);
            } catch (const InputError& e) {
                throw ConfigError(std::string("outcome: ") + e.what());
            }
        }
        if (c.overrun && c.outcome) {
            try {
                c.overrun->validate(c.outcome->time);
            } catch (const InputError& e) {
                throw ConfigError(std::string("overrun: ") + e.what());
            }
        }
        return c;
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace overrun
