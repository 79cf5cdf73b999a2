#include "overrun/reproduce.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "overrun/design_eval.hpp"
#include "overrun/errors.hpp"
#include "overrun/inference.hpp"

namespace overrun {

namespace cases {

LinearDesign madit() { return LinearDesign::closed(7.935, 0.189, -7.935, 0.566); }
TrialOutcome madit_outcome() { return {12.037, 10.210, Boundary::Upper, {}}; }
OverrunData madit_overrun() {
    OverrunData o;
    o.t_o = 1.240;
    o.y = 2.957;
    return o;
}

LinearDesign madit2() { return LinearDesign::closed(11.77, 0.1273, -11.77, 0.3819); }
TrialOutcome madit2_outcome() { return {45.415, 17.551, Boundary::Upper, {}}; }
OverrunData madit2_overrun() {
    OverrunData o;
    o.t_o = 0.483;
    o.y = 1.441;
    return o;
}

GroupDesign madit_gs() {
    const auto times = GroupDesign::equally_spaced(5, 12.037 * 5.0 / 3.0);
    return GroupDesign::symmetric(times, obf_constant(times, 0.05));
}

LinearDesign triangular() { return LinearDesign::closed(5.99, 0.25, -5.99, 0.75); }

GroupDesign obf() { return GroupDesign::symmetric(GroupDesign::equally_spaced(5, 10.781), 6.6988); }

}  // namespace cases

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

Check near(std::string label, double value, double expected, double tol) {
    return {std::move(label), value, expected - tol, expected + tol, num(expected) + " +- " + num(tol)};
}

Check at_least(std::string label, double value, double bound) {
    return {std::move(label), value, bound, INFINITY, ">= " + num(bound)};
}

Check at_most(std::string label, double value, double bound) {
    return {std::move(label), value, -INFINITY, bound, "<= " + num(bound)};
}

void add_report(std::vector<Check>& out, const std::string& tag, const InferenceReport& r, double p, double p_tol,
                double est, double est_tol, double lo, double hi, double ci_tol, bool hazard) {
    out.push_back(near(tag + " 2-sided p", r.two_sided_p, p, p_tol));
    if (hazard) {
        out.push_back(near(tag + " HR estimate", r.hr_hat, est, est_tol));
        out.push_back(near(tag + " HR lower", r.hr_lo, lo, ci_tol));
        out.push_back(near(tag + " HR upper", r.hr_hi, hi, ci_tol));
    } else {
        out.push_back(near(tag + " drift estimate", r.delta_hat, est, est_tol));
        out.push_back(near(tag + " drift lower", r.ci_lo, lo, ci_tol));
        out.push_back(near(tag + " drift upper", r.ci_hi, hi, ci_tol));
    }
}

CaseResult madit_case(const EngineOptions& engine) {
    CaseResult c{"madit", "MADIT, continuous monitoring", {}};
    AnalysisOptions opt;
    opt.engine = engine;
    const auto without = analyze(cases::madit(), cases::madit_outcome(), std::nullopt, opt);
    const auto with = analyze(cases::madit(), cases::madit_outcome(), cases::madit_overrun(), opt);
    add_report(c.checks, "without", without, 0.0084, 0.0005, 0.786, 0.005, 0.204, 1.361, 0.01, false);
    add_report(c.checks, "with", with, 0.0009, 0.0002, 0.938, 0.005, 0.388, 1.484, 0.01, false);
    c.checks.push_back(near("without HR estimate", without.hr_hat, 0.456, 0.003));
    c.checks.push_back(near("without HR lower", without.hr_lo, 0.256, 0.01));
    c.checks.push_back(near("without HR upper", without.hr_hi, 0.815, 0.01));
    c.checks.push_back(near("with HR estimate", with.hr_hat, 0.391, 0.003));
    c.checks.push_back(near("with HR lower", with.hr_lo, 0.227, 0.01));
    c.checks.push_back(near("with HR upper", with.hr_hi, 0.678, 0.01));
    return c;
}

CaseResult madit2_case(const EngineOptions& engine) {
    CaseResult c{"madit2", "MADIT-II, continuous monitoring", {}};
    AnalysisOptions opt;
    opt.engine = engine;
    const auto without = analyze(cases::madit2(), cases::madit2_outcome(), std::nullopt, opt);
    const auto with = analyze(cases::madit2(), cases::madit2_outcome(), cases::madit2_overrun(), opt);
    add_report(c.checks, "without", without, 0.028, 0.001, 0.708, 0.005, 0.525, 0.962, 0.01, true);
    add_report(c.checks, "with", with, 0.016, 0.001, 0.688, 0.005, 0.511, 0.932, 0.01, true);
    return c;
}

CaseResult madit_gs_case() {
    CaseResult c{"madit-gs", "MADIT as a five-analysis O'Brien-Fleming design", {}};
    const auto design = cases::madit_gs();
    const auto overrun = cases::madit_overrun();
    const double x = cases::madit_outcome().value;
    const auto without = analyze(design, 3, x, std::nullopt);
    const auto with = analyze(design, 3, x, overrun);
    const auto deletion = deletion_analyze(design, 3, x, overrun);
    add_report(c.checks, "without", without, 0.0039, 0.0004, 0.431, 0.01, 0.244, 0.762, 0.015, true);
    add_report(c.checks, "with", with, 0.0004, 0.0002, 0.373, 0.01, 0.217, 0.641, 0.015, true);
    add_report(c.checks, "deletion", deletion, 0.0014, 0.0003, 0.384, 0.01, 0.221, 0.680, 0.015, true);
    return c;
}

CaseResult triangular_case(const EngineOptions& engine) {
    CaseResult c{"triangular-oc", "Triangular test: error rates, power, expected stopping time", {}};
    const auto d = cases::triangular();
    const auto null = crossing_table(d, 0.0, engine);
    const auto alt = crossing_table(d, 1.0, engine);
    const auto design_alt = crossing_table(d, 0.8233, engine);
    const auto mid = crossing_table(d, 0.5, engine);
    c.checks.push_back(near("P(upper) at drift 0", null.upper_total(), 0.025, 0.001));
    c.checks.push_back(near("P(lower) at drift 1", alt.lower_total(), 0.025, 0.001));
    c.checks.push_back(near("power at drift 0.8233", design_alt.upper_total(), 0.9, 0.005));
    c.checks.push_back(near("E(T) at drift 0", expected_stop_time(null), 7.776, 0.02));
    c.checks.push_back(near("E(T) at drift 1", expected_stop_time(alt), 7.776, 0.02));
    c.checks.push_back(near("E(T) at drift 0.8233", expected_stop_time(design_alt), 9.382, 0.02));
    c.checks.push_back(near("E(T) at drift 0.5", expected_stop_time(mid), 11.217, 0.02));
    return c;
}

CaseResult triangular_coverage_case(const EngineOptions& engine) {
    CaseResult c{"triangular-coverage", "Triangular test: coverage with constant overrun t_o = c E(T)", {}};
    const auto d = cases::triangular();
    const double expected_time = expected_stop_time(d, 0.8233, engine);
    struct Column {
        double c;
        double q_lo, q_hi, Q90_lo, Q90_hi, Q95_lo, Q95_hi;
    };
    // Reference ranges widened by 0.003.
    const Column cols[] = {{0.1, 0.484, 0.516, 0.897, 0.911, 0.947, 0.958},
                           {0.5, 0.468, 0.532, 0.896, 0.920, 0.946, 0.963}};
    for (const auto& col : cols) {
        OverrunData model;
        model.model = OverrunModel::Constant;
        model.c = col.c * expected_time;
        const auto r = coverage_sweep(d, model, {0.5}, {0.9, 0.95}, drift_grid(), engine);
        const std::string tag = "c=" + num(col.c) + " ";
        c.checks.push_back(at_least(tag + "min q_.5", r.q_inf[0], col.q_lo));
        c.checks.push_back(at_most(tag + "max q_.5", r.q_sup[0], col.q_hi));
        c.checks.push_back(at_least(tag + "min Q_.9", r.Q_inf[0], col.Q90_lo));
        c.checks.push_back(at_most(tag + "max Q_.9", r.Q_sup[0], col.Q90_hi));
        c.checks.push_back(at_least(tag + "min Q_.95", r.Q_inf[1], col.Q95_lo));
        c.checks.push_back(at_most(tag + "max Q_.95", r.Q_sup[1], col.Q95_hi));
    }
    return c;
}

CaseResult obf_case() {
    CaseResult c{"obf-oc", "O'Brien-Fleming design: horizon, boundary, coverage infima", {}};
    const auto horizon = required_horizon(5, 0.05, 0.9, 1.0);
    c.checks.push_back(near("t_5 for power 0.9 at drift 1", horizon.t_max, 10.781, 0.02));
    c.checks.push_back(near("boundary constant", obf_constant(GroupDesign::equally_spaced(5, 10.781), 0.05), 6.6988,
                            0.003));
    const auto design = cases::obf();
    // The infima sit in narrow dips, so the grid is much finer than the
    // default 0.05.
    const auto grid = drift_grid(-2.5, 2.5, 0.002);
    struct Column {
        const char* name;
        OverrunModel model;
        double c;
        double q, Q90, Q95;
    };
    const Column cols[] = {{"t_o=0.02 t_5", OverrunModel::Constant, 0.02 * 10.781, 0.475, 0.894, 0.947},
                           {"t_o=0.1 t_5", OverrunModel::Constant, 0.1 * 10.781, 0.445, 0.887, 0.943},
                           {"t_o=0.02 t_k", OverrunModel::Proportional, 0.02, 0.478, 0.894, 0.947},
                           {"t_o=0.1 t_k", OverrunModel::Proportional, 0.1, 0.451, 0.888, 0.943}};
    for (const auto& col : cols) {
        OverrunData model;
        model.model = col.model;
        model.c = col.c;
        const auto r = coverage_sweep(design, model, {0.5}, {0.9, 0.95}, grid, FinalStage::Reschedule);
        const std::string tag = std::string(col.name) + " ";
        c.checks.push_back(near(tag + "inf q_.5", r.q_inf[0], col.q, 0.005));
        c.checks.push_back(near(tag + "inf Q_.9", r.Q_inf[0], col.Q90, 0.003));
        c.checks.push_back(near(tag + "inf Q_.95", r.Q_inf[1], col.Q95, 0.003));
    }
    return c;
}

}  // namespace

bool CaseResult::passed() const {
    for (const auto& c : checks) {
        if (!c.pass()) return false;
    }
    return !checks.empty();
}

std::vector<std::string> reproduce_case_ids() {
    return {"madit", "madit2", "madit-gs", "triangular-oc", "triangular-coverage", "obf-oc"};
}

CaseResult reproduce(const std::string& id, const EngineOptions& options) {
    if (id == "madit") return madit_case(options);
    if (id == "madit2") return madit2_case(options);
    if (id == "madit-gs") return madit_gs_case();
    if (id == "triangular-oc") return triangular_case(options);
    if (id == "triangular-coverage") return triangular_coverage_case(options);
    if (id == "obf-oc") return obf_case();
    std::string known;
    for (const auto& k : reproduce_case_ids()) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown case '" + id + "' (known: " + known + ")");
}

std::string render(const CaseResult& r, Format f) {
    std::ostringstream os;
    if (f == Format::Machine) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : r.checks) {
            checks.push_back({{"label", c.label}, {"value", c.value}, {"expected", c.expected}, {"pass", c.pass()}});
        }
        os << nlohmann::json{{"case", r.id}, {"pass", r.passed()}, {"checks", checks}}.dump() << '\n';
        return os.str();
    }
    if (f == Format::Csv) {
        os << "case,label,value,expected,pass\n" << std::setprecision(10);
        for (const auto& c : r.checks) {
            os << r.id << ",\"" << c.label << "\"," << c.value << ",\"" << c.expected << "\"," << (c.pass() ? 1 : 0)
               << '\n';
        }
        return os.str();
    }
    os << r.id << ": " << r.title << '\n';
    for (const auto& c : r.checks) {
        os << "  " << (c.pass() ? "PASS" : "FAIL") << "  " << std::left << std::setw(34) << c.label << std::right
           << std::setw(12) << std::fixed << std::setprecision(5) << c.value << "   expected " << c.expected << '\n';
        os.unsetf(std::ios::fixed);
    }
    os << (r.passed() ? "all checks passed" : "some checks FAILED") << '\n';
    return os.str();
}

}  // namespace overrun
