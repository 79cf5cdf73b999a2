// overrun: command-line front end.
//
//   overrun analyze   --config FILE [--format human|machine|csv] [--out FILE]
//   overrun eval      --config FILE --mode coverage|reversal [...]
//   overrun reproduce --case ID|all
//   overrun simulate  --config FILE [--seed N]
//
// Exit codes: 0 success, 1 reproduce check failed, 2 bad input or config,
// 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "overrun/config.hpp"
#include "overrun/errors.hpp"
#include "overrun/reproduce.hpp"
#include "overrun/runner.hpp"

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string format = "human";
    std::string mode;
    std::string case_id;
    std::uint64_t seed = 1;
    std::optional<int> steps;
};

void emit(const std::string& text) { std::cout << text << std::flush; }

// The --out file gets a machine-readable rendering: the chosen format, or
// JSON when the terminal format is human.
template <class R>
void emit_file(const Args& a, overrun::Format f, const R& result) {
    if (a.out.empty()) return;
    std::ofstream out(a.out);
    if (!out) throw overrun::ConfigError("cannot write " + a.out);
    out << overrun::render(result, f == overrun::Format::Human ? overrun::Format::Machine : f);
}

overrun::Config load(const Args& a) {
    auto c = overrun::load_config(a.config);
    if (a.steps) c.options.engine.steps = *a.steps;
    return c;
}

int run_analyze(const Args& a) {
    const auto f = overrun::parse_format(a.format);
    const auto config = load(a);
    const auto report = overrun::run_analysis(config);
    emit(overrun::render(report, f, config.options.two_sided));
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw overrun::ConfigError("cannot write " + a.out);
        out << overrun::render(report, f == overrun::Format::Human ? overrun::Format::Machine : f,
                               config.options.two_sided);
    }
    return 0;
}

int run_eval(const Args& a) {
    const auto f = overrun::parse_format(a.format);
    const auto config = load(a);
    std::string mode = a.mode;
    if (mode.empty() && config.eval && config.eval->mode) {
        mode = *config.eval->mode == overrun::EvalMode::Coverage ? "coverage" : "reversal";
    }
    if (mode == "coverage") {
        const auto r = overrun::run_coverage(config);
        emit(overrun::render(r, f));
        emit_file(a, f, r);
        return 0;
    }
    if (mode == "reversal") {
        const auto r = overrun::run_reversal(config);
        emit(overrun::render(r, f));
        emit_file(a, f, r);
        return 0;
    }
    throw overrun::ConfigError("eval needs --mode coverage or --mode reversal");
}

int run_reproduce(const Args& a) {
    const auto f = overrun::parse_format(a.format);
    overrun::EngineOptions engine;
    if (a.steps) engine.steps = *a.steps;
    std::vector<std::string> ids;
    if (a.case_id == "all") {
        ids = overrun::reproduce_case_ids();
    } else {
        ids.push_back(a.case_id);
    }
    bool ok = true;
    std::string file_text;
    for (const auto& id : ids) {
        const auto r = overrun::reproduce(id, engine);
        ok = ok && r.passed();
        emit(overrun::render(r, f));
        file_text += overrun::render(r, f == overrun::Format::Human ? overrun::Format::Machine : f);
    }
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw overrun::ConfigError("cannot write " + a.out);
        out << file_text;
    }
    return ok ? 0 : 1;
}

int run_simulate(const Args& a) {
    const auto f = overrun::parse_format(a.format);
    const auto config = load(a);
    const auto s = overrun::run_simulation(config, a.seed);
    emit(overrun::render(s, f));
    emit_file(a, f, s);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential-trial inference after overrunning"};
    app.require_subcommand(1);
    Args a;

    auto add_common = [&a](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", a.config, "JSON config file");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "also write the result to this file");
        sub->add_option("--format", a.format, "human, machine or csv")
            ->check(CLI::IsMember({"human", "machine", "csv"}));
        sub->add_option("--steps", a.steps, "sub-steps for continuous monitoring")->check(CLI::Range(100, 1000000));
    };

    auto* analyze = app.add_subcommand("analyze", "p-value, estimate and interval for one trial");
    add_common(analyze, true);

    auto* eval = app.add_subcommand("eval", "coverage or reversal sweep over drifts");
    add_common(eval, true);
    eval->add_option("--mode", a.mode, "coverage or reversal")->check(CLI::IsMember({"coverage", "reversal"}));

    auto* reproduce = app.add_subcommand("reproduce", "recompute reference values");
    add_common(reproduce, false);
    reproduce->add_option("--case", a.case_id, "case id, or all")->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trials of a design");
    add_common(simulate, true);
    simulate->add_option("--seed", a.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return run_analyze(a);
        if (*eval) return run_eval(a);
        if (*reproduce) return run_reproduce(a);
        if (*simulate) return run_simulate(a);
    } catch (const overrun::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const overrun::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
