#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

// Path of the command-line tool and of the example configs, set by CMake.
#ifndef OVERRUN_CLI
#error "OVERRUN_CLI must be defined"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(OVERRUN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& args) {
    const std::string cmd = std::string(OVERRUN_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    pclose(pipe);
    return out;
}

std::string temp_file(const std::string& name, const std::string& text) {
    const std::string path = std::string(OVERRUN_TMP) + "/" + name;
    std::ofstream(path) << text;
    return path;
}

const std::string kConfigs = OVERRUN_CONFIGS;

}  // namespace

TEST_CASE("successful analysis exits with 0") {
    CHECK(run("analyze --config " + kConfigs + "/madit.json") == 0);
    CHECK(run("analyze --config " + kConfigs + "/madit_gs.json --format csv") == 0);
}

TEST_CASE("machine output is reproducible byte for byte") {
    const auto a = capture("analyze --config " + kConfigs + "/madit.json --format machine");
    const auto b = capture("analyze --config " + kConfigs + "/madit.json --format machine");
    CHECK_FALSE(a.empty());
    CHECK(a == b);
    CHECK(a.find("\"two_sided_p\"") != std::string::npos);
    const auto s1 = capture("simulate --config " + kConfigs + "/madit.json --seed 5 --format machine");
    const auto s2 = capture("simulate --config " + kConfigs + "/madit.json --seed 5 --format machine");
    CHECK(s1 == s2);
}

TEST_CASE("config and usage errors exit with 2") {
    CHECK(run("analyze --config /nonexistent.json") == 2);
    CHECK(run("analyze --config " + temp_file("bad.json", "{\"design\": {\"kind\": \"nope\"}}")) == 2);
    CHECK(run("analyze --bogus-flag") == 2);
    CHECK(run("analyze --config " + kConfigs + "/madit.json --format xml") == 2);
    // Outcome inconsistent with the design.
    const auto inside = temp_file("inside.json", R"({
      "design": {"kind": "linear", "upper_intercept": 7.935, "upper_slope": 0.189,
                 "lower_intercept": -7.935, "lower_slope": 0.566},
      "outcome": {"t": 5, "x": 0, "hit": "upper"}})");
    CHECK(run("analyze --config " + inside) == 2);
}

TEST_CASE("numerical failures exit with 3") {
    // The interim p-value saturates at one in double precision far from the
    // drift the overrun data point to, so no bound can be bracketed.
    const auto cfg = temp_file("saturated.json", R"({
      "design": {"kind": "group", "times": [1, 2], "continue_lo": [-3], "continue_hi": [3],
                 "final_lo": -2, "final_hi": 2},
      "outcome": {"stage": 1, "x": -60},
      "overrun": {"t_o": 100, "y": 6000}})");
    CHECK(run("analyze --config " + cfg) == 3);
}

TEST_CASE("output file gets machine format") {
    const std::string out = std::string(OVERRUN_TMP) + "/out.json";
    std::remove(out.c_str());
    REQUIRE(run("analyze --config " + kConfigs + "/madit.json --out " + out) == 0);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == capture("analyze --config " + kConfigs + "/madit.json --format machine"));
}
