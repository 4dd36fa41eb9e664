/// Acceptance driver: `ews_acceptance --criterion N [--out DIR]` runs one
/// pinned experiment configuration through the runner and prints a single
/// PASS/FAIL line. Exit status 0 means PASS.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ews/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// One runner invocation and the check names (by prefix) it must pass.
struct Run {
    std::string experiment;
    json config;
    std::vector<std::string> checks;  ///< empty: every check of the run
    std::optional<ews::exp::SeedRange> seeds;
};

struct Criterion {
    std::string title;
    std::vector<Run> runs;
};

const std::map<int, Criterion>& criteria() {
    static const std::map<int, Criterion> m{
        {1, {"spectral oracle equivalence", {{"spectral-selftest", json::object(), {"oracle relative error"}}}}},
        {2, {"Lyapunov residual identity", {{"spectral-selftest", json::object(), {"Lyapunov identity residual"}}}}},
        {3, {"divergence exponents", {{"spectral-selftest", json::object(), {"divergence exponent error"}}}}},
        {4,
         {"Neumann heat variance scaling",
          {{"heat-neumann-scaling",
            {{"t_end", 1e3}, {"dt", 1e-2}, {"autocorr", {{"t_end", 0}}}},
            {"closed-form slope", "Monte-Carlo slope"},
            ews::exp::SeedRange{0, 4}}}}},
        {5, {"Dirichlet heat weighted rate and ill-posedness", {{"heat-dirichlet-weighted", {{"alpha", -0.6}}, {}}}}},
        {6,
         {"heat autocorrelation law",
          {{"heat-neumann-scaling",
            {{"autocorr", {{"p", -5.0}, {"t_end", 1e4}, {"max_lag", 10.0}}}},
            {"autocorrelation L2 error"},
            ews::exp::SeedRange{0, 4}}}}},
        {7,
         {"Boussinesq structural zero",
          {{"bouss-eigs", {{"regime", 1}, {"grid", {19, 39}}, {"p_list", {0.055}}}, {}},
           {"bouss-eigs", {{"regime", 2}, {"grid", {19, 39}}, {"p_list", {1.0}}}, {}}}}},
        {8,
         {"pitchfork threshold",
          {{"bouss-branch",
            {{"regime", 1},
             {"p_list", {0.03, 0.055}},
             {"crossing", {{"bracket", {0.055, 0.07}}, {"grids", {19, 39, 29, 59}}}},
             {"expect_threshold", {0.050, 0.066}}},
            {}}}}},
        {9,
         {"saddle-node fold",
          {{"bouss-branch",
            {{"regime", 2}, {"arclength", true}, {"p_list", {0.3, 1.3}}, {"expect_threshold", {0.93, 1.13}}},
            {}}}}},
        {10, {"mirror symmetry of the asymmetric state", {{"bouss-symmetry", {{"p", 0.055}}, {}}}}},
        {11,
         {"variance scaling near the pitchfork",
          {{"bouss-variance",
            {{"regime", 1},
             {"p_list", {0.035, 0.04, 0.045, 0.05, 0.055, 0.06}},
             {"t_end", 1e3},
             {"observables",
              {{{"name", "omega"}, {"kind", "indicator"}, {"field", "omega"}, {"box", {-0.5, -0.2, 3.0, 4.0}},
                {"expect_slope", {0.7, 1.3}}},
               {{"name", "T"}, {"kind", "indicator"}, {"field", "T"}, {"box", {-0.3, -0.05, 3.0, 9.0}},
                {"expect_slope", {0.7, 1.3}}}}}},
            {},
            ews::exp::SeedRange{0, 2}}}}},
        {12,
         {"silenced direction",
          {{"bouss-variance",
            {{"regime", 2},
             {"p_list", {0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
             {"t_end", 1e3},
             {"observables",
              {{{"name", "e2"}, {"kind", "eigen"}, {"index", 2}, {"expect_slope", {0.7, 1.3}}},
               {{"name", "e4"}, {"kind", "eigen"}, {"index", 4}, {"expect_slope", {-1e9, 0.3}}}}}},
            {},
            ews::exp::SeedRange{0, 2}}}}},
        {13,
         {"Boussinesq autocorrelation",
          {{"bouss-autocorr",
            {{"regime", 2}, {"p_list", {0.4, 1.0}}, {"indices", {2}}, {"t_end", 1e3}, {"max_lag", 10.0},
             {"max_l2", 5e-2}},
            {},
            ews::exp::SeedRange{0, 4}}}}},
    };
    return m;
}

bool selected(const std::vector<std::string>& prefixes, const std::string& name) {
    if (prefixes.empty()) return true;
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int number = 0;
    std::string out = "acceptance_out";
    int threads = 1;
    app.add_option("--criterion,-n", number, "Criterion number")->required();
    app.add_option("--out,-o", out, "Directory for experiment outputs")->capture_default_str();
    app.add_option("--threads,-j", threads, "Worker threads")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const auto it = criteria().find(number);
    if (it == criteria().end()) {
        std::cerr << "unknown criterion " << number << '\n';
        return 2;
    }
    const Criterion& c = it->second;
    bool pass = true;
    std::vector<std::string> lines;
    double seconds = 0.0;
    for (std::size_t k = 0; k < c.runs.size(); ++k) {
        const Run& run = c.runs[k];
        const fs::path dir = fs::path(out) / ("criterion" + std::to_string(number) + "_" + std::to_string(k));
        fs::create_directories(dir);
        std::ofstream(dir / "config.json") << run.config.dump(2) << '\n';
        ews::cli::RunOptions opt;
        opt.experiment = run.experiment;
        opt.config = dir / "config.json";
        opt.out = dir;
        opt.seeds = run.seeds;
        opt.threads = threads;
        const auto report = ews::cli::run(opt);
        seconds += report.wall_seconds;
        if (!report.completed) {
            pass = false;
            lines.push_back(run.experiment + " did not complete: " + report.failure);
            continue;
        }
        std::size_t judged = 0;
        for (const auto& chk : report.checks) {
            if (!selected(run.checks, chk.name)) continue;
            ++judged;
            pass = pass && chk.passed;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", chk.value);
            lines.push_back(std::string(chk.passed ? "ok   " : "fail ") + chk.name + " = " + buf + " (" + chk.detail +
                            ")");
        }
        if (judged == 0) {
            pass = false;
            lines.push_back(run.experiment + " produced no matching checks");
        }
    }
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.1f", seconds);
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << number << ": " << c.title << " [" << wall << " s]\n";
    for (const auto& l : lines) std::cout << "    " << l << '\n';
    return pass ? 0 : 1;
}
