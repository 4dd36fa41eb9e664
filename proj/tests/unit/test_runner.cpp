#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ews/csv.hpp"
#include "ews/experiments.hpp"
#include "ews/parallel.hpp"
#include "ews/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ews_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST(Csv, CellsRoundTripExactly) {
    const double third = 1.0 / 3.0;
    EXPECT_EQ(std::stod(ews::io::format_cell(third)), third);
    EXPECT_EQ(ews::io::format_cell(42LL), "42");
    EXPECT_EQ(ews::io::format_cell(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(ews::io::format_cell(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_THROW(ews::io::format_cell(std::string("a,b")), std::invalid_argument);
}

TEST(Csv, WriterAndReaderAgree) {
    const auto dir = scratch("csv");
    {
        ews::io::CsvWriter w(dir / "t.csv", {"a", "b"});
        w.row({1.5, std::string("x")});
        w.row({2LL, std::string("y")});
        EXPECT_THROW(w.row({1.0}), std::invalid_argument);
        EXPECT_EQ(w.rows(), 2u);
    }
    const auto t = ews::io::read_csv(dir / "t.csv");
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_EQ(t.rows[1][0], "2");
    EXPECT_THROW(t.column("c"), std::out_of_range);
}

TEST(Parallel, VisitsEveryIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(50);
    ews::parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(ews::parallel_for(10, 2,
                                   [](std::size_t i) {
                                       if (i == 7) throw std::domain_error("boom");
                                   }),
                 std::domain_error);
}

TEST(FitLine, RecoversExactLine) {
    const auto f = ews::exp::fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.offset, 1.0, 1e-14);
    EXPECT_NEAR(f.rms, 0.0, 1e-14);
    EXPECT_THROW(ews::exp::fit_line({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(ews::exp::fit_line({1.0, 1.0}, {0.0, 1.0}), std::domain_error);
    EXPECT_THROW(ews::exp::fit_line({0.0, 1.0}, {0.0, std::nan("")}), std::domain_error);
}

TEST(SpectrumMismatch, IgnoresOrderAndDetectsShift) {
    Eigen::VectorXcd a(3), b(3);
    a << std::complex<double>(-1, 2), std::complex<double>(-1, -2), -3.0;
    b << -3.0, std::complex<double>(-1, -2), std::complex<double>(-1, 2);
    EXPECT_NEAR(ews::exp::spectrum_mismatch(a, b), 0.0, 1e-15);
    b(0) = -3.3;
    EXPECT_NEAR(ews::exp::spectrum_mismatch(a, b), 0.1, 1e-12);
}

TEST(SeedRange, ParsesRangesAndSingleSeeds) {
    const auto r = ews::cli::parse_seed_range("3..7");
    EXPECT_EQ(r.first, 3u);
    EXPECT_EQ(r.count(), 5u);
    EXPECT_EQ(ews::cli::parse_seed_range("4").count(), 1u);
    EXPECT_THROW(ews::cli::parse_seed_range("7..3"), std::invalid_argument);
    EXPECT_THROW(ews::cli::parse_seed_range("a..b"), std::invalid_argument);
    EXPECT_THROW(ews::cli::parse_seed_range("-1..2"), std::invalid_argument);
}

TEST(Runner, UnknownExperimentStillWritesManifest) {
    const auto dir = scratch("unknown");
    ews::cli::RunOptions opt;
    opt.experiment = "no-such-thing";
    opt.out = dir;
    const auto r = ews::cli::run(opt);
    EXPECT_FALSE(r.completed);
    EXPECT_EQ(ews::cli::exit_status(r), 2);
    const auto m = manifest(dir);
    EXPECT_EQ(m["status"], "error");
    EXPECT_NE(m["failure_reason"].get<std::string>().find("no-such-thing"), std::string::npos);
}

TEST(Runner, RejectsUnknownConfigKeys) {
    const auto dir = scratch("badkey");
    std::ofstream(dir / "c.json") << R"({"heat": {"modes": 8, "colour": 1}})";
    ews::cli::RunOptions opt;
    opt.experiment = "heat-wellposedness";
    opt.config = dir / "c.json";
    opt.out = dir;
    const auto r = ews::cli::run(opt);
    EXPECT_FALSE(r.completed);
    EXPECT_NE(r.failure.find("heat.colour"), std::string::npos);
    EXPECT_EQ(manifest(dir)["status"], "error");
}

TEST(Runner, RejectsInvalidValuesBeforeRunning) {
    const auto dir = scratch("badvalue");
    std::ofstream(dir / "c.json") << R"({"distances": [1.0, -0.5]})";
    ews::cli::RunOptions opt;
    opt.experiment = "heat-dirichlet-weighted";
    opt.config = dir / "c.json";
    opt.out = dir;
    const auto r = ews::cli::run(opt);
    EXPECT_FALSE(r.completed);
    EXPECT_TRUE(r.files.empty());
}

TEST(Runner, FailedCheckGivesExitStatusOne) {
    const auto dir = scratch("failcheck");
    std::ofstream(dir / "c.json") << R"({"truncations": [4, 5]})";
    ews::cli::RunOptions opt;
    opt.experiment = "heat-wellposedness";
    opt.config = dir / "c.json";
    opt.out = dir;
    const auto r = ews::cli::run(opt);
    ASSERT_TRUE(r.completed) << r.failure;
    EXPECT_FALSE(r.all_passed());
    EXPECT_EQ(ews::cli::exit_status(r), 1);
    const auto m = manifest(dir);
    EXPECT_EQ(m["status"], "check failed");
    EXPECT_EQ(m["config"]["truncations"], json({4, 5}));
    EXPECT_EQ(m["files"], json({"heat_wellposedness.csv"}));
}

TEST(Runner, OutputsAreIndependentOfThreadCount) {
    const auto d1 = scratch("threads1");
    const auto d3 = scratch("threads3");
    std::ofstream(d1 / "c.json") << R"({"p_list": [-0.4, -0.2, -0.1], "t_end": 50, "autocorr": {"t_end": 0}})";
    ews::cli::RunOptions opt;
    opt.experiment = "heat-neumann-scaling";
    opt.config = d1 / "c.json";
    opt.seeds = ews::exp::SeedRange{0, 3};
    opt.out = d1;
    ASSERT_TRUE(ews::cli::run(opt).completed);
    opt.out = d3;
    opt.threads = 3;
    ASSERT_TRUE(ews::cli::run(opt).completed);
    for (const char* f : {"heat_scaling.csv", "heat_scaling_samples.csv", "heat_scaling_fit.csv"})
        EXPECT_EQ(slurp(d1 / f), slurp(d3 / f)) << f;
    EXPECT_EQ(manifest(d3)["config"]["seeds"], json({0, 3}));
}

TEST(Runner, EveryExperimentIsListed) {
    const auto& names = ews::cli::experiment_names();
    for (const char* n : {"heat-neumann-scaling", "heat-dirichlet-weighted", "heat-wellposedness", "bouss-branch",
                          "bouss-eigs", "bouss-variance", "bouss-autocorr", "bouss-symmetry", "spectral-selftest"})
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST(Runner, EigsWritesGriddedFieldsOnRequest) {
    const auto dir = scratch("fields");
    std::ofstream(dir / "c.json") << R"({"grid": [7, 13], "p_list": [0.04], "count": 4,
                                        "dump_state": true, "dump_vectors": [2]})";
    ews::cli::RunOptions opt;
    opt.experiment = "bouss-eigs";
    opt.config = dir / "c.json";
    opt.out = dir;
    const auto r = ews::cli::run(opt);
    ASSERT_TRUE(r.completed) << r.failure;
    const auto t = ews::io::read_csv(dir / "bouss_fields.csv");
    std::map<std::string, std::size_t> count;
    for (const auto& row : t.rows) count[row[t.column("name")] + "/" + row[t.column("field")]]++;
    EXPECT_EQ(count["state/psi"], 9u * 15u);
    EXPECT_EQ(count["state/S"], 9u * 15u);
    EXPECT_EQ(count["right_2/S"], 9u * 15u);
    EXPECT_EQ(count["left_2/omega"], 7u * 13u);
    EXPECT_EQ(count["right_2/psi"], 0u);
}
