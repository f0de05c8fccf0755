#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpower/error.hpp"
#include "qpower/experiment.hpp"
#include "qpower/io.hpp"

using namespace qpower;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("qpower_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

ResultRow sample_row() {
    ResultRow r;
    r.solver = SolverKind::Optimal;
    r.p_av_db = 10.0;
    r.q_av_db = 0.0;
    r.bits = 2;
    r.outage = 0.19288564767895477;
    r.atp = 1.1;
    r.aip = 1.0;
    r.lambda = 0.0;
    r.mu = 0.17928206060600765;
    return r;
}

}  // namespace

TEST(ExperimentConfig, ParsesRangesAndOverrides) {
    const auto c = ExperimentConfig::parse(R"({
        "r0_nats": 0.25, "p_av_db": {"start": -10, "stop": 10, "step": 5}, "q_av_db": [0],
        "bits": [2], "solvers": ["optimal", "full-csi"],
        "mc": {"enabled": true, "samples": 5000, "seed": 3},
        "solver_settings": {"restarts": 3, "dual_method": "subgradient", "glasfa": {"k0": 10}}})");
    EXPECT_EQ(c.p_av_db, (std::vector<double>{-10, -5, 0, 5, 10}));
    EXPECT_EQ(c.solver_settings.restarts, 3);
    EXPECT_EQ(c.solver_settings.dual_method, DualMethod::Subgradient);
    EXPECT_EQ(c.glasfa.k0, 10.0);
    EXPECT_TRUE(c.mc.enabled);
    EXPECT_EQ(c.mc.seed, 3u);
}

TEST(ExperimentConfig, EmptySolverListRejected) {
    try {
        ExperimentConfig::parse(R"({"p_av_db": [0], "q_av_db": [0], "bits": [1], "solvers": []})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.keys(), std::vector<std::string>{"solvers"});
    }
}

TEST(ExperimentConfig, ListsEveryOffendingKey) {
    try {
        ExperimentConfig::parse(R"({"p_av_db": "high", "bits": [1.5], "solvers": ["magic"],
                                    "colour": 1, "solver_settings": {"restarts": "many"}})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const auto& k = e.keys();
        for (const char* key : {"p_av_db", "q_av_db", "bits", "solvers", "colour", "solver_settings.restarts"})
            EXPECT_NE(std::find(k.begin(), k.end(), key), k.end()) << key;
    }
}

TEST(ExperimentConfig, ShippedPresetsValidate) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(QPOWER_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(ExperimentConfig::load(entry.path())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 5);
}

TEST(RunExperiment, OutageFallsAndFloorsWithPowerBudget) {
    const auto c = ExperimentConfig::parse(R"({
        "p_av_db": {"start": -10, "stop": 10, "step": 5}, "q_av_db": [0], "bits": [2, 4],
        "solvers": ["optimal", "full-csi"]})");
    const auto res = run_experiment(c);
    ASSERT_TRUE(res.ok());
    ASSERT_EQ(res.rows.size(), 15u);  // 2 x 5 quantized + 5 full CSI
    for (std::size_t start : {0u, 5u, 10u}) {
        for (std::size_t i = 1; i < 5; ++i)
            EXPECT_LE(*res.rows[start + i].outage, *res.rows[start + i - 1].outage + 1e-12);
        // Once the interference budget binds alone, more power changes nothing.
        EXPECT_NEAR(*res.rows[start + 4].outage, *res.rows[start + 3].outage, 1e-9);
    }
    EXPECT_EQ(res.rows[10].bits, 0);
}

TEST(RunExperiment, AsymptoticCurveSaturates) {
    const auto c = ExperimentConfig::parse(R"({
        "p_av_db": [10], "q_av_db": [0], "bits": [1,2,3,4,5,6,7,8,9,10,11,12],
        "solvers": ["asymptotic"]})");
    const auto res = run_experiment(c);
    ASSERT_TRUE(res.ok());
    EXPECT_LT(std::fabs(*res.rows[7].outage - *res.rows[11].outage), 1e-3);
}

TEST(RunExperiment, RowOrderIndependentOfWorkers) {
    const auto c = ExperimentConfig::parse(R"({
        "p_av_db": [-5, 0, 5], "q_av_db": [-5, 0], "bits": [1, 2],
        "solvers": ["zpiora", "full-csi"], "mc": {"enabled": true, "samples": 20000, "seed": 4}})");
    const auto a = format_table(run_experiment(c, 1), TableFormat::Csv);
    const auto b = format_table(run_experiment(c, 3), TableFormat::Csv);
    EXPECT_EQ(a, b);
}

TEST(RunExperiment, SolverFailureStaysOnItsRow) {
    // A single subgradient step cannot converge; the failure is recorded on
    // the row and the remaining rows still run.
    auto c = ExperimentConfig::parse(R"({
        "p_av_db": [0], "q_av_db": [0], "bits": [1], "solvers": ["optimal", "full-csi"]})");
    c.solver_settings.max_iterations = 1;
    c.solver_settings.dual_method = DualMethod::Subgradient;
    const auto res = run_experiment(c);
    ASSERT_EQ(res.rows.size(), 2u);
    EXPECT_FALSE(res.rows[0].error.empty());
    EXPECT_FALSE(res.ok());
}

TEST(EmitTable, OneRowCsvHasTwoLines) {
    ResultSet rs;
    rs.rows.push_back(sample_row());
    const auto text = format_table(rs, TableFormat::Csv);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "solver,p_av_db,q_av_db,bits,outage,atp,aip,lambda,mu,outage_mc,outage_mc_stderr");
    EXPECT_NE(text.find("optimal,10,0,2,0.192885647679,1.1,1,0,0.179282060606,,"), std::string::npos);
}

TEST(EmitTable, ByteIdenticalFiles) {
    ResultSet rs;
    rs.rows.push_back(sample_row());
    rs.rows.push_back(sample_row());
    rs.rows[1].outage_mc = 0.1931;
    rs.rows[1].outage_mc_stderr = 0.0004;
    const auto dir = scratch_dir();
    for (auto fmt : {TableFormat::Csv, TableFormat::Json}) {
        emit_table(rs, fmt, dir / "a.out");
        emit_table(rs, fmt, dir / "b.out");
        EXPECT_EQ(slurp(dir / "a.out"), slurp(dir / "b.out"));
    }
    fs::remove_all(dir);
}

TEST(EmitTable, JsonRoundTrip) {
    ResultSet rs;
    rs.rows.push_back(sample_row());
    rs.rows.push_back(sample_row());
    rs.rows[1].solver = SolverKind::FullCsi;
    rs.rows[1].bits = 0;
    rs.rows[1].outage_mc = 0.0858;
    rs.rows[1].outage_mc_stderr = 2.8e-4;
    const auto text = format_table(rs, TableFormat::Json);
    const auto back = parse_json_table(text);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(format_table(back, TableFormat::Json), text);
    EXPECT_EQ(format_table(back, TableFormat::Csv), format_table(rs, TableFormat::Csv));
    EXPECT_EQ(back.rows[1].solver, SolverKind::FullCsi);
    EXPECT_FALSE(back.rows[0].outage_mc.has_value());
    EXPECT_NEAR(*back.rows[0].outage, 0.19288564767895477, 1e-12);
}

TEST(EmitTable, UnwritableDestination) {
    ResultSet rs;
    rs.rows.push_back(sample_row());
    EXPECT_THROW(emit_table(rs, TableFormat::Csv, "/nonexistent-dir/x.csv"), std::runtime_error);
    EXPECT_THROW(emit_table(ResultSet{}, TableFormat::Csv, "/tmp/x.csv"), UsageError);
}

TEST(SolutionJson, RoundTripRebuildsLayout) {
    const auto cfg = SystemConfig::from_db(0.25, 10.0, 0.0, 2);
    const auto sol = solve_optimal_qpa(cfg);
    const auto stored = solution_from_json(solution_to_json(sol, cfg));
    EXPECT_EQ(stored.config.p_av(), cfg.p_av());
    EXPECT_EQ(stored.solution.codebook.levels, sol.codebook.levels);
    EXPECT_EQ(stored.solution.multipliers.mu, sol.multipliers.mu);
    EXPECT_EQ(stored.solution.report.outage, sol.report.outage);
    EXPECT_THROW(solution_from_json("{\"solver\": \"optimal\"}"), ConfigError);
}

TEST(SolutionJson, UnboundedThresholdsAreNull) {
    const SystemConfig cfg(0.25, 1.0, 1.0, 1);
    const auto text = layout_to_json(build_layout(PowerCodebook{{2.0, 0.5}}, {0.3, 0.0}, cfg), -1);
    EXPECT_NE(text.find("\"s\":[null]"), std::string::npos) << text;
}

#ifdef QPOWER_CLI_PATH
TEST(Cli, SweepIsByteIdenticalAcrossRuns) {
    const auto dir = scratch_dir();
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"p_av_db": [-5, 5], "q_av_db": [0], "bits": [1, 2], "solvers": ["optimal", "meppr"],
                   "mc": {"enabled": true, "samples": 20000, "seed": 2}})";
    }
    const std::string cli = QPOWER_CLI_PATH;
    for (const char* out : {"a.csv", "b.csv"}) {
        const std::string cmd = cli + " sweep --config " + (dir / "cfg.json").string() + " --out " +
                                (dir / out).string() + " --seed 5 --jobs 2";
        ASSERT_EQ(std::system(cmd.c_str()), 0) << cmd;
    }
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    fs::remove_all(dir);
}

TEST(Cli, SolveThenVerify) {
    const auto dir = scratch_dir();
    const std::string cli = QPOWER_CLI_PATH;
    const auto sol = (dir / "sol.json").string();
    ASSERT_EQ(std::system((cli + " solve --solver zpiora --bits 3 --p-av-db 5 --q-av-db 0 --out " + sol).c_str()), 0);
    EXPECT_EQ(std::system((cli + " verify " + sol + " --samples 200000 --seed 3 --out " + (dir / "v.json").string()).c_str()), 0);
    EXPECT_NE(slurp(dir / "v.json").find("\"within_band\": true"), std::string::npos);
    EXPECT_NE(std::system((cli + " sweep --config " + (dir / "missing.json").string() + " 2>/dev/null").c_str()), 0);
    fs::remove_all(dir);
}
#endif
