#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qpower/baselines.hpp"
#include "qpower/model.hpp"

namespace qpower {

enum class SolverKind { Optimal, Zpiora, Meppr, Glasfa, FullCsi, Asymptotic };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);  // throws ConfigError

struct MonteCarloCheck {
    bool enabled = false;
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
};

// One sweep: the cross product solvers x q_av x bits x p_av.
struct ExperimentConfig {
    double r0_nats = 0.25;
    std::vector<double> p_av_db;
    std::vector<double> q_av_db;
    std::vector<int> bits;
    std::vector<SolverKind> solvers;
    MonteCarloCheck mc;
    SolverSettings solver_settings;
    GlasfaSettings glasfa;

    // Throws ConfigError listing every offending key.
    static ExperimentConfig parse(const std::string& json_text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;
    // Replaces every seed in the configuration.
    void override_seed(std::uint64_t seed);
};

// bits = 0 marks rows with no quantization (full CSI) or the L -> infinity
// limit of the asymptotic curve.
struct ResultRow {
    SolverKind solver = SolverKind::Optimal;
    double p_av_db = 0.0;
    double q_av_db = 0.0;
    int bits = 0;
    std::optional<double> outage;
    std::optional<double> atp;
    std::optional<double> aip;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> outage_mc;
    std::optional<double> outage_mc_stderr;
    std::string error;  // empty on success
    std::string diagnostics;
};

struct ResultSet {
    std::vector<ResultRow> rows;

    bool ok() const;
};

// Rows come back in grid order whatever the number of worker threads.
ResultSet run_experiment(const ExperimentConfig& config, unsigned jobs = 1);
ResultSet run_experiment(const std::filesystem::path& config_path, unsigned jobs = 1);

enum class TableFormat { Csv, Json };

TableFormat table_format_from_string(const std::string& name);
std::string format_table(const ResultSet& results, TableFormat format);
// Throws std::runtime_error when the destination cannot be written.
void emit_table(const ResultSet& results, TableFormat format, const std::filesystem::path& path);
// Reads a table produced by format_table(.., Json); error and diagnostics
// are not part of the table and come back empty.
ResultSet parse_json_table(const std::string& text);

}  // namespace qpower
