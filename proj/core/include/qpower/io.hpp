#pragma once

#include <string>

#include "qpower/kkt_solver.hpp"

namespace qpower {

// JSON documents shared by the solvers and the command-line tool. Layouts
// carry {levels, lambda, mu, v, s, variant}, with null for unbounded
// thresholds and for v_L when the last level is zero.
std::string layout_to_json(const QuantizerLayout& layout, int indent = 2);
std::string report_to_json(const PerformanceReport& report, int indent = 2);

// A solution together with the system it was solved for, so it can be
// re-evaluated later without the original command line.
struct StoredSolution {
    SystemConfig config;
    QpaSolution solution;
};

std::string solution_to_json(const QpaSolution& solution, const SystemConfig& cfg, int indent = 2);
// Throws ConfigError naming missing or malformed keys.
StoredSolution solution_from_json(const std::string& text);

std::string to_string(EstimateSource source);
std::string to_string(DualCase active);

}  // namespace qpower
