#pragma once

#include <functional>
#include <string>

#include "qpower/kkt_solver.hpp"

namespace qpower::detail {

using CodebookSolver = std::function<PowerCodebook(const Multipliers&)>;

// Runs the dual loop with `inner` as the per-multiplier codebook solver and
// assembles the closed-form report and slackness diagnostics.
QpaSolution solve_qpa_with(const SystemConfig& cfg, const SolverSettings& settings,
                           const CodebookSolver& inner, ThresholdVariant variant,
                           const std::string& solver);

double max_abs(const std::vector<double>& values);

}  // namespace qpower::detail
