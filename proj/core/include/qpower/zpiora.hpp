#pragma once

#include "qpower/kkt_solver.hpp"

namespace qpower {

// Zero-power-in-outage approximation: p_L is pinned to 0, thresholds
// s'_j = 1/(mu p_j) - lambda/mu, and the recursion starts from p_0 = 1/lambda
// (fhat_0 = 1). Returns p_1..p_{L-1} followed by 0. Throws InvalidBracket
// at the first equation that leaves its domain.
// `levels` overrides cfg.levels().
PowerCodebook zpiora_forward(double p1, const Multipliers& m, const SystemConfig& cfg,
                             std::optional<std::size_t> levels = std::nullopt);

// Terminal condition 1 - R_{L-1} of the reduced system; zero at the solution.
double zpiora_terminal_residual(const PowerCodebook& cb, const Multipliers& m,
                                const SystemConfig& cfg);

PowerCodebook solve_zpiora_codebook(const Multipliers& m, const SystemConfig& cfg,
                                    const SolverSettings& settings = {});

QpaSolution solve_zpiora(const SystemConfig& cfg, const SolverSettings& settings = {});

}  // namespace qpower
