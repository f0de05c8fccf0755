#pragma once

#include "qpower/dual.hpp"
#include "qpower/model.hpp"

namespace qpower {

struct FullCsiPerformance {
    double outage = 0.0;
    double atp_usage = 0.0;
    double aip_usage = 0.0;
};

struct FullCsiSolution {
    Multipliers multipliers;
    double outage = 0.0;
    double atp_usage = 0.0;
    double aip_usage = 0.0;
    DualCase active = DualCase::PowerOnly;
    int evaluations = 0;
};

// Truncated channel inversion: c / g1 when lambda + mu g0 < g1 / c, else 0.
double full_csi_power(const PowerGainPair& pair, const Multipliers& m, const SystemConfig& cfg);

// Closed-form outage 1 - e^{-c lambda} / (1 + c mu); budgets by quadrature
// of c E1(c (lambda + mu g0)) against the g0 density. Throws
// UnboundedExpectation when lambda = mu = 0.
FullCsiPerformance full_csi_performance(const Multipliers& m, const SystemConfig& cfg,
                                        double rtol = 1e-9);

FullCsiSolution solve_full_csi_multipliers(const SystemConfig& cfg,
                                           const SolverSettings& settings = {});

}  // namespace qpower
