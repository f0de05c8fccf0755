#pragma once

#include <functional>
#include <vector>

#include "qpower/model.hpp"

namespace qpower {

struct BudgetUsage {
    double atp = 0.0;
    double aip = 0.0;
};

struct DualIterate {
    double lambda = 0.0;
    double mu = 0.0;
    double atp = 0.0;
    double aip = 0.0;
};

enum class DualCase { PowerOnly, InterferenceOnly, Both };

struct DualResult {
    Multipliers multipliers;
    BudgetUsage usage;
    DualCase active = DualCase::PowerOnly;
    int evaluations = 0;
    // The inner minimiser jumped between stationary points, so no
    // multiplier meets the active budget with equality; the feasible side
    // of the jump is returned.
    bool duality_gap = false;
    std::vector<DualIterate> history;
};

// Maps multipliers to the budget usage of the inner minimiser.
using BudgetOracle = std::function<BudgetUsage(const Multipliers&)>;

// Outer dual loop with the case split of the KKT analysis:
//   p_av <= q_av : mu = 0, lambda from ATP(lambda) = p_av;
//   otherwise    : lambda = 0, mu from AIP(mu) = q_av, accepted if
//                  ATP <= p_av; else both constraints are active.
// settings.dual_method picks bracketing root finds (default) or the
// projected subgradient iteration with alpha_l = alpha0 / l.
DualResult solve_duals(const SystemConfig& cfg, const SolverSettings& settings,
                       const BudgetOracle& oracle);

// Complementary slackness residuals lambda (p_av - ATP), mu (q_av - AIP).
double atp_slackness(const Multipliers& m, double atp, const SystemConfig& cfg);
double aip_slackness(const Multipliers& m, double aip, const SystemConfig& cfg);

}  // namespace qpower
