#include "qpower/full_csi.hpp"

#include <cmath>

#include "qpower/error.hpp"
#include "qpower/numeric.hpp"

namespace qpower {

double full_csi_power(const PowerGainPair& pair, const Multipliers& m, const SystemConfig& cfg) {
    const double c = cfg.c();
    if (!(pair.g1 > 0.0)) return 0.0;
    return (m.lambda + m.mu * pair.g0 < pair.g1 / c) ? c / pair.g1 : 0.0;
}

FullCsiPerformance full_csi_performance(const Multipliers& m, const SystemConfig& cfg, double rtol) {
    m.validate();
    if (m.lambda == 0.0 && m.mu == 0.0)
        throw UnboundedExpectation("lambda = mu = 0: channel inversion has unbounded average power");
    const double c = cfg.c();
    FullCsiPerformance perf;
    perf.outage = -std::expm1(-c * m.lambda - std::log1p(c * m.mu));

    if (m.mu == 0.0) {
        // The power does not depend on g0, so both budgets collapse to c E1(c lambda).
        perf.atp_usage = c * expint_e1(c * m.lambda);
        perf.aip_usage = perf.atp_usage;
        return perf;
    }
    auto e1_at = [&](double g0) { return expint_e1(c * (m.lambda + m.mu * g0)); };
    perf.atp_usage = c * integrate_exp_weight(e1_at, rtol);
    perf.aip_usage = c * integrate_exp_weight([&](double g0) { return g0 * e1_at(g0); }, rtol);
    return perf;
}

FullCsiSolution solve_full_csi_multipliers(const SystemConfig& cfg, const SolverSettings& settings) {
    const DualResult dual = solve_duals(cfg, settings, [&](const Multipliers& m) {
        const FullCsiPerformance perf = full_csi_performance(m, cfg);
        return BudgetUsage{perf.atp_usage, perf.aip_usage};
    });
    const FullCsiPerformance perf = full_csi_performance(dual.multipliers, cfg);
    FullCsiSolution sol;
    sol.multipliers = dual.multipliers;
    sol.outage = perf.outage;
    sol.atp_usage = perf.atp_usage;
    sol.aip_usage = perf.aip_usage;
    sol.active = dual.active;
    sol.evaluations = dual.evaluations;
    return sol;
}

}  // namespace qpower
