#include "qpower/zpiora.hpp"

#include <cmath>

#include "qpa_common.hpp"
#include "qpower/error.hpp"
#include "shooting.hpp"

namespace qpower {

namespace {

void check_multipliers(const Multipliers& m) {
    m.validate();
    if (m.mu == 0.0 && m.lambda == 0.0)
        throw UsageError("zero-power approximation needs lambda > 0 when mu = 0");
}

}  // namespace

PowerCodebook zpiora_forward(double p1, const Multipliers& m, const SystemConfig& cfg,
                             std::optional<std::size_t> levels) {
    check_multipliers(m);
    if (!(p1 > 0.0)) throw UsageError("p1 must be positive");
    if (levels && *levels < 2) throw UsageError("recursion needs at least two levels");
    PowerCodebook cb;
    const detail::Shot shot = detail::shoot(p1, 0.0, m, cfg.c(), levels.value_or(cfg.levels()), &cb.levels);
    if (shot.status != detail::ShotStatus::Complete)
        throw InvalidBracket("recursion left its domain at equation " + std::to_string(shot.index),
                             shot.index);
    cb.levels.push_back(0.0);
    return cb;
}

double zpiora_terminal_residual(const PowerCodebook& cb, const Multipliers& m,
                                const SystemConfig& cfg) {
    const detail::Shot shot = detail::shoot(cb.first(), 0.0, m, cfg.c(), cb.size());
    if (shot.status != detail::ShotStatus::Complete)
        throw InvalidBracket("codebook does not complete the recursion", shot.index);
    return shot.residual;
}

PowerCodebook solve_zpiora_codebook(const Multipliers& m, const SystemConfig& cfg,
                                    const SolverSettings& settings) {
    check_multipliers(m);
    (void)settings;
    const auto p1 = detail::match_first_level(0.0, m, cfg, detail::search_scale(m, cfg));
    if (!p1) throw NoRootError("no sign change of the terminal condition in the p1 bracket", {});
    return zpiora_forward(*p1, m, cfg);
}

QpaSolution solve_zpiora(const SystemConfig& cfg, const SolverSettings& settings) {
    QpaSolution sol = detail::solve_qpa_with(
        cfg, settings,
        [&](const Multipliers& m) { return solve_zpiora_codebook(m, cfg, settings); },
        ThresholdVariant::Zpiora, "zpiora");
    sol.diagnostics.kkt_residual_norm =
        std::fabs(zpiora_terminal_residual(sol.codebook, sol.multipliers, cfg));
    sol.diagnostics.small_b_regime = cfg.bits() == 1;
    return sol;
}

}  // namespace qpower
