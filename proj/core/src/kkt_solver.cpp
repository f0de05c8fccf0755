#include "qpower/kkt_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "qpa_common.hpp"
#include "qpower/error.hpp"
#include "qpower/numeric.hpp"
#include "qpower/zpiora.hpp"
#include "shooting.hpp"

namespace qpower {

PowerCodebook forward_recursion(double p1, double pL, const Multipliers& m, const SystemConfig& cfg,
                                std::optional<std::size_t> levels) {
    m.validate();
    if (!(p1 > pL) || pL < 0.0) throw UsageError("forward recursion needs p1 > pL >= 0");
    if (levels && *levels < 2) throw UsageError("forward recursion needs at least two levels");
    PowerCodebook cb;
    const detail::Shot shot = detail::shoot(p1, pL, m, cfg.c(), levels.value_or(cfg.levels()), &cb.levels);
    if (shot.status != detail::ShotStatus::Complete)
        throw InvalidBracket("recursion left its domain at equation " + std::to_string(shot.index),
                             shot.index);
    cb.levels.push_back(pL);
    return cb;
}

std::vector<double> kkt_residuals(const PowerCodebook& cb, const Multipliers& m,
                                  const SystemConfig& cfg) {
    cb.validate();
    const std::size_t L = cb.size();
    const double c = cfg.c();
    const double pL = cb.last();
    std::vector<double> r(L, std::numeric_limits<double>::quiet_NaN());
    double g_prev = 0.0;
    for (std::size_t j = 1; j < L; ++j) {
        const detail::LevelTerms t = detail::level_terms(cb(j), pL, m);
        if (!t.valid) break;
        const double ej = std::exp(-c / cb(j));
        const double ej1 = cb(j + 1) > 0.0 ? std::exp(-c / cb(j + 1)) : 0.0;
        r[j - 1] = (ej - ej1) * t.A - ej * (c / (cb(j) * cb(j))) * (t.g - g_prev);
        g_prev = t.g;
    }
    const double last = detail::last_level_residual(cb, m, c);
    r[L - 1] = pL > 0.0 ? last : std::max(0.0, last);
    return r;
}

namespace {

// Root of the p_L stationarity residual inside a sign-change bracket of the
// scan grid, searched in ln p_L. Empty if the shooting problem has no
// solution somewhere inside the bracket.
std::optional<PowerCodebook> refine_last_level(double t_a, double h_a, double t_b, double h_b,
                                               const Multipliers& m, const SystemConfig& cfg,
                                               double scale) {
    struct Gap {};
    auto h = [&](double t) {
        const auto cb = detail::codebook_for_last_level(std::exp(t), m, cfg, scale);
        if (!cb) throw Gap{};
        const double value = detail::last_level_residual(*cb, m, cfg.c());
        if (std::isnan(value)) throw Gap{};
        return value;
    };
    try {
        const double ftol = 1e-14 * (m.lambda + m.mu);
        const double t = illinois_root(h, t_a, t_b, h_a, h_b, 1e-15, ftol);
        return detail::codebook_for_last_level(std::exp(t), m, cfg, scale);
    } catch (const Gap&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<PowerCodebook> stationary_codebooks(const Multipliers& m, const SystemConfig& cfg,
                                                const SolverSettings& settings) {
    m.validate();
    if (m.lambda == 0.0 && m.mu == 0.0)
        throw UsageError("codebook problem is unbounded when lambda = mu = 0");
    const double c = cfg.c();
    const double scale = detail::search_scale(m, cfg);
    std::vector<PowerCodebook> found;
    try {
        found.push_back(solve_zpiora_codebook(m, cfg, settings));
    } catch (const Error&) {
        // No boundary point for these multipliers; interior points may remain.
    }

    // Below c/600 the last region has probability e^{-c/pL} < 1e-260 and
    // the problem is numerically the boundary case.
    const double t_min = std::log(c / 600.0);
    const double t_max = std::log(10.0 * scale);
    const int n = settings.restarts * settings.scan_points;
    std::vector<double> ts(n), hs(n);
    for (int i = 0; i < n; ++i) {
        ts[i] = t_min + (t_max - t_min) * i / (n - 1);
        const auto cb = detail::codebook_for_last_level(std::exp(ts[i]), m, cfg, scale);
        hs[i] = cb ? detail::last_level_residual(*cb, m, c) : std::numeric_limits<double>::quiet_NaN();
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (std::isnan(hs[i]) || std::isnan(hs[i + 1])) continue;
        if ((hs[i] > 0.0) == (hs[i + 1] > 0.0)) continue;
        if (auto cb = refine_last_level(ts[i], hs[i], ts[i + 1], hs[i + 1], m, cfg, scale))
            found.push_back(std::move(*cb));
    }
    if (found.empty()) {
        std::vector<double> samples;
        for (int i = 0; i < n; ++i) samples.insert(samples.end(), {std::exp(ts[i]), hs[i]});
        throw NoRootError("no stationary codebook in the p_L search range", samples);
    }
    return found;
}

PowerCodebook solve_codebook(const Multipliers& m, const SystemConfig& cfg,
                             const SolverSettings& settings) {
    const auto candidates = stationary_codebooks(m, cfg, settings);
    const PowerCodebook* best = nullptr;
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& cb : candidates) {
        try {
            const auto report = evaluate_layout(build_layout(cb, m, cfg), cfg);
            const double value = lagrangian(report, m);
            if (value < best_value) {
                best_value = value;
                best = &cb;
            }
        } catch (const StructuralError&) {
        }
    }
    if (!best) throw NoRootError("no stationary codebook yields a valid layout", {});
    return *best;
}

namespace detail {

double max_abs(const std::vector<double>& values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

QpaSolution solve_qpa_with(const SystemConfig& cfg, const SolverSettings& settings,
                           const CodebookSolver& inner, ThresholdVariant variant,
                           const std::string& solver) {
    std::map<std::pair<double, double>, PowerCodebook> cache;
    auto codebook_at = [&](const Multipliers& m) -> const PowerCodebook& {
        const auto key = std::make_pair(m.lambda, m.mu);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, inner(m)).first;
        return it->second;
    };
    const DualResult dual = solve_duals(cfg, settings, [&](const Multipliers& m) {
        const auto report = evaluate_layout(build_layout(codebook_at(m), m, cfg, variant), cfg);
        return BudgetUsage{report.atp_usage, report.aip_usage};
    });

    QpaSolution sol;
    sol.solver = solver;
    sol.multipliers = dual.multipliers;
    sol.codebook = codebook_at(dual.multipliers);
    sol.variant = variant;
    sol.report = evaluate_layout(sol.layout(cfg), cfg);
    auto& d = sol.diagnostics;
    d.dual_evaluations = dual.evaluations;
    d.active = dual.active;
    d.duality_gap = dual.duality_gap;
    d.history = dual.history;
    d.atp_slackness = atp_slackness(sol.multipliers, sol.report.atp_usage, cfg);
    d.aip_slackness = aip_slackness(sol.multipliers, sol.report.aip_usage, cfg);
    return sol;
}

}  // namespace detail

QpaSolution solve_optimal_qpa(const SystemConfig& cfg, const SolverSettings& settings) {
    QpaSolution sol = detail::solve_qpa_with(
        cfg, settings, [&](const Multipliers& m) { return solve_codebook(m, cfg, settings); },
        ThresholdVariant::Exact, "optimal");
    sol.diagnostics.kkt_residual_norm =
        detail::max_abs(kkt_residuals(sol.codebook, sol.multipliers, cfg));
    sol.diagnostics.candidates = stationary_codebooks(sol.multipliers, cfg, settings).size();
    return sol;
}

}  // namespace qpower
