#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "qpa_common.hpp"
#include "qpower/baselines.hpp"
#include "qpower/error.hpp"
#include "qpower/full_csi.hpp"
#include "qpower/numeric.hpp"

namespace qpower {

namespace {

// A_j without the mu = 0 admissibility requirement: when mu = 0 the
// equal-power system only involves A_j = lambda.
std::optional<double> weight_term(double p, double pL, const Multipliers& m) {
    if (m.mu == 0.0) return m.lambda;
    const double s = 1.0 / (m.mu * (p - pL)) - m.lambda / m.mu;
    if (!(s > 0.0)) return std::nullopt;
    return -m.lambda * std::expm1(-s) + m.mu * phi2(s);
}

double share(const Multipliers& m, const SystemConfig& cfg) {
    return (m.lambda * cfg.p_av() + m.mu * cfg.q_av()) / static_cast<double>(cfg.levels());
}

// Residuals relative to K, in log-power coordinates.
std::optional<Eigen::VectorXd> relative_residual(const Eigen::VectorXd& x, const Multipliers& m,
                                                 const SystemConfig& cfg, double K) {
    const Eigen::Index L = x.size();
    const double c = cfg.c();
    Eigen::VectorXd p = x.array().exp();
    for (Eigen::Index j = 0; j + 1 < L; ++j)
        if (!(p[j] > p[j + 1])) return std::nullopt;
    Eigen::VectorXd r(L);
    NeumaierSum sum;
    for (Eigen::Index j = 0; j + 1 < L; ++j) {
        const auto A = weight_term(p[j], p[L - 1], m);
        if (!A) return std::nullopt;
        const double delta = std::exp(-c / p[j]) - std::exp(-c / p[j + 1]);
        sum += delta * *A;
        r[j] = p[j] * delta * *A / K - 1.0;
    }
    r[L - 1] = p[L - 1] * (m.lambda + m.mu - sum.value()) / K - 1.0;
    if (!r.allFinite()) return std::nullopt;
    return r;
}

struct FamilyPoint {
    Multipliers m;
    PowerCodebook cb;
    PerformanceReport report;
};

// Starting levels for Newton: the stationary codebook at the same
// multipliers, with a positive last level.
PowerCodebook newton_guess(const Multipliers& m, const SystemConfig& cfg) {
    PowerCodebook guess = solve_codebook(m, cfg);
    const std::size_t L = guess.size();
    if (guess.levels[L - 1] < 0.3 * guess.levels[L - 2]) guess.levels[L - 1] = 0.3 * guess.levels[L - 2];
    return guess;
}

std::optional<PowerCodebook> try_solve(const Multipliers& m, const SystemConfig& cfg,
                                       const PowerCodebook* warm) {
    if (warm) {
        try {
            return solve_meppr_codebook(m, cfg, *warm);
        } catch (const Error&) {
        }
    }
    try {
        return solve_meppr_codebook(m, cfg, newton_guess(m, cfg));
    } catch (const Error&) {
        return std::nullopt;
    }
}

// Lambda that brings ATP to the budget for fixed mu, if any.
std::optional<FamilyPoint> power_matched_point(double mu, const SystemConfig& cfg,
                                               const PowerCodebook* warm) {
    const double P = cfg.p_av();
    std::optional<FamilyPoint> lo_pt, hi_pt;  // ATP above / below budget
    PowerCodebook last = warm ? *warm : PowerCodebook{};
    auto at = [&](double lambda) -> std::optional<FamilyPoint> {
        const Multipliers m{lambda, mu};
        auto cb = try_solve(m, cfg, last.levels.empty() ? nullptr : &last);
        if (!cb) return std::nullopt;
        last = *cb;
        try {
            return FamilyPoint{m, *cb, evaluate_layout(build_layout(*cb, m, cfg), cfg)};
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    double t_lo = std::log(1e-3 / P), t_hi = std::log(1e3 / P);
    for (int i = 0; i <= 24; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / 24.0;
        auto pt = at(std::exp(t));
        if (!pt) continue;
        if (pt->report.atp_usage > P) {
            lo_pt = pt;
        } else {
            hi_pt = pt;
            break;
        }
    }
    if (!lo_pt || !hi_pt) return hi_pt;
    for (int it = 0; it < 60; ++it) {
        const double lm = std::sqrt(lo_pt->m.lambda * hi_pt->m.lambda);
        auto pt = at(lm);
        if (!pt) break;
        if (pt->report.atp_usage > P)
            lo_pt = pt;
        else
            hi_pt = pt;
        if (std::fabs(hi_pt->report.atp_usage - P) < 1e-10 * P) break;
    }
    return hi_pt;
}

}  // namespace

std::vector<double> meppr_residuals(const PowerCodebook& cb, const Multipliers& m,
                                    const SystemConfig& cfg) {
    const std::size_t L = cb.size();
    const double K = share(m, cfg);
    Eigen::VectorXd x(L);
    for (std::size_t j = 0; j < L; ++j) x[j] = std::log(cb.levels[j]);
    const auto r = relative_residual(x, m, cfg, K);
    if (!r) throw StructuralError("codebook outside the domain of the equal-power system", 0);
    std::vector<double> out(L);
    for (std::size_t j = 0; j < L; ++j) out[j] = (*r)[j] * K;
    return out;
}

PowerCodebook solve_meppr_codebook(const Multipliers& m, const SystemConfig& cfg,
                                   const PowerCodebook& guess) {
    m.validate();
    const std::size_t L = guess.size();
    if (L != cfg.levels()) throw UsageError("initial guess has the wrong number of levels");
    if (!(guess.last() > 0.0)) throw UsageError("initial guess needs a positive last level");
    const double K = share(m, cfg);
    if (!(K > 0.0)) throw UsageError("equal-power share is zero");

    Eigen::VectorXd x(L);
    for (std::size_t j = 0; j < L; ++j) x[j] = std::log(guess.levels[j]);
    auto r = relative_residual(x, m, cfg, K);
    if (!r) throw InvalidBracket("initial guess outside the domain of the equal-power system", 0);

    const auto n = static_cast<Eigen::Index>(L);
    Eigen::MatrixXd J(n, n);
    for (int it = 0; it < 100; ++it) {
        if (r->lpNorm<Eigen::Infinity>() < 1e-12) break;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double h = 1e-7 * std::max(1.0, std::fabs(x[k]));
            Eigen::VectorXd xp = x;
            xp[k] += h;
            if (auto rp = relative_residual(xp, m, cfg, K)) {
                J.col(k) = (*rp - *r) / h;
            } else {
                xp[k] = x[k] - h;
                auto rm = relative_residual(xp, m, cfg, K);
                if (!rm) throw InvalidBracket("equal-power system Jacobian left its domain", k + 1);
                J.col(k) = (*r - *rm) / h;
            }
        }
        const Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-*r);
        const double norm = r->norm();
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd xn = x + alpha * dx;
            auto rn = relative_residual(xn, m, cfg, K);
            if (rn && rn->norm() < (1.0 - 1e-4 * alpha) * norm) {
                x = xn;
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!(r->lpNorm<Eigen::Infinity>() < 1e-9))
        throw ConvergenceError("equal-power Newton iteration stalled", m.lambda, m.mu, 100);
    PowerCodebook cb;
    cb.levels.resize(L);
    for (std::size_t j = 0; j < L; ++j) cb.levels[j] = std::exp(x[j]);
    return cb;
}

QpaSolution solve_meppr(const SystemConfig& cfg, const SolverSettings& settings) {
    settings.validate();
    const double P = cfg.p_av();
    const double Q = cfg.q_av();
    const double c = cfg.c();
    const FullCsiSolution full = solve_full_csi_multipliers(cfg, settings);

    std::optional<FamilyPoint> best;
    std::string note;

    if (P <= Q) {
        // mu = 0: lambda cancels from the equal-power system (plain EPPR).
        // The multiplier is then read off the first stationarity equation.
        const Multipliers unit{1.0, 0.0};
        const auto cb = try_solve(unit, cfg, nullptr);
        if (!cb) throw ConvergenceError("equal-power system has no solution", 1.0, 0.0, 0);
        const double p1 = cb->first();
        const double pL = cb->last();
        const double e1 = std::exp(-c / p1);
        const double delta1 = e1 - std::exp(-c / (*cb)(2));
        const double x = e1 * c / (p1 * p1);
        const Multipliers m{x / (delta1 + x * (p1 - pL)), 0.0};
        best = FamilyPoint{m, *cb, evaluate_layout(build_layout(*cb, m, cfg), cfg)};
        note = "mu=0: plain equal-power codebook";
    } else {
        // Walk the dual family and keep the budget-feasible point with the
        // lowest outage. With lambda = 0 the AIP budget holds identically.
        const bool power_binds = full.multipliers.lambda > 0.0;
        const double mu_ref = full.multipliers.mu;
        PowerCodebook warm;
        auto eval = [&](double mu) -> std::optional<FamilyPoint> {
            const PowerCodebook* w = warm.levels.empty() ? nullptr : &warm;
            std::optional<FamilyPoint> pt;
            if (power_binds) {
                pt = power_matched_point(mu, cfg, w);
            } else {
                const Multipliers m{0.0, mu};
                if (auto cb = try_solve(m, cfg, w)) {
                    try {
                        pt = FamilyPoint{m, *cb, evaluate_layout(build_layout(*cb, m, cfg), cfg)};
                    } catch (const Error&) {
                    }
                }
            }
            if (!pt) return std::nullopt;
            warm = pt->cb;
            if (pt->report.atp_usage > P * (1.0 + settings.budget_rtol)) return std::nullopt;
            return pt;
        };
        auto better = [&](const std::optional<FamilyPoint>& a) {
            return a && (!best || a->report.outage < best->report.outage);
        };

        const int n = 40;
        const double t0 = std::log(0.5 * mu_ref), t1 = std::log(8.0 * mu_ref);
        const double step = (t1 - t0) / (n - 1);
        for (int i = 0; i < n; ++i) {
            auto pt = eval(std::exp(t0 + step * i));
            if (better(pt)) best = pt;
        }
        if (!best) throw ConvergenceError("no budget-feasible point on the equal-power family", 0.0,
                                          mu_ref, n);
        // Pattern search in ln mu; stops at interior minima and at folds
        // where the family ceases to exist.
        for (double h = step; h > 1e-10;) {
            warm = best->cb;
            auto up = eval(best->m.mu * std::exp(h));
            warm = best->cb;
            auto down = eval(best->m.mu * std::exp(-h));
            if (better(up) || better(down)) {
                if (better(up)) best = up;
                if (better(down)) best = down;
            } else {
                h *= 0.5;
            }
        }
        note = power_binds ? "both budgets active" : "lambda=0 family";
    }

    QpaSolution sol;
    sol.solver = "meppr";
    sol.codebook = best->cb;
    sol.multipliers = best->m;
    sol.variant = ThresholdVariant::Exact;
    sol.report = best->report;
    auto& d = sol.diagnostics;
    d.kkt_residual_norm = detail::max_abs(meppr_residuals(sol.codebook, sol.multipliers, cfg));
    d.atp_slackness = atp_slackness(sol.multipliers, sol.report.atp_usage, cfg);
    d.aip_slackness = aip_slackness(sol.multipliers, sol.report.aip_usage, cfg);
    d.active = P <= Q ? DualCase::PowerOnly
                      : (sol.multipliers.lambda > 0.0 ? DualCase::Both : DualCase::InterferenceOnly);
    d.note = note;
    return sol;
}

}  // namespace qpower
