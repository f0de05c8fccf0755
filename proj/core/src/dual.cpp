#include "qpower/dual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qpower/error.hpp"

namespace qpower {

namespace {

class MemoOracle {
public:
    MemoOracle(const BudgetOracle& oracle, DualResult& result) : oracle_(oracle), result_(result) {}

    BudgetUsage operator()(double lambda, double mu) {
        const auto key = std::make_pair(lambda, mu);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const BudgetUsage u = oracle_(Multipliers{lambda, mu});
        ++result_.evaluations;
        result_.history.push_back({lambda, mu, u.atp, u.aip});
        cache_.emplace(key, u);
        return u;
    }

private:
    const BudgetOracle& oracle_;
    DualResult& result_;
    std::map<std::pair<double, double>, BudgetUsage> cache_;
};

struct ScalarRoot {
    double x = 0.0;
    bool gap = false;
};

// Root of a residual r(x) that is nonincreasing in x > 0, searched in
// t = ln x. The bracket is grown geometrically from x0, then refined by
// Illinois steps. If the residual jumps over zero, the smallest feasible x
// (r <= 0) found is returned with gap set.
template <class R>
ScalarRoot solve_decreasing(R&& r, double x0, double scale, const SolverSettings& s,
                            const char* what) {
    double t = std::log(x0);
    double rt = r(x0);
    if (rt == 0.0) return {x0, false};

    double t_pos, r_pos, t_neg, r_neg;  // r(t_pos) > 0 >= r(t_neg), t_pos < t_neg
    double step = std::log(4.0);
    bool found = false;
    std::vector<double> samples{x0, rt};
    if (rt > 0.0) {
        t_pos = t;
        r_pos = rt;
        for (int k = 0; k < 60 && !found; ++k, step *= 1.5) {
            t += step;
            rt = r(std::exp(t));
            samples.insert(samples.end(), {std::exp(t), rt});
            if (rt <= 0.0) {
                t_neg = t;
                r_neg = rt;
                found = true;
            } else {
                t_pos = t;
                r_pos = rt;
            }
        }
    } else {
        t_neg = t;
        r_neg = rt;
        for (int k = 0; k < 60 && !found; ++k, step *= 1.5) {
            t -= step;
            rt = r(std::exp(t));
            samples.insert(samples.end(), {std::exp(t), rt});
            if (rt > 0.0) {
                t_pos = t;
                r_pos = rt;
                found = true;
            } else {
                t_neg = t;
                r_neg = rt;
            }
        }
    }
    if (!found) throw NoRootError(std::string("no sign change while bracketing ") + what, samples);

    const double ftol = s.root_tol * scale;
    int side = 0;
    double fa = r_pos, fb = r_neg;  // Illinois-scaled copies
    for (int it = 0; it < 200; ++it) {
        double tm = (t_pos * fb - t_neg * fa) / (fb - fa);
        if (!(tm > t_pos && tm < t_neg) || it % 6 == 5) tm = 0.5 * (t_pos + t_neg);
        if (!(tm > t_pos && tm < t_neg)) break;
        const double rm = r(std::exp(tm));
        if (std::fabs(rm) <= ftol) return {std::exp(tm), false};
        if (rm > 0.0) {
            t_pos = tm;
            r_pos = rm;
            fa = rm;
            if (side == 1) fb *= 0.5;
            side = 1;
        } else {
            t_neg = tm;
            r_neg = rm;
            fb = rm;
            if (side == -1) fa *= 0.5;
            side = -1;
        }
        if (t_neg - t_pos <= 1e-15 * std::max(1.0, std::fabs(tm))) break;
    }
    const double tol = s.budget_rtol * scale;
    if (std::fabs(r_neg) <= tol) return {std::exp(t_neg), false};
    if (std::fabs(r_pos) <= tol) return {std::exp(t_pos), false};
    return {std::exp(t_neg), true};
}

bool budget_ok(double dual, double usage, double budget, double rtol) {
    if (dual > 0.0) return std::fabs(usage - budget) <= rtol * budget;
    return usage <= budget * (1.0 + rtol);
}

DualResult solve_subgradient(const SystemConfig& cfg, const SolverSettings& s,
                             const BudgetOracle& oracle) {
    DualResult result;
    MemoOracle eval(oracle, result);
    const double P = cfg.p_av();
    const double Q = cfg.q_av();
    // Unset step scales default to 2 / |d usage / d multiplier|, from a
    // secant at the start point, so alpha0 * slope starts near 2.
    auto default_scale = [&](double lambda, double mu, bool on_lambda) {
        const double h = 0.05;
        const BudgetUsage a = eval(lambda, mu);
        const BudgetUsage b = on_lambda ? eval(lambda * (1.0 + h), mu) : eval(lambda, mu * (1.0 + h));
        const double slope = on_lambda ? (b.atp - a.atp) / (h * lambda) : (b.aip - a.aip) / (h * mu);
        return std::fabs(slope) > 0.0 ? 2.0 / std::fabs(slope) : 1.0;
    };

    auto run = [&](double lambda, double mu, bool lambda_free, bool mu_free,
                   int& iterations) -> std::pair<Multipliers, BudgetUsage> {
        const double alpha0 = !lambda_free ? 0.0 : s.alpha0 > 0.0 ? s.alpha0 : default_scale(lambda, mu, true);
        const double beta0 = !mu_free ? 0.0 : s.beta0 > 0.0 ? s.beta0 : default_scale(lambda, mu, false);
        int stable = 0;
        for (int l = 1; l <= s.max_iterations; ++l, ++iterations) {
            const BudgetUsage u = eval(lambda, mu);
            double ln = lambda_free ? std::max(0.0, lambda + alpha0 / l * (u.atp - P)) : lambda;
            double mn = mu_free ? std::max(0.0, mu + beta0 / l * (u.aip - Q)) : mu;
            // The codebook needs one positive multiplier; a lone free one
            // may shrink by at most half per step.
            if (lambda_free && mu == 0.0 && !mu_free) ln = std::max(ln, 0.5 * lambda);
            if (mu_free && lambda == 0.0 && !lambda_free) mn = std::max(mn, 0.5 * mu);
            if (ln == 0.0 && mn == 0.0) ln = 0.5 * lambda;
            const double move = std::fabs(ln - lambda) + std::fabs(mn - mu);
            const bool ok = (!lambda_free || budget_ok(lambda, u.atp, P, s.budget_rtol)) &&
                            (!mu_free || budget_ok(mu, u.aip, Q, s.budget_rtol));
            stable = (ok && move < s.dual_tol) ? stable + 1 : 0;
            if (stable >= s.stable_iterations) return {Multipliers{lambda, mu}, u};
            lambda = ln;
            mu = mn;
        }
        throw ConvergenceError("subgradient iteration did not converge", lambda, mu, iterations);
    };

    int iterations = 0;
    if (P <= Q) {
        auto [m, u] = run(1.0 / P, 0.0, true, false, iterations);
        result.multipliers = m;
        result.usage = u;
        result.active = DualCase::PowerOnly;
        return result;
    }
    auto [m, u] = run(0.0, 1.0 / Q, false, true, iterations);
    if (u.atp <= P * (1.0 + s.budget_rtol)) {
        result.multipliers = m;
        result.usage = u;
        result.active = DualCase::InterferenceOnly;
        return result;
    }
    auto [m2, u2] = run(1.0 / P, m.mu, true, true, iterations);
    result.multipliers = m2;
    result.usage = u2;
    result.active = DualCase::Both;
    return result;
}

}  // namespace

double atp_slackness(const Multipliers& m, double atp, const SystemConfig& cfg) {
    return m.lambda * (cfg.p_av() - atp);
}

double aip_slackness(const Multipliers& m, double aip, const SystemConfig& cfg) {
    return m.mu * (cfg.q_av() - aip);
}

DualResult solve_duals(const SystemConfig& cfg, const SolverSettings& settings,
                       const BudgetOracle& oracle) {
    settings.validate();
    if (settings.dual_method == DualMethod::Subgradient)
        return solve_subgradient(cfg, settings, oracle);

    DualResult result;
    MemoOracle eval(oracle, result);
    const double P = cfg.p_av();
    const double Q = cfg.q_av();

    if (P <= Q) {
        const ScalarRoot root = solve_decreasing(
            [&](double lambda) { return eval(lambda, 0.0).atp - P; }, 1.0 / P, P, settings,
            "lambda");
        result.multipliers = {root.x, 0.0};
        result.usage = eval(root.x, 0.0);
        result.duality_gap = root.gap;
        result.active = DualCase::PowerOnly;
        return result;
    }

    const ScalarRoot mu_only = solve_decreasing(
        [&](double mu) { return eval(0.0, mu).aip - Q; }, 1.0 / Q, Q, settings, "mu");
    const BudgetUsage u0 = eval(0.0, mu_only.x);
    if (u0.atp <= P * (1.0 + settings.budget_rtol)) {
        result.multipliers = {0.0, mu_only.x};
        result.usage = u0;
        result.duality_gap = mu_only.gap;
        result.active = DualCase::InterferenceOnly;
        return result;
    }

    // Both budgets bind: lambda(mu) solves ATP = P, then mu solves AIP = Q.
    bool gap = false;
    double lambda_guess = 1.0 / P;
    auto lambda_of = [&](double mu) {
        if (eval(0.0, mu).atp <= P) return 0.0;
        const ScalarRoot r = solve_decreasing(
            [&](double lambda) { return eval(lambda, mu).atp - P; }, lambda_guess, P, settings,
            "lambda");
        lambda_guess = r.x;
        gap = gap || r.gap;
        return r.x;
    };
    const ScalarRoot mu_root = solve_decreasing(
        [&](double mu) { return eval(lambda_of(mu), mu).aip - Q; }, mu_only.x, Q, settings, "mu");
    gap = false;
    const double lambda = lambda_of(mu_root.x);
    result.multipliers = {lambda, mu_root.x};
    result.usage = eval(lambda, mu_root.x);
    result.duality_gap = gap || mu_root.gap;
    result.active = DualCase::Both;
    return result;
}

}  // namespace qpower
