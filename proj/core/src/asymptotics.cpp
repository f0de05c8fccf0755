#include "qpower/asymptotics.hpp"

#include <cmath>
#include <vector>

#include "qpower/error.hpp"
#include "qpower/numeric.hpp"

namespace qpower {

namespace {

// Equation for a, multiplied through by e^{-c lambda} so nothing overflows.
double a_equation(double a, double lambda, double mu, const SystemConfig& cfg) {
    const double c = cfg.c();
    const double k = 1.0 + 1.0 / (c * mu);
    const double b = a * k;
    const double lhs = (lambda * cfg.p_av() + mu * cfg.q_av()) * (lambda + a / (2.0 * c));
    const double cm = c * mu / (1.0 + c * mu);
    const double bracket = (lambda + mu) * (1.0 + cm * std::expm1(-b)) -
                           c * mu * mu / ((1.0 + c * mu) * (1.0 + c * mu)) * phi2(b);
    return lhs - std::exp(-c * lambda) * bracket;
}

// ln((e^beta - 1)/beta), exact at beta = 0.
double log_expm1_ratio(double beta) {
    if (beta == 0.0) return 0.0;
    if (beta > 30.0) return beta + std::log(-std::expm1(-beta)) - std::log(beta);
    return std::log(std::expm1(beta) / beta);
}

void solve_mu_positive(AsymptoticConstants& k, const SystemConfig& cfg) {
    const double lambda = k.full_csi.lambda;
    const double mu = k.full_csi.mu;
    auto F = [&](double a) { return a_equation(a, lambda, mu, cfg); };
    const double f0 = F(0.0);
    const double scale = lambda + mu;
    if (std::fabs(f0) <= 1e-13 * scale) {
        k.a = 0.0;
    } else {
        // Log grid over (1e-8, hi]; expand hi until a sign change appears.
        double hi = 50.0;
        std::vector<std::pair<double, double>> roots_brackets;
        for (int expand = 0; expand < 20 && roots_brackets.empty(); ++expand, hi *= 4.0) {
            roots_brackets.clear();
            const int n = 400;
            double prev_a = 0.0, prev_f = f0;
            for (int i = 0; i <= n; ++i) {
                const double a = 1e-8 * std::pow(hi / 1e-8, static_cast<double>(i) / n);
                const double f = F(a);
                if ((f > 0.0) != (prev_f > 0.0)) roots_brackets.emplace_back(prev_a, a);
                prev_a = a;
                prev_f = f;
            }
        }
        if (roots_brackets.empty())
            throw NoRootError("no root of the high-resolution equation for a", {0.0, f0});
        k.multiple_roots = roots_brackets.size() > 1;
        const auto [lo, hi_a] = roots_brackets.front();
        k.a = illinois_root(F, lo, hi_a, F(lo), F(hi_a), 1e-16, 1e-13 * scale);
    }
    k.b = k.a * (1.0 + 1.0 / (cfg.c() * mu));
}

void solve_mu_zero(AsymptoticConstants& k, const SystemConfig& cfg) {
    const double lambda = k.full_csi.lambda;
    const double target = -cfg.c() * lambda - std::log(lambda * cfg.p_av());
    if (std::fabs(target) <= 1e-12) {
        k.beta = 0.0;
        return;
    }
    if (target < 0.0)
        throw NoRootError("high-resolution equation for beta has no nonnegative root", {target});
    auto G = [&](double beta) { return log_expm1_ratio(beta) - target; };
    double hi = 50.0;
    while (G(hi) < 0.0) hi *= 2.0;
    k.beta = illinois_root(G, 0.0, hi, G(0.0), G(hi), 1e-16, 1e-14);
}

}  // namespace

AsymptoticConstants solve_constants(const FullCsiSolution& full, const SystemConfig& cfg) {
    AsymptoticConstants k;
    k.full_csi = full.multipliers;
    if (full.multipliers.mu > 0.0) {
        k.branch = AsymptoticBranch::MuPositive;
        solve_mu_positive(k, cfg);
    } else {
        if (!(full.multipliers.lambda > 0.0))
            throw UsageError("full-CSI multipliers must have lambda > 0 when mu = 0");
        k.branch = AsymptoticBranch::MuZero;
        solve_mu_zero(k, cfg);
    }
    return k;
}

double asymptotic_outage(const AsymptoticConstants& k, const SystemConfig& cfg,
                         std::optional<std::size_t> L) {
    const double c = cfg.c();
    const double lambda = k.full_csi.lambda;
    const double mu = k.full_csi.mu;
    if (L && *L < 1) throw UsageError("region count must be positive");

    if (k.branch == AsymptoticBranch::MuZero) {
        if (mu != 0.0) throw UsageError("mu = 0 constants used with mu > 0 multipliers");
        if (!L) return -std::expm1(-c * lambda);
        return -std::expm1(-c * lambda * (1.0 + k.beta / static_cast<double>(*L)));
    }
    if (!(mu > 0.0)) throw UsageError("mu > 0 constants used with mu = 0 multipliers");
    const double kk = 1.0 + 1.0 / (c * mu);
    const double mass = -std::expm1(-k.b);
    double loss;
    if (!L) {
        loss = mass / kk;
    } else if (k.a == 0.0) {
        loss = 0.0;
    } else {
        const double Ld = static_cast<double>(*L);
        loss = -std::expm1(-k.a / Ld) * mass / -std::expm1(-k.b / Ld);
    }
    return 1.0 - std::exp(-c * lambda) * (1.0 - loss);
}

}  // namespace qpower
