#include <gtest/gtest.h>

#include <cmath>

#include "qpower/asymptotics.hpp"
#include "qpower/error.hpp"
#include "qpower/kkt_solver.hpp"

using namespace qpower;

namespace {

FullCsiSolution with_multipliers(double lambda, double mu) {
    FullCsiSolution f;
    f.multipliers = {lambda, mu};
    return f;
}

const SystemConfig kHigh = SystemConfig::from_db(0.25, 10.0, 0.0, 1);

}  // namespace

TEST(SolveConstants, MuZeroFixedPointGivesZeroBeta) {
    const double lambda = 0.7;
    const double c = std::expm1(0.5);
    const SystemConfig cfg(0.25, std::exp(-c * lambda) / lambda, 5.0, 1);
    const auto k = solve_constants(with_multipliers(lambda, 0.0), cfg);
    EXPECT_EQ(k.branch, AsymptoticBranch::MuZero);
    EXPECT_NEAR(k.beta, 0.0, 1e-10);
    for (std::size_t L : {2u, 16u, 1024u})
        EXPECT_NEAR(asymptotic_outage(k, cfg, L), -std::expm1(-c * lambda), 1e-12);
}

TEST(SolveConstants, MuZeroBetaSolvesItsEquation) {
    const SystemConfig cfg = SystemConfig::from_db(0.25, -5.0, 0.0, 1);
    const auto full = solve_full_csi_multipliers(cfg);
    const auto k = solve_constants(full, cfg);
    const double lambda = full.multipliers.lambda;
    EXPECT_NEAR(std::log(std::expm1(k.beta) / k.beta), -cfg.c() * lambda - std::log(lambda * cfg.p_av()), 1e-10);
}

TEST(SolveConstants, MuPositiveZeroRootCondition) {
    const double lambda = 0.3, mu = 0.5, Q = 1.0;
    const double c = std::expm1(0.5);
    const double P = ((lambda + mu) * std::exp(-c * lambda) / lambda - mu * Q) / lambda;
    ASSERT_GT(P, 0.0);
    const SystemConfig cfg(0.25, P, Q, 1);
    const auto k = solve_constants(with_multipliers(lambda, mu), cfg);
    EXPECT_EQ(k.branch, AsymptoticBranch::MuPositive);
    EXPECT_NEAR(k.a, 0.0, 1e-9);
}

TEST(SolveConstants, MuPositiveRootResidual) {
    const auto full = solve_full_csi_multipliers(kHigh);
    const auto k = solve_constants(full, kHigh);
    const double c = kHigh.c(), l = full.multipliers.lambda, mu = full.multipliers.mu;
    ASSERT_GT(k.a, 0.0);
    // Unstabilised form of the defining equation as an independent check.
    const double kk = 1.0 + 1.0 / (c * mu);
    const double b = k.a * kk;
    const double lhs = (l * kHigh.p_av() + mu * kHigh.q_av()) * (l + k.a / (2 * c)) * std::exp(c * l);
    const double rhs = (l + mu) * (1.0 - (1.0 - std::exp(-b)) / kk) -
                       1.0 / (c * kk * kk) * (1.0 - std::exp(-b) * (1.0 + b));
    EXPECT_NEAR(lhs, rhs, 1e-10);
    EXPECT_NEAR(k.b, b, 1e-14);
}

TEST(AsymptoticOutage, BranchMismatchIsUsageError) {
    auto k = solve_constants(solve_full_csi_multipliers(kHigh), kHigh);
    k.branch = AsymptoticBranch::MuZero;
    EXPECT_THROW(asymptotic_outage(k, kHigh, 4u), UsageError);
}

TEST(AsymptoticOutage, MuZeroLimit) {
    const auto cfg = SystemConfig::from_db(0.25, -5.0, 0.0, 1);
    const auto full = solve_full_csi_multipliers(cfg);
    const auto k = solve_constants(full, cfg);
    const double limit = -std::expm1(-cfg.c() * full.multipliers.lambda);
    EXPECT_DOUBLE_EQ(asymptotic_outage(k, cfg, std::nullopt), limit);
    EXPECT_NEAR(asymptotic_outage(k, cfg, std::size_t{1} << 20), limit, 1e-6);
}

TEST(AsymptoticOutage, MonotoneAndConvergent) {
    for (const auto& cfg : {kHigh, SystemConfig::from_db(0.25, -5.0, 0.0, 1)}) {
        const auto k = solve_constants(solve_full_csi_multipliers(cfg), cfg);
        double prev = 1.0;
        for (int bits = 1; bits <= 14; ++bits) {
            const double o = asymptotic_outage(k, cfg, std::size_t{1} << bits);
            EXPECT_LE(o, prev + 1e-15) << bits;
            prev = o;
        }
        EXPECT_LT(std::fabs(prev - asymptotic_outage(k, cfg, std::nullopt)), 1e-4);
    }
}

TEST(AsymptoticOutage, GapsToOptimalAtHighPower) {
    const auto k = solve_constants(solve_full_csi_multipliers(kHigh), kHigh);
    const double target[] = {0.0325, 0.00618, 0.000168};
    double prev = INFINITY;
    int i = 0;
    for (int bits : {4, 6, 8}) {
        const double opt = solve_optimal_qpa(kHigh.with_bits(bits)).report.outage;
        const double gap = std::fabs(asymptotic_outage(k, kHigh, std::size_t{1} << bits) - opt);
        EXPECT_LT(gap, prev) << bits;
        EXPECT_NEAR(gap, target[i], 0.25 * target[i]) << bits;
        prev = gap;
        ++i;
    }
}

TEST(AsymptoticOutage, ThresholdsReconstructedFromConstants) {
    const auto cfg = kHigh.with_bits(10);
    const auto sol = solve_optimal_qpa(cfg);
    ASSERT_GT(sol.multipliers.mu, 0.0);
    const auto k = solve_constants(solve_full_csi_multipliers(cfg), cfg);
    const double c = cfg.c(), mu = sol.multipliers.mu, lambda = sol.multipliers.lambda;
    const double L = static_cast<double>(cfg.levels());
    // s'_j = 1/(mu p_j) - lambda/mu against the equal-spacing prediction j a/(c mu L).
    for (std::size_t j = 1; j <= 8; ++j) {
        const double s = 1.0 / (mu * sol.codebook(j)) - lambda / mu;
        EXPECT_NEAR(s / (static_cast<double>(j) * k.a / (c * mu * L)), 1.0, 0.05) << "level " << j;
    }
}
