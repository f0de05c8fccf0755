#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qpower/error.hpp"
#include "qpower/full_csi.hpp"
#include "qpower/kkt_solver.hpp"

using namespace qpower;

namespace {

double norm_inf(const std::vector<double>& r) {
    double x = 0.0;
    for (double v : r) x = std::max(x, std::fabs(v));
    return x;
}

// Central-difference gradient of the oracle Lagrangian. By the envelope
// argument the partition may be re-optimised at every probe.
std::vector<double> lagrangian_gradient(const PowerCodebook& cb, const Multipliers& m, double c) {
    std::vector<double> g(cb.size());
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const double h = 1e-6 * std::max(cb.levels[j], 1e-3);
        auto lv = cb.levels;
        lv[j] += h;
        const double up = oracle::nearest_level(lv, m.lambda, m.mu, c).lagrangian;
        lv[j] -= 2 * h;
        const double down = oracle::nearest_level(lv, m.lambda, m.mu, c).lagrangian;
        g[j] = (up - down) / (2 * h);
    }
    return g;
}

}  // namespace

TEST(ForwardRecursion, ThreeLevelExample) {
    const SystemConfig cfg(0.25, 1.0, 1.0, 2);
    const double c = cfg.c();
    const auto cb = forward_recursion(2.0, 0.1, {0.2, 0.0}, cfg, 3);
    // Hand evaluation: v2 = v1 - ln(1 - (c/p1^2)(1 - lambda (p1 - pL)) / lambda).
    const double ratio = c / 4.0 * (1.0 - 0.2 * 1.9) / 0.2;
    const double v2 = c / 2.0 - std::log1p(-ratio);
    EXPECT_NEAR(ratio * 0.2, 0.100552, 5e-7);
    EXPECT_NEAR(v2, 1.02306, 5e-5);  // quoted to about five digits
    EXPECT_NEAR(cb(2), c / v2, 1e-12);
    EXPECT_NEAR(cb(2), 0.63410, 5e-5);  // quoted to about five digits
    EXPECT_EQ(cb.last(), 0.1);
}

TEST(ForwardRecursion, InvalidBracketWhenLogArgumentLeavesDomain) {
    try {
        forward_recursion(0.2, 0.1, {0.2, 0.0}, SystemConfig(0.25, 1.0, 1.0, 2), 3);
        FAIL() << "expected InvalidBracket";
    } catch (const InvalidBracket& e) {
        EXPECT_EQ(e.index(), 1u);
    }
}

TEST(ForwardRecursion, ResidualsVanishOnRecursionEquations) {
    const SystemConfig cfg(0.25, 1.0, 1.0, 2);
    const Multipliers m{0.2, 0.0};
    const auto cb = forward_recursion(2.0, 0.1, m, cfg, 3);
    ASSERT_TRUE(cb.is_valid());
    const auto r = kkt_residuals(cb, m, cfg);
    for (std::size_t j = 0; j + 2 < cb.size(); ++j) EXPECT_NEAR(r[j], 0.0, 1e-14) << j;
}

TEST(SolveCodebook, TwoLevelPowerOnly) {
    const SystemConfig cfg(0.25, 1.0, 1.0, 1);
    const Multipliers m{0.2, 0.0};
    const auto cb = solve_codebook(m, cfg);
    ASSERT_EQ(cb.size(), 2u);
    EXPECT_GT(cb(1), cb(2));
    EXPECT_GE(cb(2), 0.0);
    EXPECT_LT(norm_inf(kkt_residuals(cb, m, cfg)), 1e-8);
    const auto g = lagrangian_gradient(cb, m, cfg.c());
    EXPECT_NEAR(g[0], 0.0, 1e-6);
    if (cb(2) > 0.0)
        EXPECT_NEAR(g[1], 0.0, 1e-6);
    else
        EXPECT_GE(g[1], -1e-6);
}

class SolveCodebookGrid : public ::testing::TestWithParam<std::tuple<int, double, double>> {};

TEST_P(SolveCodebookGrid, StationaryAndBuildable) {
    const auto [bits, lambda, mu] = GetParam();
    const SystemConfig cfg(0.25, 1.0, 1.0, bits);
    const Multipliers m{lambda, mu};
    const auto cb = solve_codebook(m, cfg);
    ASSERT_TRUE(cb.is_valid());
    EXPECT_LT(norm_inf(kkt_residuals(cb, m, cfg)), 1e-8);
    EXPECT_NO_THROW(build_layout(cb, m, cfg));
    const auto g = lagrangian_gradient(cb, m, cfg.c());
    for (std::size_t j = 0; j + 1 < cb.size(); ++j) EXPECT_NEAR(g[j], 0.0, 1e-5) << "level " << j + 1;
    if (cb.last() == 0.0)
        EXPECT_GE(g.back(), -1e-5);
    else
        EXPECT_NEAR(g.back(), 0.0, 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Multipliers, SolveCodebookGrid,
                         ::testing::Values(std::make_tuple(1, 0.3, 0.0), std::make_tuple(2, 0.2, 0.0),
                                           std::make_tuple(2, 0.0, 0.18), std::make_tuple(3, 0.1, 0.3),
                                           std::make_tuple(3, 0.5, 0.05), std::make_tuple(1, 0.0, 0.28)));

TEST(SolveCodebook, PerturbationIncreasesResidual) {
    const SystemConfig cfg(0.25, 1.0, 1.0, 2);
    const Multipliers m{0.1, 0.3};
    const auto cb = solve_codebook(m, cfg);
    const double base = norm_inf(kkt_residuals(cb, m, cfg));
    for (std::size_t j = 0; j < cb.size(); ++j) {
        if (cb.levels[j] == 0.0) continue;
        auto moved = cb;
        moved.levels[j] *= 1.1;
        if (!moved.is_valid()) continue;
        EXPECT_GT(norm_inf(kkt_residuals(moved, m, cfg)), base) << "level " << j + 1;
    }
}

TEST(SolveCodebook, LastLevelShrinksWithResolution) {
    const Multipliers m{0.05, 0.2};
    double prev = INFINITY;
    for (int bits = 1; bits <= 6; ++bits) {
        const auto cb = solve_codebook(m, SystemConfig(0.25, 1.0, 1.0, bits));
        EXPECT_LE(cb.last(), prev) << bits;
        prev = cb.last();
    }
    EXPECT_LT(prev, 0.05);
}

TEST(OptimalQpa, GapsToFullCsi) {
    const auto cfg2 = SystemConfig::from_db(0.25, 10.0, 0.0, 2);
    const double full = solve_full_csi_multipliers(cfg2).outage;
    EXPECT_NEAR(solve_optimal_qpa(cfg2).report.outage - full, 0.1083, 0.15 * 0.1083);
    EXPECT_NEAR(solve_optimal_qpa(cfg2.with_bits(4)).report.outage - full, 0.0249, 0.15 * 0.0249);
}

TEST(OptimalQpa, MuZeroWhenPowerBudgetIsSmaller) {
    for (int bits : {1, 2, 3})
        for (auto [p, q] : {std::pair{-5.0, 0.0}, std::pair{0.0, 0.0}, std::pair{3.0, 8.0}}) {
            const auto sol = solve_optimal_qpa(SystemConfig::from_db(0.25, p, q, bits));
            EXPECT_EQ(sol.multipliers.mu, 0.0) << bits << " " << p << " " << q;
        }
}

TEST(OptimalQpa, FeasibleWithComplementarySlackness) {
    for (double q : {-5.0, 0.0})
        for (double p : {-10.0, -5.0, 0.0, 5.0, 10.0})
            for (int bits : {1, 2, 4}) {
                const auto cfg = SystemConfig::from_db(0.25, p, q, bits);
                const auto sol = solve_optimal_qpa(cfg);
                EXPECT_LE(sol.report.atp_usage, cfg.p_av() + 1e-6);
                EXPECT_LE(sol.report.aip_usage, cfg.q_av() + 1e-6);
                EXPECT_LT(std::fabs(sol.diagnostics.atp_slackness), 1e-5);
                EXPECT_LT(std::fabs(sol.diagnostics.aip_slackness), 1e-5);
            }
}

TEST(OptimalQpa, OutageNonincreasingInBits) {
    const auto cfg = SystemConfig::from_db(0.25, 5.0, 0.0, 1);
    double prev = 1.0;
    for (int bits = 1; bits <= 6; ++bits) {
        const double o = solve_optimal_qpa(cfg.with_bits(bits)).report.outage;
        EXPECT_LE(o, prev + 1e-4) << bits;
        prev = o;
    }
}

TEST(OptimalQpa, OutageNonincreasingInBudgets) {
    for (double q : {-5.0, 0.0}) {
        double prev = 1.0;
        for (double p : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
            const double o = solve_optimal_qpa(SystemConfig::from_db(0.25, p, q, 2)).report.outage;
            EXPECT_LE(o, prev + 1e-9) << p << " " << q;
            prev = o;
        }
    }
    for (double p : {-5.0, 5.0}) {
        double prev = 1.0;
        for (double q : {-10.0, -5.0, 0.0, 5.0}) {
            const double o = solve_optimal_qpa(SystemConfig::from_db(0.25, p, q, 2)).report.outage;
            EXPECT_LE(o, prev + 1e-9) << p << " " << q;
            prev = o;
        }
    }
}

TEST(OptimalQpa, LastLevelSmallAtEightBits) {
    const auto sol = solve_optimal_qpa(SystemConfig::from_db(0.25, 10.0, 0.0, 8));
    EXPECT_LT(sol.codebook.last(), 0.01 * sol.codebook.first());
}

TEST(OptimalQpa, SubgradientAgreesWithBracketing) {
    const auto cfg = SystemConfig::from_db(0.25, 0.0, 5.0, 2);
    SolverSettings sg;
    sg.dual_method = DualMethod::Subgradient;
    sg.max_iterations = 5000;
    const auto a = solve_optimal_qpa(cfg);
    const auto b = solve_optimal_qpa(cfg, sg);
    EXPECT_NEAR(a.report.outage, b.report.outage, 1e-3);
    EXPECT_LE(b.report.atp_usage, cfg.p_av() * (1 + 1e-3));
}
