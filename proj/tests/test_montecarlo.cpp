#include <gtest/gtest.h>

#include <cmath>

#include "qpower/error.hpp"
#include "qpower/montecarlo.hpp"

using namespace qpower;

namespace {
const SystemConfig kCfg(0.25, 1.0, 1.0, 1);
const PowerCodebook kTwo{{2.0, 0.5}};
}  // namespace

TEST(EstimatePerformance, TwoLevelBothMultipliers) {
    const auto lay = build_layout(kTwo, {0.1, 0.2}, kCfg);
    const auto mc = estimate_performance(lay, kCfg, 1000000, 1);
    EXPECT_EQ(mc.source, EstimateSource::MonteCarlo);
    EXPECT_EQ(mc.samples, 1000000u);
    EXPECT_NEAR(*mc.outage_stderr, 0.00046, 0.00001);
    EXPECT_LT(std::fabs(mc.outage - 0.30347), 3 * 0.00046);
    const auto exact = evaluate_layout(lay, kCfg);
    EXPECT_LT(std::fabs(mc.atp_usage - exact.atp_usage), 3 * *mc.atp_stderr);
    EXPECT_LT(std::fabs(mc.aip_usage - exact.aip_usage), 3 * *mc.aip_stderr);
}

TEST(EstimatePerformance, TwoLevelMuZero) {
    const auto lay = build_layout(kTwo, {0.3, 0.0}, kCfg);
    const auto mc = estimate_performance(lay, kCfg, 1000000, 2);
    EXPECT_NEAR(*mc.outage_stderr, 0.00045, 0.00001);
    EXPECT_LT(std::fabs(mc.outage - 0.27701), 3 * 0.00045);
    // g0 is independent of the power chosen when mu = 0.
    const double se = std::hypot(*mc.atp_stderr, *mc.aip_stderr);
    EXPECT_LT(std::fabs(mc.atp_usage - mc.aip_usage), 3 * se);
}

TEST(EstimatePerformance, DeterministicAndIndependentOfThreads) {
    const auto lay = build_layout(kTwo, {0.1, 0.2}, kCfg);
    MonteCarloOptions one, four;
    four.jobs = 4;
    const auto a = estimate_performance(lay, kCfg, 300000, 9, one);
    const auto b = estimate_performance(lay, kCfg, 300000, 9, one);
    const auto c = estimate_performance(lay, kCfg, 300000, 9, four);
    EXPECT_EQ(a.outage, b.outage);
    EXPECT_EQ(a.atp_usage, b.atp_usage);
    EXPECT_EQ(a.outage, c.outage);
    EXPECT_EQ(a.aip_usage, c.aip_usage);
}

TEST(EstimatePerformance, RejectsTinySampleCounts) {
    const auto lay = build_layout(kTwo, {0.1, 0.2}, kCfg);
    EXPECT_THROW(estimate_performance(lay, kCfg, 999, 1), UsageError);
}
