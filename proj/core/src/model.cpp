#include "qpower/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "qpower/error.hpp"

namespace qpower {

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double linear_to_db(double x) { return 10.0 * std::log10(x); }

SystemConfig::SystemConfig(double r0, double p_av, double q_av, int bits)
    : r0_(r0), c_(std::expm1(2.0 * r0)), p_av_(p_av), q_av_(q_av), bits_(bits), levels_(0) {
    std::vector<std::string> bad;
    if (!(r0 > 0.0) || !std::isfinite(r0)) bad.emplace_back("r0");
    if (!(p_av > 0.0) || !std::isfinite(p_av)) bad.emplace_back("p_av");
    if (!(q_av > 0.0) || !std::isfinite(q_av)) bad.emplace_back("q_av");
    // B = 0 leaves no non-outage level.
    if (bits < 1 || bits > 30) bad.emplace_back("bits");
    if (!bad.empty())
        throw ConfigError("invalid system configuration (r0, budgets positive; bits in [1, 30])", bad);
    levels_ = std::size_t{1} << bits;
}

SystemConfig SystemConfig::from_db(double r0, double p_av_db, double q_av_db, int bits) {
    return SystemConfig(r0, db_to_linear(p_av_db), db_to_linear(q_av_db), bits);
}

void Multipliers::validate() const {
    if (!(lambda >= 0.0) || !(mu >= 0.0) || !std::isfinite(lambda) || !std::isfinite(mu))
        throw UsageError("multipliers must be finite and nonnegative");
}

void SolverSettings::validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive", {"max_iterations"});
    if (!(budget_rtol > 0.0)) throw ConfigError("budget_rtol must be positive", {"budget_rtol"});
    if (!(dual_tol > 0.0)) throw ConfigError("dual_tol must be positive", {"dual_tol"});
    if (!(root_tol > 0.0)) throw ConfigError("root_tol must be positive", {"root_tol"});
    if (alpha0 < 0.0 || beta0 < 0.0)
        throw ConfigError("step scales must be nonnegative", {"alpha0", "beta0"});
    if (restarts < 1 || scan_points < 4)
        throw ConfigError("scan grid too coarse", {"restarts", "scan_points"});
    if (stable_iterations < 1)
        throw ConfigError("stable_iterations must be positive", {"stable_iterations"});
}

ChannelStream::ChannelStream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double ChannelStream::exponential() noexcept { return -std::log(uniform()); }

PowerGainPair sample_channel(ChannelStream& stream) {
    PowerGainPair pair;
    pair.g0 = stream.exponential();
    pair.g1 = stream.exponential();
    return pair;
}

}  // namespace qpower
