#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qpower {

double db_to_linear(double x_db);
double linear_to_db(double x);

// Problem instance. Budgets are linear and noise-normalized; c is the SNR
// gap e^{2 r0} - 1 that a channel realization must clear to avoid outage.
class SystemConfig {
public:
    SystemConfig(double r0, double p_av, double q_av, int bits);

    static SystemConfig from_db(double r0, double p_av_db, double q_av_db, int bits);

    double r0() const noexcept { return r0_; }
    double c() const noexcept { return c_; }
    double p_av() const noexcept { return p_av_; }
    double q_av() const noexcept { return q_av_; }
    int bits() const noexcept { return bits_; }
    std::size_t levels() const noexcept { return levels_; }

    SystemConfig with_bits(int bits) const { return SystemConfig(r0_, p_av_, q_av_, bits); }

private:
    double r0_;
    double c_;
    double p_av_;
    double q_av_;
    int bits_;
    std::size_t levels_;
};

struct PowerGainPair {
    double g0 = 0.0;  // SU transmitter to PU receiver
    double g1 = 0.0;  // SU transmitter to SU receiver
};

struct Multipliers {
    double lambda = 0.0;
    double mu = 0.0;

    void validate() const;
};

enum class DualMethod { Bracketing, Subgradient };

struct SolverSettings {
    DualMethod dual_method = DualMethod::Bracketing;
    // Subgradient step scales. Zero picks 2 / |slope| of the budget usage
    // in that multiplier, estimated at the starting point.
    double alpha0 = 0.0;
    double beta0 = 0.0;
    int max_iterations = 200;
    double budget_rtol = 1e-5;
    double dual_tol = 1e-7;
    int stable_iterations = 5;
    double root_tol = 1e-10;
    // Shifted copies of the p_L scan grid used to find all stationary
    // points of the codebook problem.
    int restarts = 5;
    int scan_points = 24;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

// Seeded uniform stream. Uniforms are built from the top 53 bits of a
// 64-bit Mersenne twister so the sequence is identical across standard
// libraries.
class ChannelStream {
public:
    explicit ChannelStream(std::uint64_t seed) : engine_(seed) {}
    // Substream `index` of `seed`; distinct (seed, index) pairs give
    // unrelated engine states.
    ChannelStream(std::uint64_t seed, std::uint64_t index);

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    // Unit-mean exponential by inverse CDF.
    double exponential() noexcept;

private:
    std::mt19937_64 engine_;
};

PowerGainPair sample_channel(ChannelStream& stream);

// Exponentiated form of the rate test (1/2) ln(1 + g1 p) < r0.
inline bool in_outage(double g1, double p, double c) noexcept { return g1 * p < c; }

}  // namespace qpower
