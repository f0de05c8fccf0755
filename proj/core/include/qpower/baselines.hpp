#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qpower/kkt_solver.hpp"

namespace qpower {

// ---------------------------------------------------------------- MEPPR

// Absolute residuals of the equal-weighted-power system for a codebook:
// entries j < L are p_j Delta_j A_j - K, entry L is
// p_L (lambda + mu - sum_j Delta_j A_j) - K, with K = (lambda P + mu Q) / L.
std::vector<double> meppr_residuals(const PowerCodebook& cb, const Multipliers& m,
                                    const SystemConfig& cfg);

// Solves the equal-weighted-power system for fixed multipliers by damped
// Newton in log-power, starting from `guess` (L positive decreasing levels).
PowerCodebook solve_meppr_codebook(const Multipliers& m, const SystemConfig& cfg,
                                   const PowerCodebook& guess);

QpaSolution solve_meppr(const SystemConfig& cfg, const SolverSettings& settings = {});

// --------------------------------------------------------------- GLASFA

struct GlasfaSettings {
    std::size_t training_samples = 100000;
    double k0 = 20.0;
    double growth = 1.5;
    double k_cap = 768.8671875;  // 20 * 1.5^9
    double inner_tol = 1e-8;
    double distortion_tol = 1e-4;  // relative change that triggers a k step
    int max_lloyd_iterations = 25;  // per sharpness value
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct GlasfaStep {
    std::vector<std::size_t> assignments;  // 1-based region per sample
    PowerCodebook codebook;                // updated levels, sorted, possibly tied
    double distortion = 0.0;               // exact-indicator distortion after the update
};

std::vector<PowerGainPair> draw_training_set(std::size_t n, std::uint64_t seed);

// Nearest-neighbour assignment under d((g0,g1), j) = 1{g1 p_j < c} + (lambda + mu g0) p_j,
// ties to the smallest index.
std::vector<std::size_t> glasfa_assign(const std::vector<PowerGainPair>& samples,
                                       const PowerCodebook& cb, const Multipliers& m,
                                       const SystemConfig& cfg);

// Mean exact-indicator Lagrangian distortion of the given assignment.
double glasfa_distortion(const std::vector<PowerGainPair>& samples, const PowerCodebook& cb,
                         const std::vector<std::size_t>& assignments, const Multipliers& m,
                         const SystemConfig& cfg);

// One Lloyd pass: assign, then move each level to the minimiser of the
// sigmoid-smoothed regional objective over [0, 10 p_1] by golden section.
GlasfaStep glasfa_iterate(const std::vector<PowerGainPair>& samples, const PowerCodebook& cb,
                          const Multipliers& m, double k, const SystemConfig& cfg,
                          const GlasfaSettings& gs = {});

std::vector<double> glasfa_sharpness_schedule(const GlasfaSettings& gs);

// Trains a codebook for fixed multipliers through the whole sharpness
// schedule, starting from `initial`.
PowerCodebook glasfa_train(const std::vector<PowerGainPair>& samples, const PowerCodebook& initial,
                           const Multipliers& m, const SystemConfig& cfg, const GlasfaSettings& gs);

// Sorts, merges tied levels and drops levels whose region is empty
// (lambda (p_j - p_L) >= 1), leaving a codebook with a valid stepwise layout.
PowerCodebook glasfa_reduce(const PowerCodebook& cb, const Multipliers& m);

PowerCodebook glasfa_initial_codebook(const SystemConfig& cfg, std::uint64_t seed);

QpaSolution solve_glasfa(const SystemConfig& cfg, const SolverSettings& settings = {},
                         const GlasfaSettings& gs = {});

}  // namespace qpower
