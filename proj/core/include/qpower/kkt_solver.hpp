#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qpower/dual.hpp"
#include "qpower/model.hpp"
#include "qpower/quantizer.hpp"

namespace qpower {

struct SolverDiagnostics {
    int dual_evaluations = 0;
    DualCase active = DualCase::PowerOnly;
    double kkt_residual_norm = 0.0;  // max-norm
    double atp_slackness = 0.0;
    double aip_slackness = 0.0;
    bool duality_gap = false;
    bool small_b_regime = false;
    std::size_t candidates = 0;  // stationary points compared at the final duals
    std::vector<DualIterate> history;
    std::string note;
};

struct QpaSolution {
    std::string solver;
    PowerCodebook codebook;
    Multipliers multipliers;
    PerformanceReport report;
    ThresholdVariant variant = ThresholdVariant::Exact;
    SolverDiagnostics diagnostics;

    QuantizerLayout layout(const SystemConfig& cfg) const {
        return build_layout(codebook, multipliers, cfg, variant);
    }
};

// p_2..p_{L-1} from p_1 and p_L through the stationarity recursion, with
// p_L appended. Throws InvalidBracket naming the first equation whose log
// argument leaves (0, 1] or whose next level would not stay above p_L.
// `levels` overrides cfg.levels() for codebooks of any size L >= 2.
PowerCodebook forward_recursion(double p1, double pL, const Multipliers& m, const SystemConfig& cfg,
                                std::optional<std::size_t> levels = std::nullopt);

// Entries 1..L-1: Delta_j A_j - e^{-v_j} (c/p_j^2)(fhat_{j-1} - fhat_j).
// Entry L: stationarity in p_L, or max(0, .) of it when p_L = 0 (bound active).
std::vector<double> kkt_residuals(const PowerCodebook& cb, const Multipliers& m,
                                  const SystemConfig& cfg);

// All stationary codebooks found for fixed multipliers: the p_L = 0
// boundary point and every interior root in p_L on the scan grid.
std::vector<PowerCodebook> stationary_codebooks(const Multipliers& m, const SystemConfig& cfg,
                                                const SolverSettings& settings = {});

// The stationary codebook with the smallest Lagrangian.
PowerCodebook solve_codebook(const Multipliers& m, const SystemConfig& cfg,
                             const SolverSettings& settings = {});

QpaSolution solve_optimal_qpa(const SystemConfig& cfg, const SolverSettings& settings = {});

}  // namespace qpower
