#pragma once

#include <cstddef>
#include <optional>

#include "qpower/full_csi.hpp"
#include "qpower/model.hpp"

namespace qpower {

enum class AsymptoticBranch { MuPositive, MuZero };

struct AsymptoticConstants {
    AsymptoticBranch branch = AsymptoticBranch::MuPositive;
    double a = 0.0;     // mu > 0 branch
    double b = 0.0;     // a (1 + 1/(c mu))
    double beta = 0.0;  // mu = 0 branch
    Multipliers full_csi;
    // More than one positive root of the defining equation was bracketed;
    // `a` is the smallest.
    bool multiple_roots = false;
};

// Solves the high-resolution constants against the full-CSI multipliers.
AsymptoticConstants solve_constants(const FullCsiSolution& full, const SystemConfig& cfg);

// Asymptotic outage with L regions; an empty L gives the L -> infinity limit.
double asymptotic_outage(const AsymptoticConstants& consts, const SystemConfig& cfg,
                         std::optional<std::size_t> L);

}  // namespace qpower
