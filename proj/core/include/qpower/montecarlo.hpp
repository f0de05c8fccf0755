#pragma once

#include <cstddef>
#include <cstdint>

#include "qpower/model.hpp"
#include "qpower/quantizer.hpp"

namespace qpower {

struct MonteCarloOptions {
    // Samples per shard. Shard i draws from seed + i, so results depend on
    // (n, seed, shard_size) only, never on the number of worker threads.
    std::size_t shard_size = std::size_t{1} << 17;
    unsigned jobs = 1;
};

// Simulates the layout: quantize each draw, apply the indexed power, and
// record outage (rate test), transmit power and g0-weighted power.
PerformanceReport estimate_performance(const QuantizerLayout& layout, const SystemConfig& cfg,
                                       std::size_t n, std::uint64_t seed,
                                       const MonteCarloOptions& options = {});

// The same estimate for the full-CSI truncated inversion. Outage is the
// event that the law transmits nothing: when it transmits, c / g1 meets the
// rate target with equality.
PerformanceReport estimate_full_csi(const Multipliers& m, const SystemConfig& cfg, std::size_t n,
                                    std::uint64_t seed, const MonteCarloOptions& options = {});

}  // namespace qpower
