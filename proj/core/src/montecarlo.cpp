#include "qpower/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "qpower/error.hpp"
#include "qpower/full_csi.hpp"

namespace qpower {

namespace {

struct Accumulator {
    std::size_t n = 0;
    std::size_t outages = 0;
    double power = 0.0;
    double power_sq = 0.0;
    double interference = 0.0;
    double interference_sq = 0.0;

    void add(bool outage, double p, double g0) {
        ++n;
        outages += outage ? 1 : 0;
        power += p;
        power_sq += p * p;
        const double q = g0 * p;
        interference += q;
        interference_sq += q * q;
    }
    void merge(const Accumulator& other) {
        n += other.n;
        outages += other.outages;
        power += other.power;
        power_sq += other.power_sq;
        interference += other.interference;
        interference_sq += other.interference_sq;
    }
};

template <class Draw>
PerformanceReport simulate(std::size_t n, std::uint64_t seed, const MonteCarloOptions& options,
                           Draw&& draw) {
    if (n < 1000) throw UsageError("Monte Carlo estimates need at least 1000 samples");
    const std::size_t shard_size = std::max<std::size_t>(options.shard_size, 1);
    const std::size_t shards = (n + shard_size - 1) / shard_size;
    std::vector<Accumulator> parts(shards);

    auto run_shard = [&](std::size_t i) {
        ChannelStream stream(seed, i);
        const std::size_t count = std::min(shard_size, n - i * shard_size);
        Accumulator& acc = parts[i];
        for (std::size_t k = 0; k < count; ++k) draw(sample_channel(stream), acc);
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(shards)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < shards; ++i) run_shard(i);
    } else {
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < shards; i += jobs) run_shard(i);
            });
        for (auto& t : workers) t.join();
    }

    Accumulator total;
    for (const auto& part : parts) total.merge(part);
    const double N = static_cast<double>(total.n);
    auto sample_stderr = [N](double sum, double sum_sq) {
        const double mean = sum / N;
        const double var = std::max(0.0, (sum_sq - N * mean * mean) / (N - 1.0));
        return std::sqrt(var / N);
    };

    PerformanceReport report;
    report.source = EstimateSource::MonteCarlo;
    report.samples = total.n;
    report.outage = static_cast<double>(total.outages) / N;
    report.outage_stderr = std::sqrt(report.outage * (1.0 - report.outage) / N);
    report.atp_usage = total.power / N;
    report.atp_stderr = sample_stderr(total.power, total.power_sq);
    report.aip_usage = total.interference / N;
    report.aip_stderr = sample_stderr(total.interference, total.interference_sq);
    return report;
}

}  // namespace

PerformanceReport estimate_performance(const QuantizerLayout& layout, const SystemConfig& cfg,
                                       std::size_t n, std::uint64_t seed,
                                       const MonteCarloOptions& options) {
    const double c = cfg.c();
    return simulate(n, seed, options, [&](const PowerGainPair& pair, Accumulator& acc) {
        const double p = layout.codebook(quantize(pair, layout));
        acc.add(in_outage(pair.g1, p, c), p, pair.g0);
    });
}

PerformanceReport estimate_full_csi(const Multipliers& m, const SystemConfig& cfg, std::size_t n,
                                    std::uint64_t seed, const MonteCarloOptions& options) {
    return simulate(n, seed, options, [&](const PowerGainPair& pair, Accumulator& acc) {
        const double p = full_csi_power(pair, m, cfg);
        acc.add(p == 0.0, p, pair.g0);
    });
}

}  // namespace qpower
