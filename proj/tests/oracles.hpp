#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's threshold or recursion code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct Performance {
    double outage = 0.0;
    double atp = 0.0;
    double aip = 0.0;
    double lagrangian = 0.0;
};

// Exact expectations of the quantizer that, for every channel pair, picks
// the level minimising 1{g1 p < c} + (lambda + mu g0) p. Within a band
// c/p_j <= g1 < c/p_{j+1} the costs only depend on g0 and are affine in it,
// so the g0 integral is done over the lower envelope of those lines.
inline Performance nearest_level(const std::vector<double>& p, double lambda, double mu, double c) {
    const std::size_t L = p.size();
    std::vector<double> edges;  // g1 band edges: 0, c/p_1, ..., c/p_L, inf
    edges.push_back(0.0);
    for (double x : p) edges.push_back(x > 0.0 ? c / x : std::numeric_limits<double>::infinity());
    edges.push_back(std::numeric_limits<double>::infinity());

    Performance out;
    for (std::size_t band = 0; band + 1 < edges.size(); ++band) {
        const double lo = edges[band];
        const double hi = edges[band + 1];
        if (!(hi > lo)) continue;
        const double mass = std::exp(-lo) - std::exp(-hi);
        if (mass <= 0.0) continue;
        // In this band levels 1..band are out of outage.
        auto cost = [&](std::size_t i, double g0) {
            return (i < band ? 0.0 : 1.0) + (lambda + mu * g0) * p[i];
        };
        auto best = [&](double g0) {
            std::size_t arg = 0;
            for (std::size_t i = 1; i < L; ++i)
                if (cost(i, g0) < cost(arg, g0)) arg = i;
            return arg;
        };
        // Envelope breakpoints on g0 found by bisection between grid points.
        std::vector<double> cuts{0.0};
        if (mu > 0.0) {
            double prev_g = 0.0;
            std::size_t prev = best(0.0);
            for (int k = 1; k <= 4000; ++k) {
                const double g = 60.0 * k / 4000.0;
                const std::size_t cur = best(g);
                if (cur != prev) {
                    double a = prev_g, b = g;
                    for (int it = 0; it < 200; ++it) {
                        const double m = 0.5 * (a + b);
                        (best(m) == prev ? a : b) = m;
                    }
                    cuts.push_back(0.5 * (a + b));
                    prev = cur;
                }
                prev_g = g;
            }
        }
        cuts.push_back(std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k];
            const double b = cuts[k + 1];
            const double probe = std::isinf(b) ? a + 1.0 : 0.5 * (a + b);
            const std::size_t i = best(probe);
            const double pa = std::exp(-a), pb = std::isinf(b) ? 0.0 : std::exp(-b);
            const double w0 = pa - pb;                                            // P(a<=g0<b)
            const double w1 = (1.0 + a) * pa - (std::isinf(b) ? 0.0 : (1.0 + b) * pb);  // E[g0; ..]
            const bool outage = i >= band;
            out.outage += mass * w0 * (outage ? 1.0 : 0.0);
            out.atp += mass * w0 * p[i];
            out.aip += mass * w1 * p[i];
        }
    }
    out.lagrangian = out.outage + lambda * out.atp + mu * out.aip;
    return out;
}

}  // namespace oracle
