#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "qpa_common.hpp"
#include "qpower/baselines.hpp"
#include "qpower/error.hpp"
#include "qpower/numeric.hpp"

namespace qpower {

namespace {

// |k x| beyond this leaves sigma at exactly 0 or 1 in double precision.
constexpr double kSaturation = 40.0;

void require_training_codebook(const PowerCodebook& cb) {
    if (cb.size() < 2) throw StructuralError("codebook needs at least two levels", 0);
    for (std::size_t i = 0; i < cb.size(); ++i) {
        if (!std::isfinite(cb.levels[i]) || cb.levels[i] < 0.0)
            throw StructuralError("codebook level is negative or not finite", i + 1);
        if (i > 0 && cb.levels[i - 1] < cb.levels[i])
            throw StructuralError("training codebook must be sorted in decreasing order", i + 1);
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(x)); }

// Smoothed objective of one region. Samples are held sorted by g1, so the
// saturated tails are counted instead of evaluated.
class RegionObjective {
public:
    RegionObjective(std::vector<double> g1, double weight, double k, double r0)
        : g1_(std::move(g1)), weight_(weight), k_(k), r0_(r0) {
        std::sort(g1_.begin(), g1_.end());
        lo_ = std::expm1(2.0 * (r0_ - kSaturation / k_));
        hi_ = std::expm1(2.0 * (r0_ + kSaturation / k_));
    }

    double operator()(double p) const {
        if (p <= 0.0) return static_cast<double>(g1_.size()) * sigmoid(-k_ * r0_);
        auto first = g1_.begin();
        auto last = g1_.end();
        if (lo_ > 0.0) first = std::lower_bound(g1_.begin(), g1_.end(), lo_ / p);
        last = std::upper_bound(first, g1_.end(), hi_ / p);
        double total = static_cast<double>(first - g1_.begin());
        for (auto it = first; it != last; ++it)
            total += sigmoid(k_ * (0.5 * std::log1p(*it * p) - r0_));
        return total + p * weight_;
    }

private:
    std::vector<double> g1_;
    double weight_;
    double k_;
    double r0_;
    double lo_;
    double hi_;
};

}  // namespace

void GlasfaSettings::validate() const {
    std::vector<std::string> bad;
    if (training_samples < 10000) bad.emplace_back("training_samples");
    if (!(k0 > 0.0)) bad.emplace_back("k0");
    if (!(growth > 1.0)) bad.emplace_back("growth");
    if (!(k_cap >= k0)) bad.emplace_back("k_cap");
    if (!(inner_tol > 0.0)) bad.emplace_back("inner_tol");
    if (!(distortion_tol > 0.0)) bad.emplace_back("distortion_tol");
    if (max_lloyd_iterations < 1) bad.emplace_back("max_lloyd_iterations");
    if (!bad.empty()) throw ConfigError("invalid GLASFA settings", bad);
}

std::vector<PowerGainPair> draw_training_set(std::size_t n, std::uint64_t seed) {
    ChannelStream stream(seed);
    std::vector<PowerGainPair> out(n);
    for (auto& s : out) s = sample_channel(stream);
    return out;
}

std::vector<std::size_t> glasfa_assign(const std::vector<PowerGainPair>& samples,
                                       const PowerCodebook& cb, const Multipliers& m,
                                       const SystemConfig& cfg) {
    require_training_codebook(cb);
    const double c = cfg.c();
    const std::size_t L = cb.size();
    // First index holding each distinct value, so ties go to the smallest index.
    std::vector<std::size_t> first_of(L);
    for (std::size_t j = 0; j < L; ++j)
        first_of[j] = (j > 0 && cb.levels[j] == cb.levels[j - 1]) ? first_of[j - 1] : j;
    const std::size_t lowest = first_of[L - 1];
    const double p_low = cb.levels[L - 1];

    std::vector<std::size_t> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double w = m.lambda + m.mu * s.g0;
        // Levels are non-increasing, so the levels out of outage form a prefix.
        std::size_t count = 0;
        while (count < L && !in_outage(s.g1, cb.levels[count], c)) ++count;
        std::size_t pick = lowest;
        if (count > 0) {
            const std::size_t J = first_of[count - 1];
            const double keep = w * cb.levels[J];
            const double drop = in_outage(s.g1, p_low, c) ? 1.0 + w * p_low : w * p_low;
            if (keep <= drop) pick = J;
        }
        out[i] = pick + 1;
    }
    return out;
}

double glasfa_distortion(const std::vector<PowerGainPair>& samples, const PowerCodebook& cb,
                         const std::vector<std::size_t>& assignments, const Multipliers& m,
                         const SystemConfig& cfg) {
    if (samples.empty()) throw UsageError("training set is empty");
    if (assignments.size() != samples.size())
        throw UsageError("assignment count does not match the training set");
    const double c = cfg.c();
    NeumaierSum sum;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double p = cb(assignments[i]);
        const auto& s = samples[i];
        sum += (in_outage(s.g1, p, c) ? 1.0 : 0.0) + (m.lambda + m.mu * s.g0) * p;
    }
    return sum.value() / static_cast<double>(samples.size());
}

GlasfaStep glasfa_iterate(const std::vector<PowerGainPair>& samples, const PowerCodebook& cb,
                          const Multipliers& m, double k, const SystemConfig& cfg,
                          const GlasfaSettings& gs) {
    if (samples.empty()) throw UsageError("training set is empty");
    if (!(k > 0.0)) throw UsageError("sharpness must be positive");
    GlasfaStep step;
    step.assignments = glasfa_assign(samples, cb, m, cfg);

    const std::size_t L = cb.size();
    std::vector<std::vector<double>> g1(L);
    std::vector<NeumaierSum> weight(L);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t j = step.assignments[i] - 1;
        g1[j].push_back(samples[i].g1);
        weight[j] += m.lambda + m.mu * samples[i].g0;
    }

    const double upper = 10.0 * cb.first();
    step.codebook = cb;
    for (std::size_t j = 0; j < L; ++j) {
        if (g1[j].empty()) continue;
        const RegionObjective f(std::move(g1[j]), weight[j].value(), k, cfg.r0());
        double best = golden_section_minimize(f, 0.0, upper, gs.inner_tol);
        // The search interval is closed: compare with its ends.
        if (f(0.0) < f(best)) best = 0.0;
        if (f(upper) < f(best)) best = upper;
        step.codebook.levels[j] = best;
    }

    // Keep assignments pointing at the same level values after sorting.
    std::vector<std::size_t> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return step.codebook.levels[a] > step.codebook.levels[b];
    });
    std::vector<std::size_t> rank(L);
    PowerCodebook sorted;
    sorted.levels.resize(L);
    for (std::size_t r = 0; r < L; ++r) {
        sorted.levels[r] = step.codebook.levels[order[r]];
        rank[order[r]] = r + 1;
    }
    for (auto& a : step.assignments) a = rank[a - 1];
    step.codebook = std::move(sorted);
    step.distortion = glasfa_distortion(samples, step.codebook, step.assignments, m, cfg);
    return step;
}

std::vector<double> glasfa_sharpness_schedule(const GlasfaSettings& gs) {
    gs.validate();
    std::vector<double> ks;
    for (double k = gs.k0; k <= gs.k_cap * (1.0 + 1e-12); k *= gs.growth) ks.push_back(k);
    if (ks.back() < gs.k_cap * (1.0 - 1e-12)) ks.push_back(gs.k_cap);
    return ks;
}

namespace {

PowerCodebook train_over(const std::vector<PowerGainPair>& samples, PowerCodebook cb,
                         const Multipliers& m, const SystemConfig& cfg, const GlasfaSettings& gs,
                         const std::vector<double>& ks) {
    for (const double k : ks) {
        std::optional<double> previous;
        for (int it = 0; it < gs.max_lloyd_iterations; ++it) {
            GlasfaStep step = glasfa_iterate(samples, cb, m, k, cfg, gs);
            cb = std::move(step.codebook);
            const double d = step.distortion;
            if (previous && std::fabs(d - *previous) <= gs.distortion_tol * std::fabs(*previous)) break;
            previous = d;
        }
    }
    return cb;
}

// A level with lambda (p_j - p_L) >= 1 never wins a sample, and an empty
// region keeps its level, so such a level is stuck for good. Compress the
// upper levels toward p_L until every region can be populated.
PowerCodebook fit_to_multipliers(PowerCodebook cb, const Multipliers& m) {
    const double pL = cb.last();
    const double spread = m.lambda * (cb.first() - pL);
    if (spread < 0.9) return cb;
    for (double& p : cb.levels) p = pL + (p - pL) * 0.9 / spread;
    return cb;
}

}  // namespace

PowerCodebook glasfa_train(const std::vector<PowerGainPair>& samples, const PowerCodebook& initial,
                           const Multipliers& m, const SystemConfig& cfg, const GlasfaSettings& gs) {
    return train_over(samples, initial, m, cfg, gs, glasfa_sharpness_schedule(gs));
}

PowerCodebook glasfa_reduce(const PowerCodebook& cb, const Multipliers& m) {
    std::vector<double> levels = cb.levels;
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.empty()) throw StructuralError("codebook is empty", 0);
    const double pL = levels.back();
    PowerCodebook out;
    for (std::size_t j = 0; j + 1 < levels.size(); ++j)
        if (m.lambda * (levels[j] - pL) < 1.0) out.levels.push_back(levels[j]);
    out.levels.push_back(pL);
    if (out.size() < 2) throw StructuralError("trained codebook collapsed to a single level", 1);
    return out;
}

PowerCodebook glasfa_initial_codebook(const SystemConfig& cfg, std::uint64_t seed) {
    const std::size_t L = cfg.levels();
    ChannelStream stream(seed);
    PowerCodebook cb;
    cb.levels.resize(L);
    for (std::size_t j = 0; j < L; ++j) {
        const double t = L > 1 ? static_cast<double>(j) / static_cast<double>(L - 1) : 0.0;
        const double jitter = 0.9 + 0.2 * stream.uniform();
        cb.levels[j] = cfg.p_av() * std::exp2(3.0 - 6.0 * t) * jitter;
    }
    std::sort(cb.levels.begin(), cb.levels.end(), std::greater<>());
    return cb;
}

QpaSolution solve_glasfa(const SystemConfig& cfg, const SolverSettings& settings,
                         const GlasfaSettings& gs) {
    settings.validate();
    gs.validate();
    const auto samples = draw_training_set(gs.training_samples, gs.rng_seed);
    const auto ks = glasfa_sharpness_schedule(gs);

    // Every dual point anneals through the whole schedule, starting from the
    // previous trained codebook fitted to the new multipliers. At the final
    // sharpness the objective is flat around p = 0, so a level trained to
    // zero could not recover without the low-k passes.
    std::optional<PowerCodebook> warm;
    auto inner = [&](const Multipliers& m) {
        const PowerCodebook start = warm ? *warm : glasfa_initial_codebook(cfg, gs.rng_seed);
        PowerCodebook trained = train_over(samples, fit_to_multipliers(start, m), m, cfg, gs, ks);
        warm = trained;
        return glasfa_reduce(trained, m);
    };
    QpaSolution sol = detail::solve_qpa_with(cfg, settings, inner, ThresholdVariant::Exact, "glasfa");
    sol.diagnostics.note = "levels after reduction: " + std::to_string(sol.codebook.size());
    return sol;
}

}  // namespace qpower
