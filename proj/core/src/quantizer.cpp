#include "qpower/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpower/error.hpp"
#include "qpower/numeric.hpp"

namespace qpower {

bool PowerCodebook::is_valid() const noexcept {
    if (levels.size() < 2) return false;
    if (!(levels.back() >= 0.0)) return false;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] > levels[i + 1]) || !std::isfinite(levels[i])) return false;
    return std::isfinite(levels.back());
}

void PowerCodebook::validate() const {
    if (levels.size() < 2) throw StructuralError("codebook needs at least two levels", 0);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!std::isfinite(levels[i]) || levels[i] < 0.0)
            throw StructuralError("codebook level is negative or not finite", i + 1);
        if (i > 0 && !(levels[i - 1] > levels[i]))
            throw StructuralError("codebook levels are not strictly decreasing", i + 1);
    }
}

double GainThreshold::value() const {
    if (unbounded_) throw UsageError("unbounded threshold has no finite value");
    return value_;
}

double GainThreshold::exp_neg() const noexcept { return unbounded_ ? 0.0 : std::exp(-value_); }

double GainThreshold::s_exp_neg() const noexcept {
    return unbounded_ ? 0.0 : value_ * std::exp(-value_);
}

std::string to_string(ThresholdVariant variant) {
    return variant == ThresholdVariant::Exact ? "exact" : "zpiora";
}

ThresholdVariant threshold_variant_from_string(const std::string& name) {
    if (name == "exact") return ThresholdVariant::Exact;
    if (name == "zpiora") return ThresholdVariant::Zpiora;
    throw ConfigError("unknown threshold variant '" + name + "'", {"variant"});
}

QuantizerLayout build_layout(const PowerCodebook& cb, const Multipliers& m, const SystemConfig& cfg,
                             ThresholdVariant variant) {
    cb.validate();
    m.validate();
    const std::size_t L = cb.size();
    const double c = cfg.c();
    const double pL = cb.last();

    QuantizerLayout layout;
    layout.codebook = cb;
    layout.multipliers = m;
    layout.variant = variant;
    layout.v.resize(L);
    for (std::size_t j = 0; j < L; ++j)
        layout.v[j] = cb.levels[j] > 0.0 ? c / cb.levels[j] : std::numeric_limits<double>::infinity();

    layout.s.reserve(L - 1);
    for (std::size_t j = 1; j < L; ++j) {
        const double pj = cb(j);
        const double d = variant == ThresholdVariant::Exact ? pj - pL : pj;
        if (m.mu > 0.0) {
            const double s = 1.0 / (m.mu * d) - m.lambda / m.mu;
            if (!(s > 0.0))
                throw StructuralError("g0 threshold is not positive at level " + std::to_string(j), j);
            if (!layout.s.empty() && !(s > layout.s.back().value()))
                throw StructuralError("g0 thresholds are not increasing at level " + std::to_string(j),
                                      j);
            layout.s.push_back(GainThreshold::bounded(s));
        } else {
            const double margin = 1.0 / d - m.lambda;
            if (!(margin > 0.0))
                throw StructuralError(
                    "admissibility lambda < 1/(p_j - p_L) violated at level " + std::to_string(j), j);
            layout.admissibility_margin.push_back(margin);
            layout.s.push_back(GainThreshold::unbounded());
        }
    }
    return layout;
}

std::size_t quantize(const PowerGainPair& pair, const QuantizerLayout& layout) {
    const std::size_t L = layout.size();
    // Index of the last threshold v_j <= g1 (left-closed cells).
    const auto it = std::upper_bound(layout.v.begin(), layout.v.end(), pair.g1);
    const auto j = static_cast<std::size_t>(it - layout.v.begin());
    if (j == 0 || j >= L) return L;
    return layout.s[j - 1].admits(pair.g0) ? j : L;
}

double cell_probability(const QuantizerLayout& layout, std::size_t j) {
    const double delta = std::exp(-layout.v[j - 1]) - std::exp(-layout.v[j]);
    return delta * (1.0 - layout.s[j - 1].exp_neg());
}

double staircase_probability(const QuantizerLayout& layout) {
    NeumaierSum sum;
    sum += -std::expm1(-layout.v[0]);
    for (std::size_t j = 1; j < layout.size(); ++j)
        sum += (std::exp(-layout.v[j - 1]) - std::exp(-layout.v[j])) * layout.s[j - 1].exp_neg();
    return sum.value();
}

PerformanceReport evaluate_layout(const QuantizerLayout& layout, const SystemConfig& cfg) {
    // A codebook may use fewer levels than the feedback resolution allows.
    if (layout.size() < 2 || layout.size() > cfg.levels())
        throw UsageError("layout has more levels than the feedback resolution allows");
    const std::size_t L = layout.size();
    const double pL = layout.codebook.last();
    NeumaierSum outage, atp, aip;
    outage += -std::expm1(-layout.v[0]);
    atp += pL;
    aip += pL;
    for (std::size_t j = 1; j < L; ++j) {
        const double delta = std::exp(-layout.v[j - 1]) - std::exp(-layout.v[j]);
        const GainThreshold& s = layout.s[j - 1];
        const double weight = (layout.codebook(j) - pL) * delta;
        outage += delta * s.exp_neg();
        if (s.is_unbounded()) {
            atp += weight;
            aip += weight;
        } else {
            atp += weight * -std::expm1(-s.value());
            aip += weight * phi2(s.value());
        }
    }
    PerformanceReport report;
    report.outage = std::clamp(outage.value(), 0.0, 1.0);
    report.atp_usage = atp.value();
    report.aip_usage = aip.value();
    report.source = EstimateSource::ClosedForm;
    return report;
}

std::vector<PowerGainPair> corner_points(const QuantizerLayout& layout) {
    std::vector<PowerGainPair> points;
    for (std::size_t j = 1; j < layout.size(); ++j) {
        if (layout.s[j - 1].is_unbounded()) continue;
        points.push_back({layout.s[j - 1].value(), layout.v[j - 1]});
    }
    return points;
}

double lagrangian(const PerformanceReport& report, const Multipliers& m) {
    return report.outage + m.lambda * report.atp_usage + m.mu * report.aip_usage;
}

}  // namespace qpower
