#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qpower/model.hpp"

namespace qpower {

// Ordered power levels p_1 > p_2 > ... > p_L >= 0.
struct PowerCodebook {
    std::vector<double> levels;

    std::size_t size() const noexcept { return levels.size(); }
    double first() const { return levels.front(); }
    double last() const { return levels.back(); }
    // 1-based access, matching the region numbering.
    double operator()(std::size_t j) const { return levels[j - 1]; }

    bool is_valid() const noexcept;
    void validate() const;
};

// A threshold on the g0 axis. Unbounded thresholds arise when mu = 0: the
// region then extends over every g0.
class GainThreshold {
public:
    static GainThreshold bounded(double value) { return GainThreshold(value, false); }
    static GainThreshold unbounded() { return GainThreshold(0.0, true); }

    bool is_unbounded() const noexcept { return unbounded_; }
    double value() const;  // throws UsageError when unbounded
    // e^{-s} and s e^{-s}, exact zero for unbounded thresholds.
    double exp_neg() const noexcept;
    double s_exp_neg() const noexcept;
    bool admits(double g0) const noexcept { return unbounded_ || g0 < value_; }

    bool operator==(const GainThreshold& other) const noexcept {
        return unbounded_ == other.unbounded_ && (unbounded_ || value_ == other.value_);
    }

private:
    GainThreshold(double value, bool unbounded) : value_(value), unbounded_(unbounded) {}
    double value_;
    bool unbounded_;
};

enum class ThresholdVariant { Exact, Zpiora };

std::string to_string(ThresholdVariant variant);
ThresholdVariant threshold_variant_from_string(const std::string& name);

struct QuantizerLayout {
    PowerCodebook codebook;
    Multipliers multipliers;
    std::vector<double> v;          // v_1..v_L, v_j = c / p_j (inf when p_L = 0)
    std::vector<GainThreshold> s;   // s_1..s_{L-1}
    ThresholdVariant variant = ThresholdVariant::Exact;
    // mu = 0 only: 1/(p_j - p_L) - lambda per level j < L, all positive.
    std::vector<double> admissibility_margin;

    std::size_t size() const noexcept { return codebook.size(); }
};

enum class EstimateSource { ClosedForm, MonteCarlo };

struct PerformanceReport {
    double outage = 0.0;
    double atp_usage = 0.0;
    double aip_usage = 0.0;
    EstimateSource source = EstimateSource::ClosedForm;
    std::optional<double> outage_stderr;
    std::optional<double> atp_stderr;
    std::optional<double> aip_stderr;
    std::size_t samples = 0;
};

QuantizerLayout build_layout(const PowerCodebook& cb, const Multipliers& m, const SystemConfig& cfg,
                             ThresholdVariant variant = ThresholdVariant::Exact);

// 1-based feedback index of the region holding the pair.
std::size_t quantize(const PowerGainPair& pair, const QuantizerLayout& layout);

PerformanceReport evaluate_layout(const QuantizerLayout& layout, const SystemConfig& cfg);

// Probability of cell j < L, (e^{-v_j} - e^{-v_{j+1}})(1 - e^{-s_j}).
double cell_probability(const QuantizerLayout& layout, std::size_t j);
// Probability of the outage staircase of region L (g1 < v_1, or
// v_j <= g1 < v_{j+1} with g0 >= s_j).
double staircase_probability(const QuantizerLayout& layout);

// Corner points (s_j, v_j), j = 1..L-1, of a layout with bounded thresholds.
std::vector<PowerGainPair> corner_points(const QuantizerLayout& layout);

// Lagrangian outage + lambda ATP + mu AIP of a closed-form report.
double lagrangian(const PerformanceReport& report, const Multipliers& m);

}  // namespace qpower
