#include "qpower/io.hpp"

#include <cmath>
#include <json.hpp>

#include "qpower/error.hpp"

namespace qpower {

namespace {

using nlohmann::json;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_number(const std::optional<double>& x) {
    return x ? finite_or_null(*x) : json(nullptr);
}

json layout_json(const QuantizerLayout& layout) {
    json v = json::array();
    for (double x : layout.v) v.push_back(finite_or_null(x));
    json s = json::array();
    for (const auto& t : layout.s) s.push_back(t.is_unbounded() ? json(nullptr) : json(t.value()));
    return {{"levels", layout.codebook.levels},
            {"lambda", layout.multipliers.lambda},
            {"mu", layout.multipliers.mu},
            {"v", v},
            {"s", s},
            {"variant", to_string(layout.variant)}};
}

json report_json(const PerformanceReport& r) {
    json out = {{"outage", r.outage},
                {"atp", r.atp_usage},
                {"aip", r.aip_usage},
                {"source", to_string(r.source)}};
    if (r.source == EstimateSource::MonteCarlo) {
        out["samples"] = r.samples;
        out["outage_stderr"] = optional_number(r.outage_stderr);
        out["atp_stderr"] = optional_number(r.atp_stderr);
        out["aip_stderr"] = optional_number(r.aip_stderr);
    }
    return out;
}

template <class T>
T required(const json& j, const char* key, std::vector<std::string>& missing) {
    auto it = j.find(key);
    if (it == j.end()) {
        missing.emplace_back(key);
        return T{};
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        missing.emplace_back(key);
        return T{};
    }
}

}  // namespace

std::string to_string(EstimateSource source) {
    return source == EstimateSource::ClosedForm ? "closed-form" : "monte-carlo";
}

std::string to_string(DualCase active) {
    switch (active) {
        case DualCase::PowerOnly: return "power";
        case DualCase::InterferenceOnly: return "interference";
        case DualCase::Both: return "both";
    }
    return "unknown";
}

std::string layout_to_json(const QuantizerLayout& layout, int indent) {
    return layout_json(layout).dump(indent);
}

std::string report_to_json(const PerformanceReport& report, int indent) {
    return report_json(report).dump(indent);
}

std::string solution_to_json(const QpaSolution& sol, const SystemConfig& cfg, int indent) {
    const auto& d = sol.diagnostics;
    json doc = {
        {"solver", sol.solver},
        {"config",
         {{"r0_nats", cfg.r0()}, {"p_av", cfg.p_av()}, {"q_av", cfg.q_av()}, {"bits", cfg.bits()}}},
        {"layout", layout_json(sol.layout(cfg))},
        {"report", report_json(sol.report)},
        {"diagnostics",
         {{"dual_evaluations", d.dual_evaluations},
          {"active", to_string(d.active)},
          {"kkt_residual_norm", finite_or_null(d.kkt_residual_norm)},
          {"atp_slackness", finite_or_null(d.atp_slackness)},
          {"aip_slackness", finite_or_null(d.aip_slackness)},
          {"duality_gap", d.duality_gap},
          {"small_b_regime", d.small_b_regime},
          {"candidates", d.candidates},
          {"note", d.note}}},
    };
    return doc.dump(indent);
}

StoredSolution solution_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("solution document is not valid JSON: ") + e.what(), {});
    }
    std::vector<std::string> bad;
    const auto cfg_j = required<json>(doc, "config", bad);
    const auto layout_j = required<json>(doc, "layout", bad);
    const auto solver = required<std::string>(doc, "solver", bad);
    if (!bad.empty()) throw ConfigError("solution document is incomplete", bad);

    const auto r0 = required<double>(cfg_j, "r0_nats", bad);
    const auto p_av = required<double>(cfg_j, "p_av", bad);
    const auto q_av = required<double>(cfg_j, "q_av", bad);
    const auto bits = required<int>(cfg_j, "bits", bad);
    const auto levels = required<std::vector<double>>(layout_j, "levels", bad);
    const auto lambda = required<double>(layout_j, "lambda", bad);
    const auto mu = required<double>(layout_j, "mu", bad);
    const auto variant = required<std::string>(layout_j, "variant", bad);
    if (!bad.empty()) throw ConfigError("solution document is incomplete", bad);

    StoredSolution out{SystemConfig(r0, p_av, q_av, bits), {}};
    out.solution.solver = solver;
    out.solution.codebook.levels = levels;
    out.solution.multipliers = Multipliers{lambda, mu};
    try {
        out.solution.variant = threshold_variant_from_string(variant);
    } catch (const Error&) {
        throw ConfigError("unknown threshold variant", {"layout.variant"});
    }
    out.solution.report = evaluate_layout(out.solution.layout(out.config), out.config);
    return out;
}

}  // namespace qpower
