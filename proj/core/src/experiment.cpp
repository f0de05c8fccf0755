#include "qpower/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "qpower/asymptotics.hpp"
#include "qpower/error.hpp"
#include "qpower/full_csi.hpp"
#include "qpower/montecarlo.hpp"
#include "qpower/zpiora.hpp"

namespace qpower {

namespace {

using nlohmann::json;

const char* const kColumns[] = {"solver", "p_av_db", "q_av_db", "bits", "outage", "atp",
                                "aip",    "lambda",  "mu",      "outage_mc", "outage_mc_stderr"};

bool is_quantized(SolverKind k) { return k != SolverKind::FullCsi && k != SolverKind::Asymptotic; }

// Reads a number or a list of numbers; ranges are {start, stop, step} with
// the stop included when it falls on the grid.
std::vector<double> number_list(const json& j, const std::string& key, std::vector<std::string>& bad) {
    std::vector<double> out;
    try {
        if (j.is_array()) {
            for (const auto& x : j) out.push_back(x.get<double>());
        } else if (j.is_number()) {
            out.push_back(j.get<double>());
        } else if (j.is_object()) {
            const double start = j.at("start").get<double>();
            const double stop = j.at("stop").get<double>();
            const double step = j.at("step").get<double>();
            if (!(step > 0.0) || stop < start) throw std::invalid_argument("range");
            const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
            for (long i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
        } else {
            bad.push_back(key);
        }
    } catch (const std::exception&) {
        bad.push_back(key);
        out.clear();
    }
    return out;
}

void check_keys(const json& j, const std::set<std::string>& known, const std::string& prefix,
                std::vector<std::string>& bad) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) bad.push_back(prefix + it.key());
}

template <class T>
void read_field(const json& j, const char* key, T& field, const std::string& prefix,
                std::vector<std::string>& bad) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        field = it->get<T>();
    } catch (const json::exception&) {
        bad.push_back(prefix + key);
    }
}

void read_solver_settings(const json& j, SolverSettings& s, std::vector<std::string>& bad) {
    const std::string pre = "solver_settings.";
    if (!j.is_object()) {
        bad.push_back("solver_settings");
        return;
    }
    check_keys(j,
               {"dual_method", "alpha0", "beta0", "max_iterations", "budget_rtol", "dual_tol",
                "stable_iterations", "root_tol", "restarts", "scan_points", "rng_seed", "glasfa"},
               pre, bad);
    if (auto it = j.find("dual_method"); it != j.end()) {
        const std::string name = it->is_string() ? it->get<std::string>() : "";
        if (name == "bracketing")
            s.dual_method = DualMethod::Bracketing;
        else if (name == "subgradient")
            s.dual_method = DualMethod::Subgradient;
        else
            bad.push_back(pre + "dual_method");
    }
    read_field(j, "alpha0", s.alpha0, pre, bad);
    read_field(j, "beta0", s.beta0, pre, bad);
    read_field(j, "max_iterations", s.max_iterations, pre, bad);
    read_field(j, "budget_rtol", s.budget_rtol, pre, bad);
    read_field(j, "dual_tol", s.dual_tol, pre, bad);
    read_field(j, "stable_iterations", s.stable_iterations, pre, bad);
    read_field(j, "root_tol", s.root_tol, pre, bad);
    read_field(j, "restarts", s.restarts, pre, bad);
    read_field(j, "scan_points", s.scan_points, pre, bad);
    read_field(j, "rng_seed", s.rng_seed, pre, bad);
}

void read_glasfa_settings(const json& j, GlasfaSettings& g, std::vector<std::string>& bad) {
    const std::string pre = "solver_settings.glasfa.";
    if (!j.is_object()) {
        bad.push_back("solver_settings.glasfa");
        return;
    }
    check_keys(j,
               {"training_samples", "k0", "growth", "k_cap", "inner_tol", "distortion_tol",
                "max_lloyd_iterations", "rng_seed"},
               pre, bad);
    read_field(j, "training_samples", g.training_samples, pre, bad);
    read_field(j, "k0", g.k0, pre, bad);
    read_field(j, "growth", g.growth, pre, bad);
    read_field(j, "k_cap", g.k_cap, pre, bad);
    read_field(j, "inner_tol", g.inner_tol, pre, bad);
    read_field(j, "distortion_tol", g.distortion_tol, pre, bad);
    read_field(j, "max_lloyd_iterations", g.max_lloyd_iterations, pre, bad);
    read_field(j, "rng_seed", g.rng_seed, pre, bad);
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Rounds through the 12-digit text form so JSON and CSV carry the same values.
json table_number(const std::optional<double>& x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return std::stod(format_number(*x));
}

void fill_from_solution(ResultRow& row, const QpaSolution& sol) {
    row.outage = sol.report.outage;
    row.atp = sol.report.atp_usage;
    row.aip = sol.report.aip_usage;
    row.lambda = sol.multipliers.lambda;
    row.mu = sol.multipliers.mu;
    std::ostringstream d;
    d << "levels=" << sol.codebook.size() << " kkt=" << sol.diagnostics.kkt_residual_norm
      << " evaluations=" << sol.diagnostics.dual_evaluations;
    if (sol.diagnostics.duality_gap) d << " duality_gap";
    if (!sol.diagnostics.note.empty()) d << " (" << sol.diagnostics.note << ")";
    row.diagnostics = d.str();
}

ResultRow solve_cell(const ExperimentConfig& config, SolverKind kind, double p_db, double q_db,
                     int bits) {
    ResultRow row;
    row.solver = kind;
    row.p_av_db = p_db;
    row.q_av_db = q_db;
    row.bits = bits;
    try {
        const SystemConfig cfg = SystemConfig::from_db(config.r0_nats, p_db, q_db, std::max(bits, 1));
        const auto& settings = config.solver_settings;
        const auto& mc = config.mc;
        if (kind == SolverKind::FullCsi || kind == SolverKind::Asymptotic) {
            const FullCsiSolution full = solve_full_csi_multipliers(cfg, settings);
            row.lambda = full.multipliers.lambda;
            row.mu = full.multipliers.mu;
            if (kind == SolverKind::FullCsi) {
                row.outage = full.outage;
                row.atp = full.atp_usage;
                row.aip = full.aip_usage;
                if (mc.enabled) {
                    const auto est = estimate_full_csi(full.multipliers, cfg, mc.samples, mc.seed);
                    row.outage_mc = est.outage;
                    row.outage_mc_stderr = est.outage_stderr;
                }
            } else {
                const AsymptoticConstants k = solve_constants(full, cfg);
                const std::optional<std::size_t> L =
                    bits == 0 ? std::nullopt : std::optional<std::size_t>(std::size_t{1} << bits);
                row.outage = asymptotic_outage(k, cfg, L);
                std::ostringstream d;
                d << "a=" << k.a << " b=" << k.b << " beta=" << k.beta;
                if (k.multiple_roots) d << " multiple_roots";
                row.diagnostics = d.str();
            }
            return row;
        }
        QpaSolution sol;
        switch (kind) {
            case SolverKind::Optimal: sol = solve_optimal_qpa(cfg, settings); break;
            case SolverKind::Zpiora: sol = solve_zpiora(cfg, settings); break;
            case SolverKind::Meppr: sol = solve_meppr(cfg, settings); break;
            case SolverKind::Glasfa: sol = solve_glasfa(cfg, settings, config.glasfa); break;
            default: break;
        }
        fill_from_solution(row, sol);
        if (mc.enabled) {
            const auto est = estimate_performance(sol.layout(cfg), cfg, mc.samples, mc.seed);
            row.outage_mc = est.outage;
            row.outage_mc_stderr = est.outage_stderr;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Optimal: return "optimal";
        case SolverKind::Zpiora: return "zpiora";
        case SolverKind::Meppr: return "meppr";
        case SolverKind::Glasfa: return "glasfa";
        case SolverKind::FullCsi: return "full-csi";
        case SolverKind::Asymptotic: return "asymptotic";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    for (auto k : {SolverKind::Optimal, SolverKind::Zpiora, SolverKind::Meppr, SolverKind::Glasfa,
                   SolverKind::FullCsi, SolverKind::Asymptotic})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown solver '" + name + "'", {"solvers"});
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what(), {});
    }
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object", {});

    std::vector<std::string> bad;
    check_keys(doc, {"r0_nats", "p_av_db", "q_av_db", "bits", "solvers", "mc", "solver_settings"}, "",
               bad);
    ExperimentConfig c;
    read_field(doc, "r0_nats", c.r0_nats, "", bad);
    for (const char* key : {"p_av_db", "q_av_db", "bits", "solvers"})
        if (!doc.contains(key)) bad.emplace_back(key);
    if (doc.contains("p_av_db")) c.p_av_db = number_list(doc["p_av_db"], "p_av_db", bad);
    if (doc.contains("q_av_db")) c.q_av_db = number_list(doc["q_av_db"], "q_av_db", bad);
    if (doc.contains("bits")) {
        for (double b : number_list(doc["bits"], "bits", bad)) {
            if (b != std::floor(b)) {
                bad.emplace_back("bits");
                break;
            }
            c.bits.push_back(static_cast<int>(b));
        }
    }
    if (doc.contains("solvers")) {
        const auto& s = doc["solvers"];
        if (!s.is_array()) {
            bad.emplace_back("solvers");
        } else {
            for (const auto& name : s) {
                try {
                    c.solvers.push_back(solver_kind_from_string(name.get<std::string>()));
                } catch (const std::exception&) {
                    bad.emplace_back("solvers");
                    break;
                }
            }
        }
    }
    if (auto it = doc.find("mc"); it != doc.end()) {
        if (!it->is_object()) {
            bad.emplace_back("mc");
        } else {
            check_keys(*it, {"enabled", "samples", "seed"}, "mc.", bad);
            read_field(*it, "enabled", c.mc.enabled, "mc.", bad);
            read_field(*it, "samples", c.mc.samples, "mc.", bad);
            read_field(*it, "seed", c.mc.seed, "mc.", bad);
        }
    }
    if (auto it = doc.find("solver_settings"); it != doc.end()) {
        read_solver_settings(*it, c.solver_settings, bad);
        if (it->is_object() && it->contains("glasfa")) read_glasfa_settings((*it)["glasfa"], c.glasfa, bad);
    }
    if (!bad.empty()) throw ConfigError("invalid experiment configuration", bad);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string(), {});
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

void ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (!(r0_nats > 0.0) || !std::isfinite(r0_nats)) bad.emplace_back("r0_nats");
    if (p_av_db.empty()) bad.emplace_back("p_av_db");
    if (q_av_db.empty()) bad.emplace_back("q_av_db");
    for (double x : p_av_db)
        if (!std::isfinite(x)) bad.emplace_back("p_av_db");
    for (double x : q_av_db)
        if (!std::isfinite(x)) bad.emplace_back("q_av_db");
    if (solvers.empty()) bad.emplace_back("solvers");
    const bool quantized = std::any_of(solvers.begin(), solvers.end(), is_quantized);
    const bool asymptotic =
        std::find(solvers.begin(), solvers.end(), SolverKind::Asymptotic) != solvers.end();
    if (bits.empty() && (quantized || asymptotic)) bad.emplace_back("bits");
    for (int b : bits)
        if (b < 0 || b > 30 || (b == 0 && quantized)) {
            bad.emplace_back("bits");
            break;
        }
    if (mc.enabled && mc.samples < 1000) bad.emplace_back("mc.samples");
    try {
        solver_settings.validate();
    } catch (const ConfigError& e) {
        for (const auto& k : e.keys()) bad.push_back("solver_settings." + k);
    }
    try {
        glasfa.validate();
    } catch (const ConfigError& e) {
        for (const auto& k : e.keys()) bad.push_back("solver_settings.glasfa." + k);
    }
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        throw ConfigError("invalid experiment configuration", bad);
    }
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    mc.seed = seed;
    solver_settings.rng_seed = seed;
    glasfa.rng_seed = seed;
}

bool ResultSet::ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.error.empty(); });
}

ResultSet run_experiment(const ExperimentConfig& config, unsigned jobs) {
    config.validate();
    struct Cell {
        SolverKind kind;
        double p, q;
        int bits;
    };
    std::vector<Cell> cells;
    for (SolverKind kind : config.solvers)
        for (double q : config.q_av_db) {
            const std::vector<int> bit_axis = kind == SolverKind::FullCsi ? std::vector<int>{0} : config.bits;
            for (int b : bit_axis)
                for (double p : config.p_av_db) cells.push_back({kind, p, q, b});
        }

    ResultSet out;
    out.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& cell = cells[i];
            out.rows[i] = solve_cell(config, cell.kind, cell.p, cell.q, cell.bits);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

ResultSet run_experiment(const std::filesystem::path& config_path, unsigned jobs) {
    return run_experiment(ExperimentConfig::load(config_path), jobs);
}

TableFormat table_format_from_string(const std::string& name) {
    if (name == "csv") return TableFormat::Csv;
    if (name == "json") return TableFormat::Json;
    throw ConfigError("unknown table format '" + name + "'", {"format"});
}

std::string format_table(const ResultSet& results, TableFormat format) {
    auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
    if (format == TableFormat::Csv) {
        std::string out;
        for (std::size_t i = 0; i < std::size(kColumns); ++i) {
            if (i) out += ',';
            out += kColumns[i];
        }
        out += '\n';
        for (const auto& r : results.rows) {
            out += to_string(r.solver) + ',' + format_number(r.p_av_db) + ',' +
                   format_number(r.q_av_db) + ',' + std::to_string(r.bits) + ',' + opt(r.outage) +
                   ',' + opt(r.atp) + ',' + opt(r.aip) + ',' + opt(r.lambda) + ',' + opt(r.mu) + ',' +
                   opt(r.outage_mc) + ',' + opt(r.outage_mc_stderr) + '\n';
        }
        return out;
    }
    json rows = json::array();
    for (const auto& r : results.rows) {
        json o = json::object();
        o["solver"] = to_string(r.solver);
        o["p_av_db"] = table_number(r.p_av_db);
        o["q_av_db"] = table_number(r.q_av_db);
        o["bits"] = r.bits;
        o["outage"] = table_number(r.outage);
        o["atp"] = table_number(r.atp);
        o["aip"] = table_number(r.aip);
        o["lambda"] = table_number(r.lambda);
        o["mu"] = table_number(r.mu);
        o["outage_mc"] = table_number(r.outage_mc);
        o["outage_mc_stderr"] = table_number(r.outage_mc_stderr);
        rows.push_back(std::move(o));
    }
    return rows.dump(2) + '\n';
}

void emit_table(const ResultSet& results, TableFormat format, const std::filesystem::path& path) {
    if (results.rows.empty()) throw UsageError("result set is empty");
    const std::string text = format_table(results, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ResultSet parse_json_table(const std::string& text) {
    const json doc = json::parse(text);
    if (!doc.is_array()) throw ConfigError("table must be a JSON array", {});
    auto opt = [](const json& o, const char* key) -> std::optional<double> {
        const auto& v = o.at(key);
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
    };
    ResultSet out;
    for (const auto& o : doc) {
        ResultRow r;
        r.solver = solver_kind_from_string(o.at("solver").get<std::string>());
        r.p_av_db = o.at("p_av_db").get<double>();
        r.q_av_db = o.at("q_av_db").get<double>();
        r.bits = o.at("bits").get<int>();
        r.outage = opt(o, "outage");
        r.atp = opt(o, "atp");
        r.aip = opt(o, "aip");
        r.lambda = opt(o, "lambda");
        r.mu = opt(o, "mu");
        r.outage_mc = opt(o, "outage_mc");
        r.outage_mc_stderr = opt(o, "outage_mc_stderr");
        out.rows.push_back(std::move(r));
    }
    return out;
}

}  // namespace qpower
