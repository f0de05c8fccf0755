// Command-line driver: single solves, sweeps from config files, Monte Carlo
// verification of stored solutions and high-resolution curves.
#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qpower/error.hpp"
#include "qpower/experiment.hpp"
#include "qpower/full_csi.hpp"
#include "qpower/io.hpp"
#include "qpower/montecarlo.hpp"
#include "qpower/zpiora.hpp"

namespace {

using namespace qpower;

constexpr int kRowErrors = 1;
constexpr int kBadInput = 2;
constexpr int kMismatch = 3;

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path, {});
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int report_rows(const ResultSet& results, const std::string& out, const std::string& format) {
    write_output(format_table(results, table_format_from_string(format)), out);
    int status = 0;
    for (const auto& r : results.rows) {
        if (r.error.empty()) continue;
        std::cerr << to_string(r.solver) << " p_av_db=" << r.p_av_db << " q_av_db=" << r.q_av_db
                  << " bits=" << r.bits << ": " << r.error << '\n';
        status = kRowErrors;
    }
    return status;
}

struct SolveArgs {
    std::string solver = "optimal";
    double r0 = 0.25;
    double p_av_db = 10.0;
    double q_av_db = 0.0;
    int bits = 2;
    std::string out;
    std::size_t mc_samples = 0;
    std::uint64_t seed = 1;
};

int run_solve(const SolveArgs& a) {
    const SolverKind kind = solver_kind_from_string(a.solver);
    const SystemConfig cfg = SystemConfig::from_db(a.r0, a.p_av_db, a.q_av_db, a.bits);
    SolverSettings settings;
    settings.rng_seed = a.seed;
    nlohmann::json doc;
    if (kind == SolverKind::FullCsi) {
        const auto full = solve_full_csi_multipliers(cfg, settings);
        doc = {{"solver", "full-csi"},
               {"lambda", full.multipliers.lambda},
               {"mu", full.multipliers.mu},
               {"report", {{"outage", full.outage}, {"atp", full.atp_usage}, {"aip", full.aip_usage}}}};
        if (a.mc_samples > 0)
            doc["monte_carlo"] = nlohmann::json::parse(
                report_to_json(estimate_full_csi(full.multipliers, cfg, a.mc_samples, a.seed)));
    } else if (kind == SolverKind::Asymptotic) {
        throw UsageError("use the asymptotic subcommand for high-resolution curves");
    } else {
        QpaSolution sol;
        if (kind == SolverKind::Optimal) sol = solve_optimal_qpa(cfg, settings);
        if (kind == SolverKind::Zpiora) sol = solve_zpiora(cfg, settings);
        if (kind == SolverKind::Meppr) sol = solve_meppr(cfg, settings);
        if (kind == SolverKind::Glasfa) {
            GlasfaSettings gs;
            gs.rng_seed = a.seed;
            sol = solve_glasfa(cfg, settings, gs);
        }
        doc = nlohmann::json::parse(solution_to_json(sol, cfg));
        if (a.mc_samples > 0)
            doc["monte_carlo"] = nlohmann::json::parse(
                report_to_json(estimate_performance(sol.layout(cfg), cfg, a.mc_samples, a.seed)));
    }
    write_output(doc.dump(2), a.out);
    return 0;
}

struct SweepArgs {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

int run_sweep(const SweepArgs& a) {
    ExperimentConfig config = ExperimentConfig::load(a.config);
    if (a.seed) config.override_seed(*a.seed);
    return report_rows(run_experiment(config, a.jobs), a.out, a.format);
}

struct VerifyArgs {
    std::string solution;
    std::string out;
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    double sigmas = 3.0;
};

int run_verify(const VerifyArgs& a) {
    const StoredSolution stored = solution_from_json(read_file(a.solution));
    const auto& cfg = stored.config;
    const auto& closed = stored.solution.report;
    MonteCarloOptions options;
    options.jobs = a.jobs;
    const auto mc = estimate_performance(stored.solution.layout(cfg), cfg, a.samples, a.seed, options);

    nlohmann::json doc = {{"solver", stored.solution.solver}, {"samples", mc.samples}, {"seed", a.seed}};
    bool agree = true;
    auto check = [&](const char* name, double exact, double estimate, double stderr_) {
        const double z = stderr_ > 0.0 ? (estimate - exact) / stderr_ : (estimate == exact ? 0.0 : INFINITY);
        const bool ok = std::fabs(z) <= a.sigmas;
        agree = agree && ok;
        doc[name] = {{"closed_form", exact}, {"monte_carlo", estimate}, {"stderr", stderr_},
                     {"z", std::isfinite(z) ? nlohmann::json(z) : nlohmann::json(nullptr)}, {"within_band", ok}};
    };
    check("outage", closed.outage, mc.outage, mc.outage_stderr.value_or(0.0));
    check("atp", closed.atp_usage, mc.atp_usage, mc.atp_stderr.value_or(0.0));
    check("aip", closed.aip_usage, mc.aip_usage, mc.aip_stderr.value_or(0.0));
    write_output(doc.dump(2), a.out);
    return agree ? 0 : kMismatch;
}

struct AsymptoticArgs {
    std::string config;
    double r0 = 0.25;
    double p_av_db = 10.0;
    double q_av_db = 0.0;
    int max_bits = 12;
    bool limit = false;
    std::string out;
    std::string format = "csv";
};

int run_asymptotic(const AsymptoticArgs& a) {
    ExperimentConfig config;
    if (!a.config.empty()) {
        config = ExperimentConfig::load(a.config);
        config.solvers = {SolverKind::Asymptotic};
    } else {
        config.r0_nats = a.r0;
        config.p_av_db = {a.p_av_db};
        config.q_av_db = {a.q_av_db};
        config.solvers = {SolverKind::Asymptotic};
        for (int b = 1; b <= a.max_bits; ++b) config.bits.push_back(b);
        if (a.limit) config.bits.push_back(0);
    }
    return report_rows(run_experiment(config), a.out, a.format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized power control for spectrum-sharing cognitive radio"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve one system and print the solution as JSON");
    s->add_option("--solver", solve.solver, "optimal, zpiora, meppr, glasfa or full-csi")
        ->capture_default_str();
    s->add_option("--r0", solve.r0, "Target rate in nats")->capture_default_str();
    s->add_option("--p-av-db", solve.p_av_db, "Average transmit power budget (dB)")->capture_default_str();
    s->add_option("--q-av-db", solve.q_av_db, "Average interference budget (dB)")->capture_default_str();
    s->add_option("--bits", solve.bits, "Feedback bits")->capture_default_str();
    s->add_option("--mc-samples", solve.mc_samples, "Attach a Monte Carlo check with this many samples");
    s->add_option("--seed", solve.seed, "Random seed")->capture_default_str();
    s->add_option("--out", solve.out, "Output file (default stdout)");

    SweepArgs sweep;
    auto* w = app.add_subcommand("sweep", "Run a solver grid from a configuration file");
    w->add_option("--config", sweep.config, "Experiment configuration (JSON)")->required();
    w->add_option("--out", sweep.out, "Output file (default stdout)");
    w->add_option("--format", sweep.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    w->add_option("--seed", sweep.seed, "Override every seed in the configuration");
    w->add_option("--jobs", sweep.jobs, "Worker threads")->capture_default_str();

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "Check a stored solution against simulation");
    v->add_option("solution", verify.solution, "Solution JSON written by 'solve'")->required();
    v->add_option("--samples", verify.samples, "Monte Carlo samples")->capture_default_str();
    v->add_option("--seed", verify.seed, "Random seed")->capture_default_str();
    v->add_option("--jobs", verify.jobs, "Worker threads")->capture_default_str();
    v->add_option("--sigmas", verify.sigmas, "Accepted band in standard errors")->capture_default_str();
    v->add_option("--out", verify.out, "Output file (default stdout)");

    AsymptoticArgs asym;
    auto* h = app.add_subcommand("asymptotic", "High-resolution outage against feedback bits");
    h->add_option("--config", asym.config, "Take the budget grid and bits from a configuration");
    h->add_option("--r0", asym.r0, "Target rate in nats")->capture_default_str();
    h->add_option("--p-av-db", asym.p_av_db, "Average transmit power budget (dB)")->capture_default_str();
    h->add_option("--q-av-db", asym.q_av_db, "Average interference budget (dB)")->capture_default_str();
    h->add_option("--max-bits", asym.max_bits, "Largest number of bits")->capture_default_str();
    h->add_flag("--limit", asym.limit, "Also emit the infinite-resolution limit (bits = 0)");
    h->add_option("--out", asym.out, "Output file (default stdout)");
    h->add_option("--format", asym.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*s) return run_solve(solve);
        if (*w) return run_sweep(sweep);
        if (*v) return run_verify(verify);
        if (*h) return run_asymptotic(asym);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what();
        for (const auto& k : e.keys()) std::cerr << (&k == &e.keys().front() ? " [" : ", ") << k;
        if (!e.keys().empty()) std::cerr << ']';
        std::cerr << '\n';
        return kBadInput;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRowErrors;
    }
    return 0;
}
