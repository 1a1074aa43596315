// Command-line front end: ground states, single evolutions, the bundled
// scenario suite and the Gagliardo-Nirenberg check.
//
// Exit codes: 0 when every applicable check passes (or is inconclusive for
// resolution reasons), 1 on a hard failure, 2 on configuration errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <dnls/dnls.hpp>

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

void print_checks(const dnls::ScenarioResult& r) {
    for (const auto& c : r.checks) {
        std::printf("  %-18s %-15s observed=%-12.6g bound=%-12s %s\n", to_string(c.claim).c_str(),
                    to_string(c.status).c_str(), c.observed,
                    c.bound_value ? dnls::io::format_double(*c.bound_value).c_str() : "-", c.notes.c_str());
    }
}

void print_result(const dnls::ScenarioResult& r) {
    std::printf("%s: blew_up=%s stop=%s t=%.6g peak_growth=%.4g mass_res=%.3e energy_res=%.3e momentum_res=%.3e "
                "drift=%.3e/%.3e/%.3e envelope=%s\n",
                r.config.id.c_str(), r.blowup.blew_up ? "yes" : "no", to_string(r.blowup.stop_reason).c_str(),
                r.blowup.t_detect,
                r.blowup.initial_grad_sq > 0 ? r.blowup.peak_grad_sq / r.blowup.initial_grad_sq : 0.0,
                r.balance.mass_residual, r.balance.energy_residual, r.balance.momentum_residual,
                r.balance.mass_drift, r.balance.energy_drift, r.balance.momentum_drift,
                r.balance.envelope_ok ? "ok" : "VIOLATED");
    print_checks(r);
}

int run_ground_state(int dim, std::size_t n, double box, double tol, int max_iter, const std::string& out) {
    const dnls::Grid grid(dim, n, box);
    const auto gs = dnls::solve_ground_state(grid, tol, max_iter);
    fs::create_directories(out);
    const std::string stem = "ground_state_d" + std::to_string(dim) + "_n" + std::to_string(n);
    {
        std::ofstream csv(fs::path(out) / (stem + ".csv"));
        dnls::io::write_profile_csv(csv, gs);
    }
    const auto summary = dnls::io::ground_state_json(gs).dump(2);
    std::ofstream(fs::path(out) / (stem + ".json")) << summary << '\n';
    std::cout << summary << '\n';
    return kOk;
}

int run_evolve(const std::string& config, const std::string& out) {
    auto cfg = dnls::parse_scenario_file(config);
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) throw dnls::ConfigError("no output directory (use --out or the 'out' key)");
    dnls::GroundStateCache cache(fs::path(cfg.output_dir) / "gs_cache");
    const auto result = dnls::run_scenario(cfg, cache);
    print_result(result);
    return result.any_failure() ? kFailure : kOk;
}

int run_suite(const std::string& config) {
    std::ifstream in(config);
    if (!in) throw dnls::ConfigError("cannot open config file " + config);
    const auto opt = dnls::parse_suite_config(in);
    const auto results = dnls::run_suite(opt);
    bool failed = false;
    for (const auto& r : results) {
        print_result(r);
        failed = failed || r.any_failure();
    }
    std::printf("summary written to %s\n", (opt.output_dir / "summary.csv").string().c_str());
    return failed ? kFailure : kOk;
}

int run_gn_check(int dim, std::size_t n, double box, int samples, std::uint64_t seed) {
    const dnls::Grid grid(dim, n, box);
    const auto gs = dnls::solve_ground_state(grid, 1e-10, 5000);
    const double j_q = dnls::gn_ratio(dnls::to_complex(gs.profile));
    const double c_opt = dnls::sharp_gn_constant(gs);
    dnls::RandomSmoothField gen(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) worst = std::max(worst, dnls::gn_ratio(gen(grid)));
    std::printf("dim=%d J(Q)=%.12f C_opt=%.12f rel_diff=%.3e random_max=%.12f (%d fields) ratio=%.6f\n", dim, j_q,
                c_opt, std::abs(j_q - c_opt) / c_opt, worst, samples, worst / j_q);
    const bool ok = std::abs(j_q - c_opt) <= 1e-6 * c_opt && worst < j_q;
    return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped L2-critical NLS laboratory"};
    app.require_subcommand(1);

    int gs_dim = 1;
    std::size_t gs_n = 512;
    double gs_box = 20.0;
    double gs_tol = 1e-10;
    int gs_max_iter = 5000;
    std::string gs_out;
    auto* gs_cmd = app.add_subcommand("ground-state", "Compute Q and write its profile (CSV) and summary (JSON)");
    gs_cmd->add_option("--dim", gs_dim, "Spatial dimension")->required()->check(CLI::Range(1, 3));
    gs_cmd->add_option("--n", gs_n, "Points per axis (power of two)")->required();
    gs_cmd->add_option("--box", gs_box, "Box half-width L")->required();
    gs_cmd->add_option("--tol", gs_tol, "Residual tolerance")->required();
    gs_cmd->add_option("--max-iter", gs_max_iter, "Iteration cap");
    gs_cmd->add_option("--out", gs_out, "Output directory")->required();

    std::string ev_config;
    std::string ev_out;
    auto* ev_cmd = app.add_subcommand("evolve", "Run one scenario from a key=value config");
    ev_cmd->add_option("--config", ev_config, "Scenario config file")->required();
    ev_cmd->add_option("--out", ev_out, "Output directory (overrides 'out')");

    std::string suite_config;
    auto* suite_cmd = app.add_subcommand("suite", "Run the bundled scenario catalog");
    suite_cmd->add_option("--config", suite_config, "Suite config file (out, threads, only)")->required();

    int gn_dim = 1;
    std::size_t gn_n = 0;
    double gn_box = 0.0;
    int gn_samples = 1000;
    std::uint64_t gn_seed = 20240611;
    auto* gn_cmd = app.add_subcommand("gn-check", "Compare J(Q), the sharp constant and random fields");
    gn_cmd->add_option("--dim", gn_dim, "Spatial dimension")->required()->check(CLI::Range(1, 3));
    gn_cmd->add_option("--n", gn_n, "Points per axis (default 512/256/64 for d=1/2/3)");
    gn_cmd->add_option("--box", gn_box, "Box half-width (default 20/15/12)");
    gn_cmd->add_option("--samples", gn_samples, "Number of random fields");
    gn_cmd->add_option("--seed", gn_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*gs_cmd) return run_ground_state(gs_dim, gs_n, gs_box, gs_tol, gs_max_iter, gs_out);
        if (*ev_cmd) return run_evolve(ev_config, ev_out);
        if (*suite_cmd) return run_suite(suite_config);
        if (*gn_cmd) {
            const std::size_t n = gn_n ? gn_n : (gn_dim == 1 ? 512 : gn_dim == 2 ? 256 : 64);
            const double box = gn_box > 0 ? gn_box : (gn_dim == 1 ? 20.0 : gn_dim == 2 ? 15.0 : 12.0);
            return run_gn_check(gn_dim, n, box, gn_samples, gn_seed);
        }
    } catch (const dnls::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kConfigError;
}
