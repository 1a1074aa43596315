#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "damping.hpp"
#include "diagnostics.hpp"
#include "evolution.hpp"
#include "ground_state.hpp"
#include "io.hpp"
#include "theorem_checks.hpp"

namespace dnls {

struct InitialData {
    enum class Kind { scaled_ground_state, gaussian, boosted_ground_state };

    Kind kind = Kind::scaled_ground_state;
    double lambda = 1.0;     // multiple of Q
    double amplitude = 1.0;  // gaussian
    double width = 1.0;      // gaussian: A exp(-|x|^2 / width^2)
    double velocity = 0.0;   // boost e^{i k x_1}
};

inline std::string to_string(InitialData::Kind k) {
    switch (k) {
        case InitialData::Kind::scaled_ground_state: return "scaled_ground_state";
        case InitialData::Kind::gaussian: return "gaussian";
        case InitialData::Kind::boosted_ground_state: return "boosted_ground_state";
    }
    return "?";
}

struct ScenarioConfig {
    std::string id = "scenario";
    int dim = 1;
    std::size_t n = 512;
    double box = 20.0;
    InitialData initial;
    DampingSpec damping;
    SimConfig sim;
    std::string output_dir;
    double gs_tol = 1e-10;
    int gs_max_iter = 5000;
    WindowRule::Kind window_kind = WindowRule::Kind::scaling;
    double window_w0 = 1.0;
    double window_exponent = 0.5;
    double window_radius = 1.0;
    CheckSettings checks;

    Grid grid() const { return Grid(dim, n, box); }

    WindowRule window_rule(double q_grad_norm) const {
        if (window_kind == WindowRule::Kind::fixed) return WindowRule::fixed(window_radius, q_grad_norm);
        return WindowRule::scaling(q_grad_norm, window_w0, window_exponent);
    }

    void validate() const {
        (void)grid();
        sim.validate();
        if (!(gs_tol > 0.0)) throw ConfigError("gs_tol must be positive");
        if (gs_max_iter < 1) throw ConfigError("gs_max_iter must be positive");
        if (initial.kind == InitialData::Kind::gaussian) {
            if (!(initial.amplitude > 0.0) || !(initial.width > 0.0)) {
                throw ConfigError("gaussian initial data needs amplitude > 0 and width > 0");
            }
        } else if (!(initial.lambda > 0.0)) {
            throw ConfigError("lambda must be positive");
        }
        if (!(damping.amplitude >= 0.0)) throw ConfigError("a0 must be non-negative");
        if (!(window_w0 > 0.0) || !(window_exponent >= 0.0) || !(window_radius > 0.0)) {
            throw ConfigError("window parameters must be positive");
        }
        if (id.empty() || id.find_first_of("/\\ ") != std::string::npos) {
            throw ConfigError("scenario id must be non-empty without spaces or slashes");
        }
    }
};

// ---------------------------------------------------------------------------
// key = value config files

/// Ordered key/value pairs of a flat config file. '#' starts a comment;
/// blank lines are skipped; duplicate keys are errors.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(out)) {
        throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
    }
    return out;
}

inline long parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d != std::floor(d)) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return static_cast<long>(d);
}

}  // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in) {
    using detail::parse_double;
    using detail::parse_int;
    ScenarioConfig cfg;
    for (const auto& [key, v] : parse_key_values(in)) {
        if (key == "id") cfg.id = v;
        else if (key == "dim") cfg.dim = static_cast<int>(parse_int(key, v));
        else if (key == "n") {
            const long n = parse_int(key, v);
            if (n < 2) throw ConfigError("key 'n' must be >= 2");
            cfg.n = static_cast<std::size_t>(n);
        }
        else if (key == "box") cfg.box = parse_double(key, v);
        else if (key == "initial") {
            if (v == "scaled_ground_state") cfg.initial.kind = InitialData::Kind::scaled_ground_state;
            else if (v == "gaussian") cfg.initial.kind = InitialData::Kind::gaussian;
            else if (v == "boosted_ground_state") cfg.initial.kind = InitialData::Kind::boosted_ground_state;
            else throw ConfigError("unknown initial data '" + v + "'");
        }
        else if (key == "lambda") cfg.initial.lambda = parse_double(key, v);
        else if (key == "amplitude") cfg.initial.amplitude = parse_double(key, v);
        else if (key == "width") cfg.initial.width = parse_double(key, v);
        else if (key == "velocity") cfg.initial.velocity = parse_double(key, v);
        else if (key == "damping") {
            if (v == "zero") cfg.damping.kind = DampingSpec::Kind::zero;
            else if (v == "constant") cfg.damping.kind = DampingSpec::Kind::constant;
            else if (v == "gaussian_bump") cfg.damping.kind = DampingSpec::Kind::gaussian_bump;
            else if (v == "negative_bump") cfg.damping.kind = DampingSpec::Kind::negative_bump;
            else if (v == "cosine") cfg.damping.kind = DampingSpec::Kind::cosine;
            else throw ConfigError("unknown damping '" + v + "'");
        }
        else if (key == "a0") cfg.damping.amplitude = parse_double(key, v);
        else if (key == "sigma") cfg.damping.width = parse_double(key, v);
        else if (key == "wavelength") cfg.damping.wavelength = parse_double(key, v);
        else if (key == "dt0") cfg.sim.dt0 = parse_double(key, v);
        else if (key == "t_end") cfg.sim.t_end = parse_double(key, v);
        else if (key == "adapt_const") cfg.sim.adapt_const = parse_double(key, v);
        else if (key == "dt_min") cfg.sim.dt_min = parse_double(key, v);
        else if (key == "tail_threshold") cfg.sim.tail_threshold = parse_double(key, v);
        else if (key == "record_every") cfg.sim.record_every = static_cast<int>(parse_int(key, v));
        else if (key == "gradient_threshold") cfg.sim.gradient_threshold = parse_double(key, v);
        else if (key == "collapse_ratio") cfg.sim.collapse_ratio = parse_double(key, v);
        else if (key == "floor_overshoot") cfg.sim.floor_overshoot = parse_double(key, v);
        else if (key == "gs_tol") cfg.gs_tol = parse_double(key, v);
        else if (key == "gs_max_iter") cfg.gs_max_iter = static_cast<int>(parse_int(key, v));
        else if (key == "window_rule") {
            if (v == "scaling") cfg.window_kind = WindowRule::Kind::scaling;
            else if (v == "fixed") cfg.window_kind = WindowRule::Kind::fixed;
            else throw ConfigError("unknown window_rule '" + v + "'");
        }
        else if (key == "window_w0") cfg.window_w0 = parse_double(key, v);
        else if (key == "window_exponent") cfg.window_exponent = parse_double(key, v);
        else if (key == "window_radius") cfg.window_radius = parse_double(key, v);
        else if (key == "concentration_threshold") cfg.checks.concentration_threshold = parse_double(key, v);
        else if (key == "final_rows_min") cfg.checks.final_rows_min = static_cast<std::size_t>(parse_int(key, v));
        else if (key == "mass_consistency") cfg.checks.mass_consistency = parse_double(key, v);
        else if (key == "peak_growth_limit") cfg.checks.peak_growth_limit = parse_double(key, v);
        else if (key == "out") cfg.output_dir = v;
        else throw ConfigError("unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_scenario(in);
}

// ---------------------------------------------------------------------------
// Ground-state cache

/// Ground states keyed by (dim, N, L, tol), kept in memory and optionally in
/// versioned binary files under a directory. Safe to share between threads.
class GroundStateCache {
public:
    static constexpr const char* kFormat = "dnls-ground-state v1";

    GroundStateCache() = default;
    explicit GroundStateCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const GroundState& get(int dim, std::size_t n, double box, double tol, int max_iter = 5000) {
        const Key key{dim, n, box, tol};
        std::lock_guard lock(mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) return it->second;
        const Grid grid(dim, n, box);
        std::optional<GroundState> gs;
        if (!dir_.empty()) gs = load(grid, tol);
        if (!gs) {
            gs = solve_ground_state(grid, tol, max_iter);
            if (!dir_.empty()) store(*gs, tol);
        }
        return memory_.emplace(key, std::move(*gs)).first->second;
    }

    std::filesystem::path file_for(int dim, std::size_t n, double box, double tol) const {
        char name[160];
        std::snprintf(name, sizeof name, "ground_state_v1_d%d_n%zu_L%.17g_tol%.3e.bin", dim, n, box, tol);
        return dir_ / name;
    }

private:
    using Key = std::tuple<int, std::size_t, double, double>;

    std::optional<GroundState> load(const Grid& grid, double tol) const {
        std::ifstream in(file_for(grid.dim(), grid.points_per_axis(), grid.half_width(), tol), std::ios::binary);
        if (!in) return std::nullopt;
        std::string header;
        std::getline(in, header);
        std::ostringstream expected;
        expected << kFormat << ' ' << grid.dim() << ' ' << grid.points_per_axis() << ' '
                 << io::format_double(grid.half_width()) << ' ' << io::format_double(tol);
        if (header != expected.str()) return std::nullopt;
        std::vector<double> values(grid.size());
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!in) return std::nullopt;
        auto gs = evaluate_ground_state(RealField(grid, std::move(values)));
        if (!(gs.residual < tol)) return std::nullopt;
        return gs;
    }

    void store(const GroundState& gs, double tol) const {
        const auto& grid = gs.profile.grid;
        std::filesystem::create_directories(dir_);
        const auto path = file_for(grid.dim(), grid.points_per_axis(), grid.half_width(), tol);
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out << kFormat << ' ' << grid.dim() << ' ' << grid.points_per_axis() << ' '
                << io::format_double(grid.half_width()) << ' ' << io::format_double(tol) << '\n';
            out.write(reinterpret_cast<const char*>(gs.profile.values.data()),
                      static_cast<std::streamsize>(gs.profile.values.size() * sizeof(double)));
        }
        std::filesystem::rename(tmp, path);
    }

    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<Key, GroundState> memory_;
};

// ---------------------------------------------------------------------------
// Running a scenario

inline ComplexField make_initial_data(const ScenarioConfig& cfg, const GroundState& gs) {
    const Grid grid = cfg.grid();
    switch (cfg.initial.kind) {
        case InitialData::Kind::scaled_ground_state:
            return scaled(to_complex(gs.profile), cfg.initial.lambda);
        case InitialData::Kind::gaussian: {
            const double w2 = cfg.initial.width * cfg.initial.width;
            return sample(grid, [&](const Point& x) {
                return cfg.initial.amplitude * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / w2);
            });
        }
        case InitialData::Kind::boosted_ground_state: {
            ComplexField u = to_complex(gs.profile);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                u.values[i] *= cfg.initial.lambda * std::polar(1.0, cfg.initial.velocity * grid.position(i)[0]);
            }
            return u;
        }
    }
    throw ConfigError("unknown initial data");
}

struct ScenarioResult {
    ScenarioConfig config;
    RunFacts facts;
    BlowupReport blowup;
    std::vector<DiagnosticsRow> rows;
    BalanceReport balance;
    std::vector<TheoremCheckReport> checks;
    double q_mass_sq = 0.0;

    bool any_failure() const {
        return std::any_of(checks.begin(), checks.end(),
                           [](const TheoremCheckReport& c) { return c.status == CheckStatus::fail; });
    }
};

inline io::Json scenario_config_json(const ScenarioConfig& c) {
    return io::Json{
        {"id", c.id},
        {"dim", c.dim},
        {"n", c.n},
        {"box", c.box},
        {"initial", to_string(c.initial.kind)},
        {"lambda", c.initial.lambda},
        {"amplitude", c.initial.amplitude},
        {"width", c.initial.width},
        {"velocity", c.initial.velocity},
        {"damping", to_string(c.damping.kind)},
        {"a0", c.damping.amplitude},
        {"sigma", c.damping.width},
        {"wavelength", c.damping.wavelength},
        {"dt0", c.sim.dt0},
        {"t_end", c.sim.t_end},
        {"adapt_const", c.sim.adapt_const},
        {"dt_min", c.sim.dt_min},
        {"tail_threshold", c.sim.tail_threshold},
        {"record_every", c.sim.record_every},
        {"gradient_threshold", c.sim.gradient_threshold},
        {"collapse_ratio", c.sim.collapse_ratio},
        {"floor_overshoot", c.sim.floor_overshoot},
        {"gs_tol", c.gs_tol},
        {"window_rule", c.window_kind == WindowRule::Kind::scaling ? "scaling" : "fixed"},
        {"window_w0", c.window_w0},
        {"window_exponent", c.window_exponent},
        {"window_radius", c.window_radius},
        {"check_settings",
         {{"peak_growth_limit", c.checks.peak_growth_limit},
          {"concentration_threshold", c.checks.concentration_threshold},
          {"final_rows_min", c.checks.final_rows_min},
          {"mass_consistency", c.checks.mass_consistency}}}};
}

inline io::Json scenario_report_json(const ScenarioResult& r) {
    io::Json checks = io::Json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    return io::Json{{"scenario", r.config.id},
                    {"config", scenario_config_json(r.config)},
                    {"u0_mass_sq", r.facts.u0_mass_sq},
                    {"q_mass_sq", r.q_mass_sq},
                    {"a_sup", r.facts.a_sup},
                    {"blowup", io::blowup_json(r.blowup)},
                    {"balance", io::balance_json(r.balance)},
                    {"checks", std::move(checks)}};
}

/// Writes <dir>/<id>_rows.csv and <dir>/<id>_report.json.
inline void write_scenario_outputs(const ScenarioResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / (r.config.id + "_rows.csv"));
        io::write_rows_csv(csv, r.rows, r.config.dim);
    }
    std::ofstream json(dir / (r.config.id + "_report.json"));
    json << scenario_report_json(r).dump(2) << '\n';
}

/// Evolves the scenario, records diagnostics, evaluates balance laws and every
/// theorem check whose hypotheses hold. Writes outputs if output_dir is set.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, GroundStateCache& cache) {
    cfg.validate();
    const Grid grid = cfg.grid();
    const GroundState& gs = cache.get(cfg.dim, cfg.n, cfg.box, cfg.gs_tol, cfg.gs_max_iter);
    const auto damping = make_damping(grid, cfg.damping);
    const auto u0 = make_initial_data(cfg, gs);

    ScenarioResult result;
    result.config = cfg;
    result.q_mass_sq = gs.mass_sq;
    result.facts = {cfg.id, mass_sq(u0), damping.sup_norm(), damping.is_pointwise_positive()};

    RowRecorder recorder(damping, cfg.window_rule(gs.grad_norm()));
    result.blowup = evolve(u0, damping, cfg.sim, gs.grad_sq, recorder.sink());
    result.rows = recorder.take_rows();
    result.balance = balance_report(result.rows, damping);

    if (!result.rows.empty()) {
        result.checks.push_back(check_global_existence(result.blowup, result.rows, result.facts, gs, cfg.checks));
        result.checks.push_back(check_blowup_time_bound(result.blowup, result.rows, result.facts, gs, cfg.checks));
        result.checks.push_back(check_concentration(result.blowup, result.rows, result.facts, gs, cfg.checks));
    }
    if (!cfg.output_dir.empty()) write_scenario_outputs(result, cfg.output_dir);
    return result;
}

// ---------------------------------------------------------------------------
// Bundled catalog and suite

/// The scenario catalog, all d = 1 on N = 512, L = 20.
inline std::vector<ScenarioConfig> bundled_catalog() {
    std::vector<ScenarioConfig> out;
    auto base = [](std::string id) {
        ScenarioConfig c;
        c.id = std::move(id);
        c.dim = 1;
        c.n = 512;
        c.box = 20.0;
        c.sim.dt0 = 1e-3;
        c.sim.dt_min = 1e-9;
        c.sim.adapt_const = 1.0;
        c.sim.record_every = 1;
        return c;
    };
    for (double lambda : {0.5, 0.9, 1.0}) {
        char id[64];
        std::snprintf(id, sizeof id, "global_bump_l%03d", static_cast<int>(std::lround(lambda * 100)));
        auto c = base(id);
        c.initial.lambda = lambda;
        c.damping = DampingSpec::gaussian_bump(1.0, 2.0);
        c.sim.t_end = 20.0;
        out.push_back(c);
    }
    {
        auto c = base("soliton_a0");
        c.sim.t_end = 5.0;
        out.push_back(c);
    }
    {
        auto c = base("collapse_a0_l120");
        c.initial.lambda = 1.2;
        c.sim.t_end = 5.0;
        c.sim.adapt_const = 2e-3;
        out.push_back(c);
    }
    for (double lambda : {0.9, 0.99}) {
        char id[64];
        std::snprintf(id, sizeof id, "negative_bump_l%03d", static_cast<int>(std::lround(lambda * 100)));
        auto c = base(id);
        c.initial.lambda = lambda;
        c.damping = DampingSpec::negative_bump(0.5, 2.0);
        c.sim.t_end = 10.0;
        c.sim.adapt_const = 2e-3;
        out.push_back(c);
    }
    {
        auto c = base("cosine_l090");
        c.initial.lambda = 0.9;
        c.damping = DampingSpec::cosine(0.5, 10.0);
        c.sim.t_end = 10.0;
        c.sim.adapt_const = 2e-3;
        out.push_back(c);
    }
    {
        auto c = base("constant_decay");
        c.damping = DampingSpec::constant(0.5);
        c.sim.t_end = 2.0;
        out.push_back(c);
    }
    return out;
}

struct SuiteOptions {
    std::filesystem::path output_dir;
    unsigned threads = 1;
    std::vector<std::string> only;  // empty: all scenarios
};

inline SuiteOptions parse_suite_config(std::istream& in) {
    SuiteOptions opt;
    for (const auto& [key, v] : parse_key_values(in)) {
        if (key == "out") opt.output_dir = v;
        else if (key == "threads") {
            const long t = detail::parse_int(key, v);
            if (t < 1) throw ConfigError("threads must be >= 1");
            opt.threads = static_cast<unsigned>(t);
        } else if (key == "only") {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item.erase(0, item.find_first_not_of(' '));
                item.erase(item.find_last_not_of(' ') + 1);
                if (!item.empty()) opt.only.push_back(item);
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (opt.output_dir.empty()) throw ConfigError("suite config needs 'out'");
    return opt;
}

/// Runs the selected catalog scenarios (independently, on up to `threads`
/// workers) and writes per-scenario outputs plus summary.csv. Results are
/// ordered by catalog position.
inline std::vector<ScenarioResult> run_suite(const SuiteOptions& opt) {
    std::vector<ScenarioConfig> selected;
    for (auto c : bundled_catalog()) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), c.id) == opt.only.end()) continue;
        c.output_dir = opt.output_dir.string();
        selected.push_back(std::move(c));
    }
    for (const auto& id : opt.only) {
        const auto all = bundled_catalog();
        if (std::none_of(all.begin(), all.end(), [&](const ScenarioConfig& c) { return c.id == id; })) {
            throw ConfigError("unknown scenario '" + id + "'");
        }
    }

    GroundStateCache cache(opt.output_dir / "gs_cache");
    std::vector<ScenarioResult> results(selected.size());
    std::vector<std::exception_ptr> errors(selected.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(next_mutex);
                if (next >= selected.size()) return;
                i = next++;
            }
            try {
                results[i] = run_scenario(selected[i], cache);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(selected.size())));
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::ofstream summary(opt.output_dir / "summary.csv");
    summary << "scenario,blew_up,stop_reason,t_detect,mass_residual,energy_residual,momentum_residual,mass_drift,"
               "energy_drift,momentum_drift,envelope_ok,"
               "claim,status,bound_value,observed,margin\n";
    for (const auto& r : results) {
        for (const auto& c : r.checks) {
            summary << r.config.id << ',' << (r.blowup.blew_up ? "true" : "false") << ','
                    << to_string(r.blowup.stop_reason) << ',' << io::format_double(r.blowup.t_detect) << ','
                    << io::format_double(r.balance.mass_residual) << ','
                    << io::format_double(r.balance.energy_residual) << ','
                    << io::format_double(r.balance.momentum_residual) << ','
                    << io::format_double(r.balance.mass_drift) << ','
                    << io::format_double(r.balance.energy_drift) << ','
                    << io::format_double(r.balance.momentum_drift) << ','
                    << (r.balance.envelope_ok ? "true" : "false") << ',' << to_string(c.claim) << ','
                    << to_string(c.status) << ',' << (c.bound_value ? io::format_double(*c.bound_value) : "") << ','
                    << io::format_double(c.observed) << ',' << io::format_double(c.margin) << '\n';
        }
    }
    return results;
}

}  // namespace dnls
