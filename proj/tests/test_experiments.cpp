#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <dnls/dnls.hpp>

using namespace dnls;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("dnls_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

const GroundState& q1() {
    static const GroundState gs = solve_ground_state(Grid(1, 256, 20.0), 1e-10, 5000);
    return gs;
}

ScenarioConfig collapse_config() {
    for (const auto& c : bundled_catalog()) {
        if (c.id == "collapse_a0_l120") return c;
    }
    throw std::runtime_error("collapse scenario missing");
}

std::vector<DiagnosticsRow> decaying_rows(std::size_t n) {
    std::vector<DiagnosticsRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].time = 0.1 * static_cast<double>(i);
        rows[i].mass_sq = 2.0 - 0.01 * static_cast<double>(i);
        rows[i].grad_sq = 1.0;
    }
    return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
// config parsing

TEST(ScenarioConfigParse, ReadsKeysCommentsAndBlankLines) {
    const auto c = parse(
        "# a comment\n"
        "id = test_run\n"
        "dim=1\n"
        "n = 256   # trailing comment\n"
        "box = 15\n"
        "\n"
        "initial = boosted_ground_state\n"
        "lambda = 0.8\n"
        "velocity = 0.5\n"
        "damping = gaussian_bump\n"
        "a0 = 0.7\n"
        "sigma = 3\n"
        "t_end = 2.5\n"
        "record_every = 4\n"
        "window_rule = fixed\n"
        "window_radius = 0.25\n"
        "out = /tmp/somewhere\n");
    EXPECT_EQ(c.id, "test_run");
    EXPECT_EQ(c.dim, 1);
    EXPECT_EQ(c.n, 256u);
    EXPECT_DOUBLE_EQ(c.box, 15.0);
    EXPECT_EQ(c.initial.kind, InitialData::Kind::boosted_ground_state);
    EXPECT_DOUBLE_EQ(c.initial.lambda, 0.8);
    EXPECT_DOUBLE_EQ(c.initial.velocity, 0.5);
    EXPECT_EQ(c.damping.kind, DampingSpec::Kind::gaussian_bump);
    EXPECT_DOUBLE_EQ(c.damping.amplitude, 0.7);
    EXPECT_DOUBLE_EQ(c.damping.width, 3.0);
    EXPECT_DOUBLE_EQ(c.sim.t_end, 2.5);
    EXPECT_EQ(c.sim.record_every, 4);
    EXPECT_EQ(c.window_kind, WindowRule::Kind::fixed);
    EXPECT_DOUBLE_EQ(c.window_radius, 0.25);
    EXPECT_EQ(c.output_dir, "/tmp/somewhere");
}

TEST(ScenarioConfigParse, RejectsBadInput) {
    EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse("n = 64\nn = 128\n"), ConfigError);
    EXPECT_THROW(parse("box = twelve\n"), ConfigError);
    EXPECT_THROW(parse("box = 12x\n"), ConfigError);
    EXPECT_THROW(parse("box = inf\n"), ConfigError);
    EXPECT_THROW(parse("just a line\n"), ConfigError);
    EXPECT_THROW(parse("= 3\n"), ConfigError);
    EXPECT_THROW(parse("damping = sideways\n"), ConfigError);
    EXPECT_THROW(parse("initial = square\n"), ConfigError);
    EXPECT_THROW(parse("n = 100\n"), ConfigError);  // not a power of two
    EXPECT_THROW(parse("n = 1\n"), ConfigError);
    EXPECT_THROW(parse("dim = 4\n"), ConfigError);
    EXPECT_THROW(parse("record_every = 1.5\n"), ConfigError);
    EXPECT_THROW(parse("lambda = -1\n"), ConfigError);
    EXPECT_THROW(parse("id = has space\n"), ConfigError);
    EXPECT_THROW((void)parse_scenario_file("/nonexistent/dir/file.cfg"), ConfigError);
}

TEST(ScenarioConfigParse, ErrorNamesTheKey) {
    try {
        (void)parse("t_end = soon\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("t_end"), std::string::npos);
    }
}

TEST(SuiteConfigParse, ReadsOutThreadsAndOnly) {
    std::istringstream in("out = /tmp/x\nthreads = 3\nonly = soliton_a0, constant_decay\n");
    const auto opt = parse_suite_config(in);
    EXPECT_EQ(opt.output_dir, fs::path("/tmp/x"));
    EXPECT_EQ(opt.threads, 3u);
    ASSERT_EQ(opt.only.size(), 2u);
    EXPECT_EQ(opt.only[0], "soliton_a0");
    EXPECT_EQ(opt.only[1], "constant_decay");
}

TEST(SuiteConfigParse, RejectsBadInput) {
    std::istringstream no_out("threads = 2\n");
    EXPECT_THROW((void)parse_suite_config(no_out), ConfigError);
    std::istringstream zero_threads("out = /tmp/x\nthreads = 0\n");
    EXPECT_THROW((void)parse_suite_config(zero_threads), ConfigError);
    std::istringstream unknown("out = /tmp/x\ncolour = red\n");
    EXPECT_THROW((void)parse_suite_config(unknown), ConfigError);
}

TEST(Suite, UnknownScenarioIdThrows) {
    SuiteOptions opt;
    opt.output_dir = fresh_dir("unknown_id");
    opt.only = {"no_such_scenario"};
    EXPECT_THROW((void)run_suite(opt), ConfigError);
}

// ---------------------------------------------------------------------------
// catalog

TEST(Catalog, IdsUniqueAndConfigsValid) {
    const auto cat = bundled_catalog();
    std::set<std::string> ids;
    for (const auto& c : cat) {
        EXPECT_TRUE(ids.insert(c.id).second) << c.id;
        EXPECT_NO_THROW(c.validate()) << c.id;
    }
    for (const char* id : {"global_bump_l050", "global_bump_l090", "global_bump_l100", "soliton_a0",
                           "collapse_a0_l120", "negative_bump_l090", "negative_bump_l099", "cosine_l090",
                           "constant_decay"}) {
        EXPECT_TRUE(ids.count(id)) << id;
    }
}

TEST(Catalog, GlobalRunsHavePositiveDampingAndSubcriticalMass) {
    for (const auto& c : bundled_catalog()) {
        if (c.id.rfind("global_bump", 0) != 0) continue;
        EXPECT_EQ(c.damping.kind, DampingSpec::Kind::gaussian_bump);
        EXPECT_GT(c.damping.amplitude, 0.0);
        EXPECT_LE(c.initial.lambda, 1.0);
        EXPECT_GE(c.sim.t_end, 20.0);
    }
}

// ---------------------------------------------------------------------------
// ground-state cache

TEST(GroundStateCache, FileRoundTripAndCorruption) {
    const auto dir = fresh_dir("cache");
    GroundStateCache first(dir);
    const auto& a = first.get(1, 128, 15.0, 1e-10);
    const auto path = first.file_for(1, 128, 15.0, 1e-10);
    ASSERT_TRUE(fs::exists(path));

    GroundStateCache second(dir);
    const auto& b = second.get(1, 128, 15.0, 1e-10);
    EXPECT_EQ(a.profile.values, b.profile.values);
    EXPECT_DOUBLE_EQ(a.mass_sq, b.mass_sq);

    // same call on one instance returns the same object
    EXPECT_EQ(&first.get(1, 128, 15.0, 1e-10), &a);

    std::ofstream(path, std::ios::trunc) << "garbage\n";
    GroundStateCache third(dir);
    const auto& c = third.get(1, 128, 15.0, 1e-10);
    EXPECT_NEAR(c.mass_sq, a.mass_sq, 1e-10);
    EXPECT_LT(c.residual, 1e-10);
}

TEST(GroundStateCache, KeysDistinguishGrids) {
    GroundStateCache cache;
    const auto& a = cache.get(1, 128, 15.0, 1e-10);
    const auto& b = cache.get(1, 256, 15.0, 1e-10);
    EXPECT_NE(&a, &b);
    EXPECT_EQ(b.profile.values.size(), 256u);
}

// ---------------------------------------------------------------------------
// running scenarios

TEST(RunScenario, WritesParsableOutputsDeterministically) {
    const auto dir = fresh_dir("run");
    auto cfg = parse(
        "id = small\nn = 128\nbox = 15\nlambda = 0.9\ndamping = gaussian_bump\na0 = 1\nsigma = 2\n"
        "t_end = 0.5\ndt0 = 1e-3\nrecord_every = 10\n");
    cfg.output_dir = (dir / "one").string();
    GroundStateCache cache;
    const auto r1 = run_scenario(cfg, cache);
    cfg.output_dir = (dir / "two").string();
    const auto r2 = run_scenario(cfg, cache);

    const auto csv = slurp(dir / "one" / "small_rows.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), io::rows_csv_header(1));
    EXPECT_EQ(csv, slurp(dir / "two" / "small_rows.csv"));
    EXPECT_EQ(slurp(dir / "one" / "small_report.json"), slurp(dir / "two" / "small_report.json"));

    const auto doc = nlohmann::json::parse(slurp(dir / "one" / "small_report.json"));
    EXPECT_EQ(doc["scenario"], "small");
    EXPECT_EQ(doc["config"]["n"], 128);
    ASSERT_EQ(doc["checks"].size(), 3u);
    EXPECT_EQ(doc["checks"][0]["claim"], "global_existence");
    EXPECT_EQ(doc["checks"][0]["status"], "pass");
    EXPECT_TRUE(doc["checks"][1]["bound_value"].is_null());
    EXPECT_EQ(doc["blowup"]["stop_reason"], "horizon_reached");

    EXPECT_EQ(r1.checks.size(), 3u);
    EXPECT_FALSE(r1.any_failure());
    EXPECT_EQ(r1.rows.size(), r2.rows.size());
    EXPECT_EQ(r1.rows.back().mass_sq, r2.rows.back().mass_sq);
}

TEST(RunScenario, InitialDataKinds) {
    const auto& gs = q1();
    ScenarioConfig cfg;
    cfg.n = 256;
    cfg.initial.lambda = 0.5;
    const auto scaled_q = make_initial_data(cfg, gs);
    EXPECT_NEAR(mass_sq(scaled_q), 0.25 * gs.mass_sq, 1e-12);

    cfg.initial.kind = InitialData::Kind::boosted_ground_state;
    cfg.initial.lambda = 1.0;
    cfg.initial.velocity = 1.0;
    const auto boosted = make_initial_data(cfg, gs);
    EXPECT_NEAR(mass_sq(boosted), gs.mass_sq, 1e-12);

    cfg.initial.kind = InitialData::Kind::gaussian;
    cfg.initial.amplitude = 2.0;
    cfg.initial.width = 1.0;
    const auto g = make_initial_data(cfg, gs);
    // int 4 exp(-2 x^2) dx = 4 sqrt(pi/2)
    EXPECT_NEAR(mass_sq(g), 4.0 * std::sqrt(std::numbers::pi / 2.0), 1e-10);
}

// ---------------------------------------------------------------------------
// theorem checks

TEST(BlowupTimeBound, Values) {
    const double q = 2.0;
    EXPECT_NEAR(*blowup_time_bound(1.0, q / std::exp(1.0), q), 1.0, 1e-14);
    EXPECT_NEAR(*blowup_time_bound(0.5, q / std::exp(1.0), q), 2.0, 1e-14);
    EXPECT_EQ(*blowup_time_bound(1.0, q, q), 0.0);
    EXPECT_FALSE(blowup_time_bound(1.0, 1.01 * q, q).has_value());
    EXPECT_FALSE(blowup_time_bound(0.0, 0.5 * q, q).has_value());
    EXPECT_FALSE(blowup_time_bound(1.0, 0.0, q).has_value());
}

TEST(BlowupTimeBoundCheck, BoundaryMassPasses) {
    const auto& gs = q1();
    BlowupReport rep;
    rep.blew_up = true;
    rep.t_detect = 0.3;
    rep.terminal_mass_sq = gs.mass_sq;
    const RunFacts facts{"edge", gs.mass_sq, 1.0, false};
    const auto c = check_blowup_time_bound(rep, {}, facts, gs);
    EXPECT_EQ(c.status, CheckStatus::pass);
    ASSERT_TRUE(c.bound_value.has_value());
    EXPECT_EQ(*c.bound_value, 0.0);
    EXPECT_NEAR(c.margin, 0.3, 1e-15);
}

TEST(BlowupTimeBoundCheck, LowTerminalMassIsInconclusive) {
    const auto& gs = q1();
    BlowupReport rep;
    rep.blew_up = true;
    rep.t_detect = 10.0;
    rep.terminal_mass_sq = 0.64 * gs.mass_sq;
    const RunFacts facts{"low", 0.81 * gs.mass_sq, 0.5, false};
    const auto c = check_blowup_time_bound(rep, {}, facts, gs);
    EXPECT_EQ(c.status, CheckStatus::inconclusive);
    EXPECT_NEAR(*c.bound_value, std::log(1.0 / 0.9) / 0.5, 1e-10);
    EXPECT_NE(c.notes.find("mass consistency"), std::string::npos);
}

TEST(BlowupTimeBoundCheck, EarlyDetectionIsInconclusiveNotFail) {
    const auto& gs = q1();
    BlowupReport rep;
    rep.blew_up = true;
    rep.t_detect = 0.01;
    rep.terminal_mass_sq = 0.98 * gs.mass_sq;
    const RunFacts facts{"early", 0.25 * gs.mass_sq, 1.0, false};
    const auto c = check_blowup_time_bound(rep, {}, facts, gs);
    EXPECT_EQ(c.status, CheckStatus::inconclusive);
    EXPECT_LT(c.margin, 0.0);
}

TEST(BlowupTimeBoundCheck, NotApplicableWithoutBlowupOrAboveQ) {
    const auto& gs = q1();
    BlowupReport rep;
    const RunFacts facts{"none", 0.5 * gs.mass_sq, 1.0, true};
    EXPECT_EQ(check_blowup_time_bound(rep, {}, facts, gs).status, CheckStatus::not_applicable);
    rep.blew_up = true;
    const RunFacts above{"above", 1.44 * gs.mass_sq, 1.0, true};
    EXPECT_EQ(check_blowup_time_bound(rep, {}, above, gs).status, CheckStatus::not_applicable);
}

TEST(GlobalExistenceCheck, StatusRules) {
    const auto& gs = q1();
    const auto rows = decaying_rows(10);
    BlowupReport rep;
    rep.initial_grad_sq = 1.0;
    rep.peak_grad_sq = 2.0;

    const RunFacts good{"g", 0.81 * gs.mass_sq, 1.0, true};
    EXPECT_EQ(check_global_existence(rep, rows, good, gs).status, CheckStatus::pass);

    const RunFacts sign_changing{"s", 0.81 * gs.mass_sq, 1.0, false};
    EXPECT_EQ(check_global_existence(rep, rows, sign_changing, gs).status, CheckStatus::not_applicable);

    const RunFacts heavy{"h", 1.21 * gs.mass_sq, 1.0, true};
    EXPECT_EQ(check_global_existence(rep, rows, heavy, gs).status, CheckStatus::not_applicable);

    auto tail = rep;
    tail.stop_reason = StopReason::tail_unresolved;
    const auto c_tail = check_global_existence(tail, rows, good, gs);
    EXPECT_EQ(c_tail.status, CheckStatus::inconclusive);
    EXPECT_NE(c_tail.notes.find("tail_unresolved"), std::string::npos);

    auto grown = rep;
    grown.peak_grad_sq = 500.0;
    EXPECT_EQ(check_global_existence(grown, rows, good, gs).status, CheckStatus::fail);

    auto flat = rows;
    flat[5].mass_sq = flat[4].mass_sq;
    EXPECT_EQ(check_global_existence(rep, flat, good, gs).status, CheckStatus::fail);
}

TEST(ConcentrationCheck, NoBlowupOrTooFewRows) {
    const auto& gs = q1();
    BlowupReport rep;
    const RunFacts facts{"c", 1.44 * gs.mass_sq, 0.0, false};
    EXPECT_EQ(check_concentration(rep, decaying_rows(10), facts, gs).status, CheckStatus::not_applicable);
    rep.blew_up = true;
    const auto c = check_concentration(rep, decaying_rows(3), facts, gs);
    EXPECT_EQ(c.status, CheckStatus::not_applicable);
    EXPECT_NE(c.notes.find("only 3 rows"), std::string::npos);
}

TEST(ConcentrationCheck, CollapseConcentratesCriticalMass) {
    GroundStateCache cache;
    const auto r = run_scenario(collapse_config(), cache);
    ASSERT_TRUE(r.blowup.blew_up);
    ASSERT_EQ(r.checks.size(), 3u);
    const auto& c = r.checks[2];
    EXPECT_EQ(c.claim, Claim::concentration);
    EXPECT_EQ(c.status, CheckStatus::pass) << c.notes;
    EXPECT_GE(c.observed, 0.9);
    // no damping: the time-bound hypotheses fail
    EXPECT_EQ(r.checks[1].status, CheckStatus::not_applicable);
}

TEST(ConcentrationCheck, FixedTinyWindowTripsTheGuard) {
    auto cfg = collapse_config();
    cfg.window_kind = WindowRule::Kind::fixed;
    cfg.window_radius = 0.05;
    GroundStateCache cache;
    const auto r = run_scenario(cfg, cache);
    ASSERT_TRUE(r.blowup.blew_up);
    const auto& c = r.checks[2];
    EXPECT_EQ(c.status, CheckStatus::not_applicable);
    EXPECT_NE(c.notes.find("window rule guard"), std::string::npos) << c.notes;
}

TEST(NegativeBump, GlobalExistenceNotApplicable) {
    for (auto cfg : bundled_catalog()) {
        if (cfg.id != "negative_bump_l090") continue;
        cfg.sim.t_end = 0.5;
        GroundStateCache cache;
        const auto r = run_scenario(cfg, cache);
        EXPECT_FALSE(r.facts.a_pointwise_positive);
        EXPECT_EQ(r.checks[0].status, CheckStatus::not_applicable);
        return;
    }
    FAIL() << "negative_bump_l090 missing";
}

// ---------------------------------------------------------------------------
// io

TEST(Io, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
    EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(io::format_double(std::nan("")), "nan");
}

TEST(Io, RowsHeaderAndLine) {
    EXPECT_EQ(io::rows_csv_header(2),
              "t,mass_sq,energy,p_1,p_2,grad_sq,lp_power,h_value,int_a_u2,int_a_grad2,int_a_lp,re_grad_a_term,"
              "dt_used,tail_fraction,conc_mass,window_w");
    DiagnosticsRow r;
    r.time = 0.5;
    r.momentum = {1.0, 2.0};
    const auto line = io::row_csv(r);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
    EXPECT_EQ(line.substr(0, 4), "0.5,");
}

TEST(Io, CheckJsonEscapesNotesAndNullBound) {
    TheoremCheckReport c;
    c.scenario_id = "x";
    c.notes = "say \"hi\"\nback\\slash";
    const auto text = check_json(c).dump();
    const auto doc = nlohmann::json::parse(text);
    EXPECT_EQ(doc["notes"], c.notes);
    EXPECT_TRUE(doc["bound_value"].is_null());
    EXPECT_EQ(doc["status"], "not_applicable");
    c.bound_value = 1.5;
    EXPECT_EQ(nlohmann::json::parse(check_json(c).dump())["bound_value"], 1.5);
}

TEST(Io, GroundStateJsonFields) {
    const auto doc = io::ground_state_json(q1());
    EXPECT_EQ(doc["dim"], 1);
    EXPECT_DOUBLE_EQ(doc["mass_sq"].get<double>(), q1().mass_sq);
    EXPECT_LT(doc["residual"].get<double>(), 1e-10);
}
