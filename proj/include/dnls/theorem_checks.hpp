#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "evolution.hpp"
#include "ground_state.hpp"
#include "io.hpp"

namespace dnls {

namespace detail {

inline std::string short_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace detail

enum class Claim { global_existence, blowup_time_bound, concentration };
enum class CheckStatus { pass, fail, inconclusive, not_applicable };

inline std::string to_string(Claim c) {
    switch (c) {
        case Claim::global_existence: return "global_existence";
        case Claim::blowup_time_bound: return "blowup_time_bound";
        case Claim::concentration: return "concentration";
    }
    return "?";
}

inline std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
        case CheckStatus::not_applicable: return "not_applicable";
    }
    return "?";
}

struct TheoremCheckReport {
    std::string scenario_id;
    Claim claim = Claim::global_existence;
    CheckStatus status = CheckStatus::not_applicable;
    std::optional<double> bound_value;
    double observed = 0.0;
    double margin = 0.0;
    std::string notes;

    bool applicable() const noexcept { return status != CheckStatus::not_applicable; }
};

/// What a check needs to know about the run besides the rows.
struct RunFacts {
    std::string scenario_id;
    double u0_mass_sq = 0.0;
    double a_sup = 0.0;
    bool a_pointwise_positive = false;
};

/// Tolerances of the checks; printed with every report.
struct CheckSettings {
    double peak_growth_limit = 1e2;        // global existence: peak |grad u|^2 / initial
    double concentration_threshold = 0.9;  // observed windowed mass / |Q|^2
    std::size_t final_rows_min = 5;        // rows in the final decade of |grad u| growth
    double mass_consistency = 0.95;        // |u(t_detect)| >= this * |Q|
};

/// (1/|a|_inf) log(|Q|_2 / |u0|_2); present only when |u0| <= |Q| (up to a
/// relative 1e-10) and |a|_inf > 0. Zero on the boundary |u0| = |Q|.
inline std::optional<double> blowup_time_bound(double a_sup, double u0_norm, double q_norm) {
    if (!(a_sup > 0.0) || !(u0_norm > 0.0) || u0_norm > q_norm * (1.0 + 1e-10)) return std::nullopt;
    return std::max(0.0, std::log(q_norm / u0_norm)) / a_sup;
}

/// Positive damping and |u0| <= |Q|: the run must reach the horizon without
/// blow-up, with bounded gradient growth and strictly decreasing mass.
inline TheoremCheckReport check_global_existence(const BlowupReport& report, std::span<const DiagnosticsRow> rows,
                                                 const RunFacts& facts, const GroundState& gs,
                                                 const CheckSettings& settings = {}) {
    TheoremCheckReport out{facts.scenario_id, Claim::global_existence};
    if (!facts.a_pointwise_positive || facts.u0_mass_sq > gs.mass_sq * (1.0 + 1e-10)) {
        out.notes = "hypotheses not met (needs a > 0 everywhere and |u0| <= |Q|)";
        return out;
    }
    const double growth = report.initial_grad_sq > 0.0 ? report.peak_grad_sq / report.initial_grad_sq : 0.0;
    out.observed = growth;
    out.margin = settings.peak_growth_limit - growth;
    if (report.stop_reason != StopReason::horizon_reached) {
        out.status = CheckStatus::inconclusive;
        out.notes = "run stopped by " + to_string(report.stop_reason) + " before the horizon";
        return out;
    }
    const bool decreasing = mass_strictly_decreasing(rows);
    const bool bounded = growth < settings.peak_growth_limit;
    out.status = (!report.blew_up && bounded && decreasing) ? CheckStatus::pass : CheckStatus::fail;
    out.notes = "peak growth limit " + detail::short_number(settings.peak_growth_limit) +
                (decreasing ? "; mass strictly decreasing" : "; mass NOT strictly decreasing");
    return out;
}

/// Detected blow-up from |u0| <= |Q| with |a|_inf > 0: the detection time must
/// exceed (1/|a|_inf) log(|Q|/|u0|). Detection under-approximates the true
/// blow-up time, so a non-pass is inconclusive, never a failure.
inline TheoremCheckReport check_blowup_time_bound(const BlowupReport& report, std::span<const DiagnosticsRow>,
                                                  const RunFacts& facts, const GroundState& gs,
                                                  const CheckSettings& settings = {}) {
    TheoremCheckReport out{facts.scenario_id, Claim::blowup_time_bound};
    const double u0_norm = std::sqrt(facts.u0_mass_sq);
    const auto bound_value = blowup_time_bound(facts.a_sup, u0_norm, gs.mass());
    if (!report.blew_up || !bound_value) {
        out.notes = "hypotheses not met (needs detected blow-up, |u0| <= |Q| and |a|_inf > 0)";
        return out;
    }
    const double bound = *bound_value;
    out.bound_value = bound;
    out.observed = report.t_detect;
    out.margin = report.t_detect - bound;
    const double terminal_norm = std::sqrt(report.terminal_mass_sq);
    const bool mass_ok = terminal_norm >= settings.mass_consistency * gs.mass();
    const bool time_ok = report.t_detect > bound;
    out.notes = "|u(t_detect)|/|Q| = " + detail::short_number(terminal_norm / gs.mass()) + " (needs >= " +
                detail::short_number(settings.mass_consistency) + ")";
    if (time_ok && mass_ok) {
        out.status = CheckStatus::pass;
    } else {
        out.status = CheckStatus::inconclusive;
        if (!time_ok) out.notes += "; t_detect <= bound: detection precedes the bound (resolution limit)";
        if (!mass_ok) out.notes += "; mass consistency flagged: detection likely under-resolved";
    }
    return out;
}

/// Windowed mass near blow-up must reach the critical mass |Q|^2 (up to
/// concentration_threshold). Runs only if the window rule visibly satisfies
/// w |grad u| -> infinity over the final decade of gradient growth.
inline TheoremCheckReport check_concentration(const BlowupReport& report, std::span<const DiagnosticsRow> rows,
                                              const RunFacts& facts, const GroundState& gs,
                                              const CheckSettings& settings = {}) {
    TheoremCheckReport out{facts.scenario_id, Claim::concentration};
    if (!report.blew_up) {
        out.notes = "no blow-up detected";
        return out;
    }
    double peak = 0.0;
    for (const auto& r : rows) peak = std::max(peak, r.grad_sq);
    std::vector<const DiagnosticsRow*> final_rows;
    for (const auto& r : rows) {
        if (std::sqrt(r.grad_sq) >= std::sqrt(peak) / 10.0) final_rows.push_back(&r);
    }
    if (final_rows.size() < settings.final_rows_min) {
        out.notes = "only " + std::to_string(final_rows.size()) + " rows in the final decade of gradient growth";
        return out;
    }
    auto window_over_scale = [&](const DiagnosticsRow& r) {
        return r.window_w * std::sqrt(r.grad_sq) / gs.grad_norm();
    };
    const double first = window_over_scale(*final_rows.front());
    const double last = window_over_scale(*final_rows.back());
    if (!(last > first) || !(last >= 1.0)) {
        out.notes = "window rule guard: w |grad u| / |grad Q| goes " + detail::short_number(first) + " -> " +
                    detail::short_number(last) + "; needs growth and a final value >= 1";
        return out;
    }
    double best = 0.0;
    const DiagnosticsRow* best_row = final_rows.front();
    for (const auto* r : final_rows) {
        if (r->conc_mass > best) {
            best = r->conc_mass;
            best_row = r;
        }
    }
    out.observed = best / gs.mass_sq;
    out.margin = out.observed - settings.concentration_threshold;
    out.status = out.observed >= settings.concentration_threshold ? CheckStatus::pass : CheckStatus::fail;
    out.notes = "threshold " + detail::short_number(settings.concentration_threshold) + ", " +
                std::to_string(final_rows.size()) + " final-decade rows, best at t = " +
                detail::short_number(best_row->time) + " with w = " + detail::short_number(best_row->window_w) +
                "; last resolved row " + detail::short_number(final_rows.back()->conc_mass / gs.mass_sq) +
                " at t = " + detail::short_number(final_rows.back()->time);
    return out;
}

inline io::Json check_json(const TheoremCheckReport& c) {
    io::Json o{{"scenario", c.scenario_id}, {"claim", to_string(c.claim)}, {"status", to_string(c.status)}};
    o["bound_value"] = c.bound_value ? io::Json(*c.bound_value) : io::Json(nullptr);
    o["observed"] = c.observed;
    o["margin"] = c.margin;
    o["notes"] = c.notes;
    return o;
}

}  // namespace dnls
