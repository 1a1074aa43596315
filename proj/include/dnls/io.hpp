#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "diagnostics.hpp"
#include "ground_state.hpp"

namespace dnls::io {

/// Decimal text with 17 significant digits (round-trips every double).
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON documents keep keys in insertion order; non-finite numbers are written as null.
using Json = nlohmann::ordered_json;

/// t, mass_sq, energy, p_1..p_d, grad_sq, lp_power, h_value, int_a_u2,
/// int_a_grad2, int_a_lp, re_grad_a_term, dt_used, tail_fraction, conc_mass, window_w
inline std::string rows_csv_header(int dim) {
    std::string h = "t,mass_sq,energy";
    for (int j = 1; j <= dim; ++j) h += ",p_" + std::to_string(j);
    h += ",grad_sq,lp_power,h_value,int_a_u2,int_a_grad2,int_a_lp,re_grad_a_term,dt_used,tail_fraction,conc_mass,window_w";
    return h;
}

inline std::string row_csv(const DiagnosticsRow& r) {
    std::string s = format_double(r.time) + ',' + format_double(r.mass_sq) + ',' + format_double(r.energy);
    for (double p : r.momentum) s += ',' + format_double(p);
    for (double v : {r.grad_sq, r.lp_power, r.h_value, r.int_a_u2, r.int_a_grad2, r.int_a_lp, r.re_grad_a_term,
                     r.dt_used, r.tail_fraction, r.conc_mass, r.window_w}) {
        s += ',' + format_double(v);
    }
    return s;
}

inline void write_rows_csv(std::ostream& os, std::span<const DiagnosticsRow> rows, int dim) {
    os << rows_csv_header(dim) << '\n';
    for (const auto& r : rows) os << row_csv(r) << '\n';
}

/// Ground-state profile as CSV: x_1..x_d, Q.
inline void write_profile_csv(std::ostream& os, const GroundState& gs) {
    const auto& grid = gs.profile.grid;
    for (int a = 1; a <= grid.dim(); ++a) os << "x_" << a << ',';
    os << "Q\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.position(i);
        for (int a = 0; a < grid.dim(); ++a) os << format_double(x[static_cast<std::size_t>(a)]) << ',';
        os << format_double(gs.profile.values[i]) << '\n';
    }
}

inline Json ground_state_json(const GroundState& gs) {
    return Json{{"dim", gs.dim()},
                {"mass_sq", gs.mass_sq},
                {"grad_sq", gs.grad_sq},
                {"lp_power", gs.lp_power},
                {"residual", gs.residual}};
}

inline Json blowup_json(const BlowupReport& r) {
    return Json{{"blew_up", r.blew_up},
                {"t_detect", r.t_detect},
                {"peak_grad_sq", r.peak_grad_sq},
                {"initial_grad_sq", r.initial_grad_sq},
                {"grad_sq_at_detect", r.grad_sq_at_detect},
                {"scale_at_detect", r.scale_at_detect},
                {"stop_reason", to_string(r.stop_reason)},
                {"terminal_mass_sq", r.terminal_mass_sq},
                {"steps", r.steps},
                {"rows", r.rows_emitted}};
}

inline Json balance_json(const BalanceReport& b) {
    return Json{{"mass_residual", b.mass_residual},
                {"energy_residual", b.energy_residual},
                {"momentum_residual", b.momentum_residual},
                {"mass_drift", b.mass_drift},
                {"energy_drift", b.energy_drift},
                {"momentum_drift", b.momentum_drift},
                {"envelope_ok", b.envelope_ok},
                {"max_envelope_violation", b.max_envelope_violation},
                {"mass_residual_as_printed", b.mass_residual_as_printed},
                {"energy_residual_as_printed", b.energy_residual_as_printed}};
}

}  // namespace dnls::io
