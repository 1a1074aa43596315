#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "damping.hpp"
#include "field.hpp"

namespace dnls {

/// Time-stepping controls. The step rule is dt = max(dt_min, min(dt0, adapt_const / |grad u|^2)).
struct SimConfig {
    double dt0 = 1e-3;
    double t_end = 1.0;
    double adapt_const = 1e-3;
    double dt_min = 1e-9;
    double tail_threshold = 1e-4;
    int record_every = 1;
    /// Stop as blow-up once dt_min is engaged and |grad u|^2 / |grad u0|^2 exceeds this.
    double gradient_threshold = 1e6;
    /// A resolution guard that trips after |grad u|^2 grew by this factor counts as a collapse.
    double collapse_ratio = 10.0;
    /// Stop when the step rule asks for a step this many times smaller than dt_min.
    double floor_overshoot = 100.0;

    void validate() const {
        if (!(dt_min > 0.0) || !(dt0 > dt_min)) throw ConfigError("need dt0 > dt_min > 0");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
        if (!(adapt_const > 0.0)) throw ConfigError("adapt_const must be positive");
        if (!(tail_threshold > 0.0 && tail_threshold < 1.0)) throw ConfigError("tail_threshold must lie in (0, 1)");
        if (record_every < 1) throw ConfigError("record_every must be >= 1");
        if (!(gradient_threshold > 1.0)) throw ConfigError("gradient_threshold must exceed 1");
        if (!(collapse_ratio > 1.0)) throw ConfigError("collapse_ratio must exceed 1");
        if (!(floor_overshoot >= 1.0)) throw ConfigError("floor_overshoot must be >= 1");
    }
};

struct EvolutionState {
    double time = 0.0;
    ComplexField field;
    std::size_t step_count = 0;
};

enum class StopReason { horizon_reached, gradient_threshold, dt_floor, tail_unresolved, nonfinite };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::horizon_reached: return "horizon_reached";
        case StopReason::gradient_threshold: return "gradient_threshold";
        case StopReason::dt_floor: return "dt_floor";
        case StopReason::tail_unresolved: return "tail_unresolved";
        case StopReason::nonfinite: return "nonfinite";
    }
    return "?";
}

/// Outcome of evolve(). Times and norms refer to the last resolved state.
struct BlowupReport {
    bool blew_up = false;
    double t_detect = 0.0;
    double peak_grad_sq = 0.0;
    double initial_grad_sq = 0.0;
    double grad_sq_at_detect = 0.0;
    double scale_at_detect = 1.0;  // |grad Q| / |grad u(t_detect)|
    StopReason stop_reason = StopReason::horizon_reached;
    double terminal_mass_sq = 0.0;
    std::size_t steps = 0;
    std::size_t rows_emitted = 0;
};

/// Immutable view of a resolved state handed to the diagnostics sink.
struct Snapshot {
    double time;
    std::size_t step;
    double dt_used;
    double tail_fraction;
    const ComplexField& field;
};

using DiagnosticsSink = std::function<void(const Snapshot&)>;

/// Free Schrodinger flow u_t = i Delta u over dt (any sign).
inline ComplexField linear_substep(const ComplexField& field, double dt) {
    return spectral_multiply(field, [dt](const Point& k) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        return std::polar(1.0, -k2 * dt);
    });
}

namespace detail {

// Phase gained by u_t = i|u|^p u - a u over dt, per unit r0^p:
// (1 - e^{-p a dt}) / (p a), and its Taylor series for small |a dt|.
inline double phase_closed_form(double a, double dt, double p) { return -std::expm1(-p * a * dt) / (p * a); }

inline double phase_series(double a, double dt, double p) {
    const double x = p * a * dt;
    return dt * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
}

inline double nonlinear_phase_per_amplitude(double a, double dt, double p) {
    return std::abs(a * dt) < 1e-6 ? phase_series(a, dt, p) : phase_closed_form(a, dt, p);
}

inline void nonlinear_damping_inplace(std::vector<complex>& u, const std::vector<double>& a, int dim, double dt) {
    const double p = critical_power(dim);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r0p = nonlinear_factor(std::norm(u[i]), dim);
        const double phase = r0p * nonlinear_phase_per_amplitude(a[i], dt, p);
        u[i] *= std::polar(std::exp(-a[i] * dt), phase);
    }
}

}  // namespace detail

/// Exact pointwise flow of u_t = i|u|^{4/d} u - a(x) u over dt:
/// the modulus decays as e^{-a dt}, the phase advances by
/// r0^{4/d} (1 - e^{-(4/d) a dt}) d/(4a)  (r0^{4/d} dt as a -> 0).
inline ComplexField nonlinear_damping_substep(const ComplexField& field, const DampingProfile& a, double dt) {
    if (!(field.grid == a.grid())) throw ConfigError("field and damping live on different grids");
    ComplexField out = field;
    detail::nonlinear_damping_inplace(out.values, a.values(), field.grid.dim(), dt);
    return out;
}

/// Strang splitting: half linear, full nonlinear+damping, half linear. Any sign of dt.
inline ComplexField strang_flow(const ComplexField& field, const DampingProfile& a, double dt) {
    return linear_substep(nonlinear_damping_substep(linear_substep(field, 0.5 * dt), a, dt), 0.5 * dt);
}

inline EvolutionState strang_step(const EvolutionState& state, const DampingProfile& a, double dt) {
    if (!(dt > 0.0)) throw ConfigError("strang_step needs dt > 0");
    EvolutionState next{state.time + dt, strang_flow(state.field, a, dt), state.step_count + 1};
    if (!next.field.is_finite()) throw NonFiniteError("non-finite field after step at t = " + std::to_string(next.time));
    return next;
}

/// max(dt_min, min(dt0, adapt_const / grad_sq)).
inline double choose_dt(double grad_sq, const SimConfig& cfg) {
    const double wanted = grad_sq > 0.0 ? cfg.adapt_const / grad_sq : cfg.dt0;
    return std::max(cfg.dt_min, std::min(cfg.dt0, wanted));
}

inline double choose_dt(const EvolutionState& state, const SimConfig& cfg) {
    return choose_dt(grad_sq(state.field), cfg);
}

/// Share of spectral power in the outer third of resolved wavenumbers
/// (modes with some |k_j| > 2/3 k_max).
inline double tail_fraction_from_spectrum(const Grid& grid, std::span<const complex> hat) {
    const double cut = 2.0 / 3.0 * grid.max_wavenumber();
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) {
        const double p = std::norm(hat[i]);
        total += p;
        const auto k = grid.wavevector(i);
        if (std::abs(k[0]) > cut || std::abs(k[1]) > cut || std::abs(k[2]) > cut) tail += p;
    }
    return total > 0.0 ? tail / total : 0.0;
}

inline double tail_fraction(const ComplexField& field) {
    return tail_fraction_from_spectrum(field.grid, forward_transform(field));
}

/// Integrates iu_t + Delta u + |u|^{4/d} u + i a(x) u = 0 from u0 with adaptive
/// Strang steps until t_end or a stop condition. Checked before every step, in
/// order: non-finite values, spectral tail above tail_threshold, dt_min engaged
/// with gradient growth above gradient_threshold, dt_min overshot by
/// floor_overshoot, horizon. Every record_every-th resolved state, and the last
/// resolved one, goes to `sink`.
///
/// `q_grad_sq` is |grad Q|^2 of the ground state, used for the reported scale.
inline BlowupReport evolve(const ComplexField& u0, const DampingProfile& a, const SimConfig& cfg,
                           double q_grad_sq, const DiagnosticsSink& sink) {
    cfg.validate();
    if (!(u0.grid == a.grid())) throw ConfigError("initial data and damping live on different grids");

    const Grid& grid = u0.grid;
    const int dim = grid.dim();
    auto& fft = transform_for(grid);
    const auto k2 = grid.laplacian_symbol();

    std::vector<complex> u = u0.values;
    std::vector<complex> hat(grid.size());
    std::vector<complex> half_propagator(grid.size());
    double propagator_dt = std::numeric_limits<double>::quiet_NaN();

    BlowupReport report;
    double time = 0.0;
    std::size_t step = 0;
    double last_dt = 0.0;

    struct Resolved {
        double time = 0.0;
        std::size_t step = 0;
        double dt_used = 0.0;
        double tail = 0.0;
        double grad_sq = 0.0;
        std::optional<ComplexField> field;
        bool emitted = false;
    } resolved;

    auto emit = [&](Resolved& r) {
        if (r.emitted || !r.field) return;
        if (sink) sink(Snapshot{r.time, r.step, r.dt_used, r.tail, *r.field});
        r.emitted = true;
        ++report.rows_emitted;
    };

    auto finish = [&](StopReason reason) {
        emit(resolved);
        report.stop_reason = reason;
        report.t_detect = resolved.time;
        report.steps = resolved.step;
        report.grad_sq_at_detect = resolved.grad_sq;
        report.terminal_mass_sq = resolved.field ? mass_sq(*resolved.field) : 0.0;
        report.scale_at_detect = resolved.grad_sq > 0.0 ? std::sqrt(q_grad_sq / resolved.grad_sq)
                                                        : std::numeric_limits<double>::infinity();
        const double growth = report.initial_grad_sq > 0.0 ? resolved.grad_sq / report.initial_grad_sq : 0.0;
        switch (reason) {
            case StopReason::horizon_reached: report.blew_up = false; break;
            case StopReason::gradient_threshold: report.blew_up = true; break;
            default: report.blew_up = growth >= cfg.collapse_ratio; break;
        }
        return report;
    };

    for (;;) {
        const bool finite = std::all_of(u.begin(), u.end(), [](complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
        if (!finite) return finish(StopReason::nonfinite);

        fft.forward(u, hat);
        const double g2 = grad_sq_from_spectrum(grid, hat);
        const double tail = tail_fraction_from_spectrum(grid, hat);
        if (step == 0) report.initial_grad_sq = g2;
        if (tail > cfg.tail_threshold) return finish(StopReason::tail_unresolved);

        const double dt = choose_dt(g2, cfg);
        const bool floor_engaged = g2 > 0.0 && cfg.adapt_const / g2 <= cfg.dt_min;
        const double growth = report.initial_grad_sq > 0.0 ? g2 / report.initial_grad_sq : 0.0;
        if (floor_engaged && growth > cfg.gradient_threshold) {
            // This state is resolved; it is the detection point.
            resolved = {time, step, last_dt, tail, g2, ComplexField(grid, u), false};
            report.peak_grad_sq = std::max(report.peak_grad_sq, g2);
            return finish(StopReason::gradient_threshold);
        }
        if (floor_engaged && cfg.adapt_const / g2 * cfg.floor_overshoot < cfg.dt_min) {
            return finish(StopReason::dt_floor);
        }

        // Current state passed every guard.
        resolved = {time, step, last_dt, tail, g2, ComplexField(grid, u), false};
        report.peak_grad_sq = std::max(report.peak_grad_sq, g2);
        if (step % static_cast<std::size_t>(cfg.record_every) == 0) emit(resolved);
        if (time >= cfg.t_end) return finish(StopReason::horizon_reached);

        double h = dt;
        const double remaining = cfg.t_end - time;
        const bool last = remaining <= dt * (1.0 + 1e-8);
        if (last) h = remaining;

        if (h != propagator_dt) {
            for (std::size_t i = 0; i < grid.size(); ++i) half_propagator[i] = std::polar(1.0, -k2[i] * 0.5 * h);
            propagator_dt = h;
        }
        for (std::size_t i = 0; i < grid.size(); ++i) hat[i] *= half_propagator[i];
        fft.inverse(hat, u);
        detail::nonlinear_damping_inplace(u, a.values(), dim, h);
        fft.forward(u, hat);
        for (std::size_t i = 0; i < grid.size(); ++i) hat[i] *= half_propagator[i];
        fft.inverse(hat, u);

        time = last ? cfg.t_end : time + h;
        last_dt = h;
        ++step;
    }
}

}  // namespace dnls
