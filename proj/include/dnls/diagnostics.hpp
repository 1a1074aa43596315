#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "damping.hpp"
#include "evolution.hpp"
#include "field.hpp"
#include "ground_state.hpp"

namespace dnls {

/// Radius w(t) of the concentration window.
///
/// The scaling rule w = w0 (|grad Q| / |grad u|)^exponent with exponent < 1
/// keeps w |grad u| -> infinity as |grad u| -> infinity. Radii are capped at
/// half the box half-width.
struct WindowRule {
    enum class Kind { scaling, fixed };

    Kind kind = Kind::scaling;
    double w0 = 1.0;
    double exponent = 0.5;
    double fixed_radius = 1.0;
    double q_grad_norm = 1.0;  // |grad Q|_2

    static WindowRule scaling(double q_grad_norm, double w0 = 1.0, double exponent = 0.5) {
        return {Kind::scaling, w0, exponent, 1.0, q_grad_norm};
    }
    static WindowRule fixed(double radius, double q_grad_norm) {
        return {Kind::fixed, 1.0, 0.0, radius, q_grad_norm};
    }

    double radius(double grad_sq, const Grid& grid) const {
        const double cap = 0.5 * grid.half_width();
        if (kind == Kind::fixed) return std::min(fixed_radius, cap);
        if (!(grad_sq > 0.0)) return cap;
        return std::min(cap, w0 * std::pow(q_grad_norm / std::sqrt(grad_sq), exponent));
    }
};

struct DiagnosticsRow {
    double time = 0.0;
    double mass_sq = 0.0;
    double energy = 0.0;
    std::vector<double> momentum;  // P_j = Im int (d_j u) conj(u)
    double grad_sq = 0.0;
    double lp_power = 0.0;
    double h_value = 0.0;
    double int_a_u2 = 0.0;        // int a |u|^2
    double int_a_grad2 = 0.0;     // int a |grad u|^2
    double int_a_lp = 0.0;        // int a |u|^{4/d+2}
    double re_grad_a_term = 0.0;  // Re int (grad u . grad a) conj(u)
    std::vector<double> int_a_momentum;  // int a Im((d_j u) conj(u))
    double dt_used = 0.0;
    double tail_fraction = 0.0;
    double conc_mass = 0.0;
    double window_w = 0.0;
    std::size_t conc_center = 0;  // flat index of the window center
};

struct ConcentrationResult {
    double value = 0.0;
    std::size_t center = 0;   // flat grid index
    double shell_mass = 0.0;  // mass within half a cell of the window boundary
};

/// Largest mass in a ball of radius w centered on a grid point:
/// circular convolution of |u|^2 with the sampled ball indicator, then a max
/// scan (ties go to the smallest flat index).
inline ConcentrationResult concentration_mass(const ComplexField& field, double w) {
    const auto& grid = field.grid;
    if (!(w > 0.0) || !(w < grid.half_width())) {
        throw ConfigError("concentration window must satisfy 0 < w < half_width");
    }
    const std::size_t n = grid.points_per_axis();
    const double h = grid.spacing();
    auto periodic_dist_sq = [&](std::size_t flat) {
        const auto idx = grid.unflatten(flat);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const std::size_t j = idx[static_cast<std::size_t>(a)];
            const double d = static_cast<double>(std::min(j, n - j)) * h;
            r2 += d * d;
        }
        return r2;
    };

    ComplexField density(grid);
    ComplexField ball(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        density.values[i] = std::norm(field.values[i]);
        ball.values[i] = periodic_dist_sq(i) <= w * w ? 1.0 : 0.0;
    }
    auto rho_hat = forward_transform(density);
    const auto ball_hat = forward_transform(ball);
    for (std::size_t i = 0; i < rho_hat.size(); ++i) rho_hat[i] *= ball_hat[i];
    const auto conv = inverse_transform(grid, rho_hat);

    ConcentrationResult out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (conv.values[i].real() > best) {
            best = conv.values[i].real();
            out.center = i;
        }
    }
    out.value = std::max(0.0, best * grid.cell_volume());

    const auto c = grid.unflatten(out.center);
    double shell = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const auto ax = static_cast<std::size_t>(a);
            const std::size_t j = (idx[ax] + n - c[ax]) % n;
            const double d = static_cast<double>(std::min(j, n - j)) * h;
            r2 += d * d;
        }
        const double r = std::sqrt(r2);
        if (r > w - 0.5 * h && r <= w + 0.5 * h) shell += density.values[i].real();
    }
    out.shell_mass = shell * grid.cell_volume();
    return out;
}

/// Weinstein functional J(u) = |u|_{4/d+2}^{4/d+2} / (|grad u|^2 |u|_2^{4/d}).
inline double gn_ratio(const ComplexField& field) {
    const auto n = norms(field);
    if (!(n.mass_sq > 0.0) || !(n.grad_sq > 0.0)) throw ConfigError("gn_ratio needs a non-constant, nonzero field");
    return n.lp_power / (n.grad_sq * std::pow(n.mass_sq, 2.0 / static_cast<double>(field.grid.dim())));
}

/// Every per-row quantity: norms, E, P, H and the damping-weighted integrals
/// the balance laws need, plus the windowed mass for w from `rule`.
inline DiagnosticsRow compute_row(double time, const ComplexField& field, const DampingProfile& a,
                                  const WindowRule& rule, double dt_used = 0.0, double tail = 0.0) {
    const auto& grid = field.grid;
    if (!(grid == a.grid())) throw ConfigError("field and damping live on different grids");
    const int dim = grid.dim();
    const double dv = grid.cell_volume();
    const auto grad = gradient(field);
    const auto& av = a.values();

    DiagnosticsRow row;
    row.time = time;
    row.dt_used = dt_used;
    row.tail_fraction = tail;
    row.momentum.assign(static_cast<std::size_t>(dim), 0.0);
    row.int_a_momentum.assign(static_cast<std::size_t>(dim), 0.0);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const complex u = field.values[i];
        const double m2 = std::norm(u);
        const double lp = lp_density(m2, dim);
        double g2 = 0.0;
        complex grad_a_dot_grad_u{0.0, 0.0};
        for (int ax = 0; ax < dim; ++ax) {
            const auto axs = static_cast<std::size_t>(ax);
            const complex du = grad[axs].values[i];
            g2 += std::norm(du);
            const double im = (du * std::conj(u)).imag();
            row.momentum[axs] += im;
            row.int_a_momentum[axs] += av[i] * im;
            grad_a_dot_grad_u += du * a.gradient()[axs].values[i];
        }
        row.mass_sq += m2;
        row.lp_power += lp;
        row.int_a_u2 += av[i] * m2;
        row.int_a_grad2 += av[i] * g2;
        row.int_a_lp += av[i] * lp;
        row.re_grad_a_term += (grad_a_dot_grad_u * std::conj(u)).real();
    }
    row.mass_sq *= dv;
    row.lp_power *= dv;
    row.int_a_u2 *= dv;
    row.int_a_grad2 *= dv;
    row.int_a_lp *= dv;
    row.re_grad_a_term *= dv;
    for (auto& p : row.momentum) p *= dv;
    for (auto& p : row.int_a_momentum) p *= dv;
    row.grad_sq = grad_sq(field);
    row.energy = energy_from({row.mass_sq, row.grad_sq, row.lp_power}, dim);
    row.h_value = -row.int_a_grad2 + row.int_a_lp - row.re_grad_a_term;

    row.window_w = rule.radius(row.grad_sq, grid);
    const auto conc = concentration_mass(field, row.window_w);
    row.conc_mass = conc.value;
    row.conc_center = conc.center;
    return row;
}

/// Diagnostics sink that stores one row per snapshot.
class RowRecorder {
public:
    RowRecorder(const DampingProfile& a, WindowRule rule) : damping_(&a), rule_(rule) {}

    void operator()(const Snapshot& s) {
        rows_.push_back(compute_row(s.time, s.field, *damping_, rule_, s.dt_used, s.tail_fraction));
    }

    DiagnosticsSink sink() {
        return [this](const Snapshot& s) { (*this)(s); };
    }

    const std::vector<DiagnosticsRow>& rows() const noexcept { return rows_; }
    std::vector<DiagnosticsRow> take_rows() { return std::move(rows_); }

private:
    const DampingProfile* damping_;
    WindowRule rule_;
    std::vector<DiagnosticsRow> rows_;
};

/// Which form of the mass and energy laws a residual tests.
///   corrected:  d/dt |u|^2 = -2 int a|u|^2,  dE/dt = +H
///   as_printed: d/dt |u|^2 = -int a|u|^2,    E(t) = E(0) - int_0^t H
enum class BalanceForm { corrected, as_printed };

namespace detail {

inline void require_rows(std::span<const DiagnosticsRow> rows) {
    if (rows.size() < 2) throw ConfigError("balance residuals need at least two diagnostics rows");
}

inline double trapezoid(double t1, double t2, double f1, double f2) { return 0.5 * (t2 - t1) * (f1 + f2); }

inline double positive_or_one(double v) { return v > 0.0 ? v : 1.0; }

}  // namespace detail

namespace detail {

// Signed defect of each row interval; the residual is the largest |defect|,
// the drift the largest |running sum|.
template <typename Defect>
double worst_defect(std::span<const DiagnosticsRow> rows, Defect&& defect, bool cumulative) {
    double worst = 0.0;
    double running = 0.0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double d = defect(rows[k], rows[k + 1]);
        running += d;
        worst = std::max(worst, std::abs(cumulative ? running : d));
    }
    return worst;
}

inline double mass_law(std::span<const DiagnosticsRow> rows, BalanceForm form, bool cumulative) {
    require_rows(rows);
    const double c = form == BalanceForm::corrected ? 2.0 : 1.0;
    const double norm = positive_or_one(rows.front().mass_sq);
    return worst_defect(rows, [&](const DiagnosticsRow& r1, const DiagnosticsRow& r2) {
        return (r2.mass_sq - r1.mass_sq + c * trapezoid(r1.time, r2.time, r1.int_a_u2, r2.int_a_u2)) / norm;
    }, cumulative);
}

inline double energy_law(std::span<const DiagnosticsRow> rows, BalanceForm form, bool cumulative) {
    require_rows(rows);
    const double sign = form == BalanceForm::corrected ? 1.0 : -1.0;
    const double norm = std::max(1.0, std::abs(rows.front().energy));
    return worst_defect(rows, [&](const DiagnosticsRow& r1, const DiagnosticsRow& r2) {
        return (r2.energy - r1.energy - sign * trapezoid(r1.time, r2.time, r1.h_value, r2.h_value)) / norm;
    }, cumulative);
}

inline double momentum_law(std::span<const DiagnosticsRow> rows, bool cumulative) {
    require_rows(rows);
    const double norm = positive_or_one(rows.front().mass_sq * std::sqrt(rows.front().grad_sq));
    double worst = 0.0;
    for (std::size_t j = 0; j < rows.front().momentum.size(); ++j) {
        worst = std::max(worst, worst_defect(rows, [&](const DiagnosticsRow& r1, const DiagnosticsRow& r2) {
            return (r2.momentum[j] - r1.momentum[j] +
                    2.0 * trapezoid(r1.time, r2.time, r1.int_a_momentum[j], r2.int_a_momentum[j])) / norm;
        }, cumulative));
    }
    return worst;
}

}  // namespace detail

/// max_k |m(t_{k+1}) - m(t_k) + c int a|u|^2| / m(0), time integral by trapezoid,
/// c = 2 (corrected) or 1 (as printed).
inline double mass_balance_residual(std::span<const DiagnosticsRow> rows,
                                    BalanceForm form = BalanceForm::corrected) {
    return detail::mass_law(rows, form, false);
}

/// max_k |E(t_{k+1}) - E(t_k) -/+ int H| / max(1, |E(0)|).
inline double energy_balance_residual(std::span<const DiagnosticsRow> rows,
                                      BalanceForm form = BalanceForm::corrected) {
    return detail::energy_law(rows, form, false);
}

/// max over pairs and components of |P_j(t2) - P_j(t1) + 2 int int a Im(d_j u conj u)|,
/// normalized by m(0) |grad u0|.
inline double momentum_balance_residual(std::span<const DiagnosticsRow> rows) {
    return detail::momentum_law(rows, false);
}

/// Same laws integrated from the first row: max_k |m(t_k) - m(t_0) + 2 int_{t_0}^{t_k} a|u|^2|
/// and likewise for E and P. Interval residuals are local defects; these are the
/// accumulated error over the run.
inline double mass_balance_drift(std::span<const DiagnosticsRow> rows) {
    return detail::mass_law(rows, BalanceForm::corrected, true);
}

inline double energy_balance_drift(std::span<const DiagnosticsRow> rows) {
    return detail::energy_law(rows, BalanceForm::corrected, true);
}

inline double momentum_balance_drift(std::span<const DiagnosticsRow> rows) {
    return detail::momentum_law(rows, true);
}

struct EnvelopeResult {
    bool ok = true;
    double worst = 0.0;  // smallest margin to either bound; negative means violated
};

/// |u0| e^{-|a|_inf t} - eps <= |u(t)| <= |u0| e^{|a|_inf t} + eps, eps = 1e-8 |u0|.
inline EnvelopeResult mass_envelope_check(std::span<const DiagnosticsRow> rows, double a_sup) {
    if (rows.empty()) throw ConfigError("envelope check needs at least one row");
    const double t0 = rows.front().time;
    const double n0 = std::sqrt(rows.front().mass_sq);
    const double eps = 1e-8 * n0;
    EnvelopeResult out;
    out.worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        const double n = std::sqrt(r.mass_sq);
        const double lower = n0 * std::exp(-a_sup * (r.time - t0)) - eps;
        const double upper = n0 * std::exp(a_sup * (r.time - t0)) + eps;
        out.worst = std::min({out.worst, n - lower, upper - n});
    }
    out.ok = out.worst >= 0.0;
    return out;
}

/// Strict mass decrease between successive rows.
inline bool mass_strictly_decreasing(std::span<const DiagnosticsRow> rows) {
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        if (!(rows[k + 1].mass_sq < rows[k].mass_sq)) return false;
    }
    return true;
}

/// Largest amount by which a row-to-row mass drop falls short of the
/// trapezoid of 2 int a|u|^2 (zero if every drop is at least that large).
inline double dissipation_shortfall(std::span<const DiagnosticsRow> rows) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const auto& r1 = rows[k];
        const auto& r2 = rows[k + 1];
        const double expected = 2.0 * detail::trapezoid(r1.time, r2.time, r1.int_a_u2, r2.int_a_u2);
        worst = std::max(worst, expected - (r1.mass_sq - r2.mass_sq));
    }
    return worst;
}

struct BalanceReport {
    double mass_residual = 0.0;
    double energy_residual = 0.0;
    double momentum_residual = 0.0;
    double mass_drift = 0.0;
    double energy_drift = 0.0;
    double momentum_drift = 0.0;
    bool envelope_ok = true;
    double max_envelope_violation = 0.0;  // max(0, -worst margin)
    double mass_residual_as_printed = 0.0;
    double energy_residual_as_printed = 0.0;
};

inline BalanceReport balance_report(std::span<const DiagnosticsRow> rows, const DampingProfile& a) {
    BalanceReport out;
    if (rows.size() >= 2) {
        out.mass_residual = mass_balance_residual(rows);
        out.energy_residual = energy_balance_residual(rows);
        out.momentum_residual = momentum_balance_residual(rows);
        out.mass_drift = mass_balance_drift(rows);
        out.energy_drift = energy_balance_drift(rows);
        out.momentum_drift = momentum_balance_drift(rows);
        out.mass_residual_as_printed = mass_balance_residual(rows, BalanceForm::as_printed);
        out.energy_residual_as_printed = energy_balance_residual(rows, BalanceForm::as_printed);
    }
    if (!rows.empty()) {
        const auto env = mass_envelope_check(rows, a.sup_norm());
        out.envelope_ok = env.ok;
        out.max_envelope_violation = std::max(0.0, -env.worst);
    }
    return out;
}

}  // namespace dnls
