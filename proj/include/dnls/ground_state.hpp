#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "field.hpp"

namespace dnls {

/// Positive, decaying, centered solution Q of  Delta Q - Q + |Q|^{4/d} Q = 0
/// on a grid, with its integral invariants.
struct GroundState {
    RealField profile;
    double mass_sq = 0.0;   // |Q|_2^2, the critical mass squared
    double grad_sq = 0.0;   // |grad Q|_2^2
    double lp_power = 0.0;  // |Q|_{4/d+2}^{4/d+2}
    double residual = 0.0;  // L2 norm of Delta Q - Q + |Q|^{4/d} Q

    int dim() const noexcept { return profile.grid.dim(); }
    double mass() const noexcept { return std::sqrt(mass_sq); }
    double grad_norm() const noexcept { return std::sqrt(grad_sq); }
};

/// L2 norm of Delta Q - Q + |Q|^{4/d} Q.
inline double ground_state_residual(const RealField& profile) {
    const auto& grid = profile.grid;
    const auto q = to_complex(profile);
    const auto k2 = grid.laplacian_symbol();
    auto hat = forward_transform(q);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= -(k2[i] + 1.0);
    const auto linear = inverse_transform(grid, hat);
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = profile.values[i];
        const double r = linear.values[i].real() + nonlinear_factor(v * v, grid.dim()) * v;
        s += r * r;
    }
    return std::sqrt(s * grid.cell_volume());
}

/// Builds a GroundState record (norms and residual) from any real profile.
inline GroundState evaluate_ground_state(RealField profile) {
    const auto n = norms(to_complex(profile));
    const double res = ground_state_residual(profile);
    return GroundState{std::move(profile), n.mass_sq, n.grad_sq, n.lp_power, res};
}

namespace detail {

// Cyclic shift so that `peak` lands on the grid center along every axis.
inline void recenter(std::vector<double>& values, const Grid& grid, std::size_t peak) {
    const auto from = grid.unflatten(peak);
    const std::size_t n = grid.points_per_axis();
    std::array<std::size_t, 3> shift{0, 0, 0};
    bool any = false;
    for (int a = 0; a < grid.dim(); ++a) {
        const auto ax = static_cast<std::size_t>(a);
        shift[ax] = (grid.center_index() + n - from[ax]) % n;
        any = any || shift[ax] != 0;
    }
    if (!any) return;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto idx = grid.unflatten(i);
        for (int a = 0; a < grid.dim(); ++a) {
            const auto ax = static_cast<std::size_t>(a);
            idx[ax] = (idx[ax] + shift[ax]) % n;
        }
        out[grid.flatten(idx)] = values[i];
    }
    values.swap(out);
}

}  // namespace detail

/// Petviashvili iteration
///
///     Q_{n+1} = S_n^gamma (1 - Delta)^{-1} (|Q_n|^{4/d} Q_n),
///     S_n = <(1 - Delta) Q_n, Q_n> / <|Q_n|^{4/d} Q_n, Q_n>,
///
/// with gamma = m/(m-1), m = 1 + 4/d, started from A exp(-|x|^2) (A = 2 by default). The iterate
/// is re-centered on its peak after every step. Stops when the PDE residual
/// drops below `tol`.
inline GroundState solve_ground_state(const Grid& grid, double tol, int max_iter,
                                      double initial_amplitude = 2.0) {
    if (!(tol > 0.0)) throw ConfigError("ground-state tolerance must be positive");
    if (max_iter < 1) throw ConfigError("ground-state max_iter must be positive");

    const int dim = grid.dim();
    const double m = 1.0 + critical_power(dim);
    const double gamma = m / (m - 1.0);
    const auto k2 = grid.laplacian_symbol();
    auto& fft = transform_for(grid);

    std::vector<double> q(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.position(i);
        q[i] = initial_amplitude * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    }

    std::vector<complex> q_hat(grid.size());
    std::vector<complex> n_hat(grid.size());
    std::vector<complex> buf(grid.size());
    double residual = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = q[i];
        fft.forward(buf, q_hat);
        for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = nonlinear_factor(q[i] * q[i], dim) * q[i];
        fft.forward(buf, n_hat);

        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            num += (1.0 + k2[i]) * std::norm(q_hat[i]);
            den += (n_hat[i] * std::conj(q_hat[i])).real();
        }
        const double stabilizer = num / den;
        if (!(den > 0.0) || !std::isfinite(stabilizer)) {
            throw ConvergenceError("ground-state iterate collapsed to zero; use a larger initial amplitude",
                                   residual);
        }
        const double factor = std::pow(stabilizer, gamma);
        for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = factor * n_hat[i] / (1.0 + k2[i]);
        fft.inverse(buf);

        double peak = 0.0;
        std::size_t peak_at = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            q[i] = buf[i].real();
            if (q[i] > peak) {
                peak = q[i];
                peak_at = i;
            }
        }
        if (!(peak > 1e-8)) {
            throw ConvergenceError("ground-state iterate collapsed to zero; use a larger initial amplitude",
                                   residual);
        }
        detail::recenter(q, grid, peak_at);

        RealField profile(grid, q);
        residual = ground_state_residual(profile);
        if (residual < tol) return evaluate_ground_state(std::move(profile));
    }
    throw ConvergenceError("ground-state iteration did not converge in " + std::to_string(max_iter) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
}

struct PohozaevResiduals {
    double energy_res = 0.0;    // |E(Q)| / |grad Q|^2
    double gradient_res = 0.0;  // |lp - (d+2)/d grad_sq| / |grad Q|^2
};

inline PohozaevResiduals pohozaev_residuals(const GroundState& gs) {
    const double d = static_cast<double>(gs.dim());
    const double scale = gs.grad_sq > 0.0 ? gs.grad_sq : 1.0;
    return {std::abs(0.5 * gs.grad_sq - d / (4.0 + 2.0 * d) * gs.lp_power) / scale,
            std::abs(gs.lp_power - (d + 2.0) / d * gs.grad_sq) / scale};
}

/// Closed-form 1-D ground state (3 sech^2(2x))^{1/4}.
inline double closed_form_q_1d(double x) {
    const double c = std::cosh(2.0 * x);
    if (!std::isfinite(c)) return 0.0;
    return std::pow(3.0, 0.25) / std::sqrt(c);
}

/// Sharp Gagliardo-Nirenberg constant ((d+2)/d) |Q|_2^{-4/d}.
inline double sharp_gn_constant(const GroundState& gs) {
    const double d = static_cast<double>(gs.dim());
    return (d + 2.0) / d * std::pow(gs.mass_sq, -2.0 / d);
}

}  // namespace dnls
