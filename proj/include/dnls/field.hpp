#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <span>
#include <sstream>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"

namespace dnls {

using Point = std::array<double, 3>;

/// Complex samples of u on a Grid.
struct ComplexField {
    Grid grid;
    std::vector<complex> values;

    explicit ComplexField(Grid g) : grid(std::move(g)), values(grid.size(), complex{0.0, 0.0}) {}
    ComplexField(Grid g, std::vector<complex> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size()) throw ConfigError("field size does not match grid");
    }

    std::size_t size() const noexcept { return values.size(); }
    bool is_finite() const noexcept {
        return std::all_of(values.begin(), values.end(),
                           [](complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }
};

/// Real samples (damping coefficients, densities) on a Grid.
struct RealField {
    Grid grid;
    std::vector<double> values;

    explicit RealField(Grid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
    RealField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size()) throw ConfigError("field size does not match grid");
    }
};

/// Exponent 4/d of the L2-critical nonlinearity.
inline double critical_power(int dim) noexcept { return 4.0 / static_cast<double>(dim); }

/// |u|^(4/d+2) from |u|^2, with integer powers where the dimension allows.
inline double lp_density(double modulus_sq, int dim) noexcept {
    switch (dim) {
        case 1: return modulus_sq * modulus_sq * modulus_sq;
        case 2: return modulus_sq * modulus_sq;
        default: return std::pow(modulus_sq, 1.0 + 2.0 / static_cast<double>(dim));
    }
}

/// |u|^(4/d) from |u|^2.
inline double nonlinear_factor(double modulus_sq, int dim) noexcept {
    switch (dim) {
        case 1: return modulus_sq * modulus_sq;
        case 2: return modulus_sq;
        default: return std::pow(modulus_sq, 2.0 / static_cast<double>(dim));
    }
}

namespace detail {

inline std::string describe_point(const Grid& grid, const Point& x) {
    std::ostringstream os;
    os << '(';
    for (int a = 0; a < grid.dim(); ++a) {
        if (a) os << ", ";
        os << x[static_cast<std::size_t>(a)];
    }
    os << ')';
    return os.str();
}

}  // namespace detail

/// Samples f at every grid point.
template <std::invocable<const Point&> F>
ComplexField sample(const Grid& grid, F&& f) {
    ComplexField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.position(i);
        const complex z = static_cast<complex>(f(x));
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw SamplingError("non-finite sample at x = " + detail::describe_point(grid, x));
        }
        out.values[i] = z;
    }
    return out;
}

template <std::invocable<const Point&> F>
RealField sample_real(const Grid& grid, F&& f) {
    RealField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.position(i);
        const double v = static_cast<double>(f(x));
        if (!std::isfinite(v)) {
            throw SamplingError("non-finite sample at x = " + detail::describe_point(grid, x));
        }
        out.values[i] = v;
    }
    return out;
}

inline std::vector<complex> forward_transform(const ComplexField& field) {
    std::vector<complex> hat(field.size());
    transform_for(field.grid).forward(field.values, hat);
    return hat;
}

inline ComplexField inverse_transform(const Grid& grid, std::span<const complex> hat) {
    ComplexField out(grid);
    transform_for(grid).inverse(hat, out.values);
    return out;
}

/// F^{-1}[symbol(k) * F[u]].
template <typename Symbol>
    requires std::invocable<Symbol, const Point&>
ComplexField spectral_multiply(const ComplexField& field, Symbol&& symbol) {
    auto hat = forward_transform(field);
    for (std::size_t i = 0; i < hat.size(); ++i) {
        hat[i] *= static_cast<complex>(symbol(field.grid.wavevector(i)));
    }
    return inverse_transform(field.grid, hat);
}

/// Same as above with a precomputed multiplier array.
template <typename T>
ComplexField spectral_multiply(const ComplexField& field, std::span<const T> multiplier) {
    auto hat = forward_transform(field);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= multiplier[i];
    return inverse_transform(field.grid, hat);
}

/// Spectral partial derivative along `axis`.
inline ComplexField partial_derivative(const ComplexField& field, int axis) {
    return spectral_multiply(field, [axis](const Point& k) {
        return complex{0.0, k[static_cast<std::size_t>(axis)]};
    });
}

/// All d spectral partial derivatives, sharing one forward transform.
inline std::vector<ComplexField> gradient(const ComplexField& field) {
    const auto& grid = field.grid;
    const auto hat = forward_transform(field);
    std::vector<ComplexField> out;
    out.reserve(static_cast<std::size_t>(grid.dim()));
    std::vector<complex> scratch(hat.size());
    for (int a = 0; a < grid.dim(); ++a) {
        for (std::size_t i = 0; i < hat.size(); ++i) {
            scratch[i] = hat[i] * complex{0.0, grid.wavevector(i)[static_cast<std::size_t>(a)]};
        }
        out.push_back(inverse_transform(grid, scratch));
    }
    return out;
}

inline double mass_sq(const ComplexField& field) {
    double s = 0.0;
    for (const auto& z : field.values) s += std::norm(z);
    return s * field.grid.cell_volume();
}

/// int |grad u|^2 by Plancherel.
inline double grad_sq_from_spectrum(const Grid& grid, std::span<const complex> hat) {
    double s = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) {
        const auto k = grid.wavevector(i);
        s += (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * std::norm(hat[i]);
    }
    return s * grid.cell_volume() / static_cast<double>(grid.size());
}

inline double grad_sq(const ComplexField& field) {
    return grad_sq_from_spectrum(field.grid, forward_transform(field));
}

/// int |u|^(4/d+2).
inline double lp_power(const ComplexField& field) {
    double s = 0.0;
    for (const auto& z : field.values) s += lp_density(std::norm(z), field.grid.dim());
    return s * field.grid.cell_volume();
}

struct Norms {
    double mass_sq = 0.0;
    double grad_sq = 0.0;
    double lp_power = 0.0;
};

inline Norms norms(const ComplexField& field) {
    return {mass_sq(field), grad_sq(field), lp_power(field)};
}

/// Energy 1/2 |grad u|^2 - d/(4+2d) |u|_{4/d+2}^{4/d+2}.
inline double energy_from(const Norms& n, int dim) noexcept {
    const double d = static_cast<double>(dim);
    return 0.5 * n.grad_sq - d / (4.0 + 2.0 * d) * n.lp_power;
}

/// L2 norm of u - v.
inline double l2_distance(const ComplexField& u, const ComplexField& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u.values[i] - v.values[i]);
    return std::sqrt(s * u.grid.cell_volume());
}

inline double max_abs_difference(const ComplexField& u, const ComplexField& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u.values[i] - v.values[i]));
    return m;
}

inline ComplexField scaled(ComplexField field, complex factor) {
    for (auto& z : field.values) z *= factor;
    return field;
}

inline ComplexField to_complex(const RealField& field) {
    ComplexField out(field.grid);
    for (std::size_t i = 0; i < field.values.size(); ++i) out.values[i] = field.values[i];
    return out;
}

}  // namespace dnls
