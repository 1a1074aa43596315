#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "field.hpp"

namespace dnls {

/// Samples of a(x), its gradient, and the sup norms |a|_inf, |grad a|_inf.
class DampingProfile {
public:
    DampingProfile(RealField values, std::vector<RealField> gradient)
        : values_(std::move(values)), gradient_(std::move(gradient)) {
        const auto& grid = values_.grid;
        if (gradient_.size() != static_cast<std::size_t>(grid.dim())) {
            throw ConfigError("damping gradient must have one component per dimension");
        }
        for (const auto& g : gradient_) {
            if (!(g.grid == grid)) throw ConfigError("damping gradient sampled on a different grid");
        }
        for (double v : values_.values) sup_norm_ = std::max(sup_norm_, std::abs(v));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double s = 0.0;
            for (const auto& g : gradient_) s += g.values[i] * g.values[i];
            grad_sup_norm_ = std::max(grad_sup_norm_, std::sqrt(s));
        }
    }

    /// a = 0 on the grid.
    static DampingProfile zero(const Grid& grid) {
        return DampingProfile(RealField(grid), std::vector<RealField>(static_cast<std::size_t>(grid.dim()), RealField(grid)));
    }

    const Grid& grid() const noexcept { return values_.grid; }
    const std::vector<double>& values() const noexcept { return values_.values; }
    const std::vector<RealField>& gradient() const noexcept { return gradient_; }
    double sup_norm() const noexcept { return sup_norm_; }
    double grad_sup_norm() const noexcept { return grad_sup_norm_; }

    double min_value() const noexcept {
        return *std::min_element(values_.values.begin(), values_.values.end());
    }
    bool is_pointwise_positive() const noexcept { return min_value() > 0.0; }

private:
    RealField values_;
    std::vector<RealField> gradient_;
    double sup_norm_ = 0.0;
    double grad_sup_norm_ = 0.0;
};

/// Closed-form damping profiles used by the scenario catalog. All are C^1
/// and bounded.
struct DampingSpec {
    enum class Kind { zero, constant, gaussian_bump, negative_bump, cosine };

    Kind kind = Kind::zero;
    double amplitude = 0.0;   // a0
    double width = 1.0;       // sigma of the bumps
    double wavelength = 1.0;  // of the cosine, along axis 0

    static DampingSpec zero() { return {}; }
    static DampingSpec constant(double a0) { return {Kind::constant, a0, 1.0, 1.0}; }
    static DampingSpec gaussian_bump(double a0, double sigma) { return {Kind::gaussian_bump, a0, sigma, 1.0}; }
    static DampingSpec negative_bump(double a0, double sigma) { return {Kind::negative_bump, a0, sigma, 1.0}; }
    static DampingSpec cosine(double a0, double wavelength) { return {Kind::cosine, a0, 1.0, wavelength}; }
};

inline std::string to_string(DampingSpec::Kind kind) {
    switch (kind) {
        case DampingSpec::Kind::zero: return "zero";
        case DampingSpec::Kind::constant: return "constant";
        case DampingSpec::Kind::gaussian_bump: return "gaussian_bump";
        case DampingSpec::Kind::negative_bump: return "negative_bump";
        case DampingSpec::Kind::cosine: return "cosine";
    }
    return "?";
}

/// a(x) at one point.
///   gaussian_bump:  a0 exp(-|x|^2 / (2 sigma^2))
///   negative_bump: -a0 exp(-|x|^2 / (2 sigma^2))
///   cosine:         a0 cos(2 pi x_1 / wavelength)
inline double damping_value(const DampingSpec& s, const Point& x, int dim) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    switch (s.kind) {
        case DampingSpec::Kind::zero: return 0.0;
        case DampingSpec::Kind::constant: return s.amplitude;
        case DampingSpec::Kind::gaussian_bump: return s.amplitude * std::exp(-r2 / (2.0 * s.width * s.width));
        case DampingSpec::Kind::negative_bump: return -s.amplitude * std::exp(-r2 / (2.0 * s.width * s.width));
        case DampingSpec::Kind::cosine:
            return s.amplitude * std::cos(2.0 * std::numbers::pi * x[0] / s.wavelength);
    }
    return 0.0;
}

/// d a / d x_axis at one point.
inline double damping_partial(const DampingSpec& s, const Point& x, int dim, int axis) {
    const double xa = x[static_cast<std::size_t>(axis)];
    switch (s.kind) {
        case DampingSpec::Kind::zero:
        case DampingSpec::Kind::constant: return 0.0;
        case DampingSpec::Kind::gaussian_bump:
        case DampingSpec::Kind::negative_bump:
            return -xa / (s.width * s.width) * damping_value(s, x, dim);
        case DampingSpec::Kind::cosine:
            if (axis != 0) return 0.0;
            return -s.amplitude * (2.0 * std::numbers::pi / s.wavelength) *
                   std::sin(2.0 * std::numbers::pi * x[0] / s.wavelength);
    }
    return 0.0;
}

inline DampingProfile make_damping(const Grid& grid, const DampingSpec& spec) {
    if (!std::isfinite(spec.amplitude)) throw ConfigError("damping amplitude must be finite");
    if ((spec.kind == DampingSpec::Kind::gaussian_bump || spec.kind == DampingSpec::Kind::negative_bump) &&
        !(spec.width > 0.0)) {
        throw ConfigError("damping bump width must be positive");
    }
    if (spec.kind == DampingSpec::Kind::cosine && !(spec.wavelength > 0.0)) {
        throw ConfigError("damping wavelength must be positive");
    }
    const int dim = grid.dim();
    auto values = sample_real(grid, [&](const Point& x) { return damping_value(spec, x, dim); });
    std::vector<RealField> grad;
    for (int a = 0; a < dim; ++a) {
        grad.push_back(sample_real(grid, [&](const Point& x) { return damping_partial(spec, x, dim, a); }));
    }
    return DampingProfile(std::move(values), std::move(grad));
}

}  // namespace dnls
