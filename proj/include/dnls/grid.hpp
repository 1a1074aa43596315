#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dnls {

/// Periodic box [-L, L)^d sampled with N points per axis.
///
/// Samples are stored row-major with axis 0 slowest. Wavenumbers follow
/// the usual FFT ordering, k_j = pi*j/L for j = 0..N/2-1, -N/2..-1; the
/// Nyquist mode keeps k = -pi*N/(2L) and multipliers are applied to it as-is.
class Grid {
public:
    Grid(int dim, std::size_t points_per_axis, double half_width)
        : dim_(dim), n_(points_per_axis), half_width_(half_width) {
        if (dim < 1 || dim > 3) {
            throw ConfigError("grid dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
        }
        if (n_ < 2 || (n_ & (n_ - 1)) != 0) {
            throw ConfigError("points per axis must be a power of two >= 2 (got " +
                              std::to_string(n_) + ")");
        }
        if (!(half_width > 0.0) || !std::isfinite(half_width)) {
            throw ConfigError("box half-width must be positive and finite");
        }
        spacing_ = 2.0 * half_width_ / static_cast<double>(n_);
        wavenumbers_.resize(n_);
        const auto half = static_cast<long>(n_ / 2);
        for (std::size_t j = 0; j < n_; ++j) {
            const long freq = static_cast<long>(j) < half ? static_cast<long>(j)
                                                          : static_cast<long>(j) - static_cast<long>(n_);
            wavenumbers_[j] = std::numbers::pi * static_cast<double>(freq) / half_width_;
        }
        size_ = 1;
        for (int a = 0; a < dim_; ++a) size_ *= n_;
    }

    int dim() const noexcept { return dim_; }
    std::size_t points_per_axis() const noexcept { return n_; }
    double half_width() const noexcept { return half_width_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return size_; }
    const std::vector<double>& wavenumbers() const noexcept { return wavenumbers_; }

    /// Quadrature weight h^d of the rectangle rule.
    double cell_volume() const noexcept { return std::pow(spacing_, dim_); }

    /// Largest resolved |k| on one axis.
    double max_wavenumber() const noexcept {
        return std::numbers::pi * static_cast<double>(n_ / 2) / half_width_;
    }

    /// Coordinate of sample i along one axis.
    double coordinate(std::size_t i) const noexcept {
        return -half_width_ + static_cast<double>(i) * spacing_;
    }

    /// Index of the sample at x = 0 along each axis.
    std::size_t center_index() const noexcept { return n_ / 2; }

    /// Per-axis indices of flat index `flat` (unused axes are zero).
    std::array<std::size_t, 3> unflatten(std::size_t flat) const noexcept {
        std::array<std::size_t, 3> idx{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = flat % n_;
            flat /= n_;
        }
        return idx;
    }

    std::size_t flatten(const std::array<std::size_t, 3>& idx) const noexcept {
        std::size_t flat = 0;
        for (int a = 0; a < dim_; ++a) flat = flat * n_ + idx[static_cast<std::size_t>(a)];
        return flat;
    }

    /// Physical position of flat sample `flat`.
    std::array<double, 3> position(std::size_t flat) const noexcept {
        const auto idx = unflatten(flat);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a) {
            x[static_cast<std::size_t>(a)] = coordinate(idx[static_cast<std::size_t>(a)]);
        }
        return x;
    }

    /// Wavevector of flat spectral index `flat`.
    std::array<double, 3> wavevector(std::size_t flat) const noexcept {
        const auto idx = unflatten(flat);
        std::array<double, 3> k{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a) {
            k[static_cast<std::size_t>(a)] = wavenumbers_[idx[static_cast<std::size_t>(a)]];
        }
        return k;
    }

    /// |k|^2 for every spectral index.
    std::vector<double> laplacian_symbol() const {
        std::vector<double> out(size_);
        for (std::size_t i = 0; i < size_; ++i) {
            const auto k = wavevector(i);
            out[i] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        }
        return out;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
    }

private:
    int dim_;
    std::size_t n_;
    double half_width_;
    double spacing_ = 0.0;
    std::size_t size_ = 0;
    std::vector<double> wavenumbers_;
};

}  // namespace dnls
