#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace dnls {

using complex = std::complex<double>;

namespace detail {

// The FFTW planner is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Complex-to-complex d-dimensional DFT on a Grid, backed by FFTW.
///
/// Plans are built once with FFTW_ESTIMATE on owned aligned buffers and always
/// executed on those buffers, so results are bit-reproducible run to run.
/// forward() is unnormalized; inverse() divides by the number of samples.
class SpectralTransform {
public:
    explicit SpectralTransform(const Grid& grid) : size_(grid.size()) {
        std::array<int, 3> dims{};
        for (int a = 0; a < grid.dim(); ++a) {
            dims[static_cast<std::size_t>(a)] = static_cast<int>(grid.points_per_axis());
        }
        buffer_ = fftw_alloc_complex(size_);
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward_ = fftw_plan_dft(grid.dim(), dims.data(), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft(grid.dim(), dims.data(), buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    ~SpectralTransform() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(buffer_);
    }

    std::size_t size() const noexcept { return size_; }

    void forward(std::span<const complex> in, std::span<complex> out) {
        run(forward_, in, out, 1.0);
    }

    void inverse(std::span<const complex> in, std::span<complex> out) {
        run(inverse_, in, out, 1.0 / static_cast<double>(size_));
    }

    /// In-place variants.
    void forward(std::span<complex> data) { run(forward_, data, data, 1.0); }
    void inverse(std::span<complex> data) { run(inverse_, data, data, 1.0 / static_cast<double>(size_)); }

private:
    void run(fftw_plan plan, std::span<const complex> in, std::span<complex> out, double scale) {
        std::memcpy(buffer_, in.data(), size_ * sizeof(complex));
        fftw_execute(plan);
        auto* result = reinterpret_cast<const complex*>(buffer_);
        if (scale == 1.0) {
            std::memcpy(out.data(), result, size_ * sizeof(complex));
        } else {
            for (std::size_t i = 0; i < size_; ++i) out[i] = result[i] * scale;
        }
    }

    std::size_t size_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Per-thread transform for the grid's shape, created on first use.
inline SpectralTransform& transform_for(const Grid& grid) {
    thread_local std::map<std::pair<int, std::size_t>, std::unique_ptr<SpectralTransform>> cache;
    auto& slot = cache[{grid.dim(), grid.points_per_axis()}];
    if (!slot) slot = std::make_unique<SpectralTransform>(grid);
    return *slot;
}

}  // namespace dnls
