#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "field.hpp"

namespace dnls {

/// Smooth, well-resolved random fields: one to four complex Gaussian bumps
/// with random centers, widths and momenta (momenta on the grid lattice).
class RandomSmoothField {
public:
    explicit RandomSmoothField(std::uint64_t seed) : rng_(seed) {}

    ComplexField operator()(const Grid& grid) {
        std::uniform_int_distribution<int> count(1, 4);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> mode(-6, 6);
        const double spread = 0.25 * grid.half_width();
        const int bumps = count(rng_);

        struct Bump {
            complex amp;
            Point center;
            double width;
            Point k;
        };
        std::vector<Bump> params;
        for (int b = 0; b < bumps; ++b) {
            Bump p{std::polar(0.2 + 1.8 * unit(rng_), 2.0 * std::numbers::pi * unit(rng_)), {0, 0, 0}, 0.5 + 2.5 * unit(rng_),
                   {0, 0, 0}};
            for (int a = 0; a < grid.dim(); ++a) {
                const auto ax = static_cast<std::size_t>(a);
                p.center[ax] = spread * (2.0 * unit(rng_) - 1.0);
                p.k[ax] = std::numbers::pi / grid.half_width() * mode(rng_);
            }
            params.push_back(p);
        }
        return sample(grid, [&](const Point& x) {
            complex v{0.0, 0.0};
            for (const auto& p : params) {
                double r2 = 0.0;
                double phase = 0.0;
                for (int a = 0; a < grid.dim(); ++a) {
                    const auto ax = static_cast<std::size_t>(a);
                    const double dx = x[ax] - p.center[ax];
                    r2 += dx * dx;
                    phase += p.k[ax] * x[ax];
                }
                v += p.amp * std::exp(-r2 / (p.width * p.width)) * std::polar(1.0, phase);
            }
            return v;
        });
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace dnls
