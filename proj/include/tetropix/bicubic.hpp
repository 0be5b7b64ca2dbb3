#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "image.hpp"

namespace tetropix {

/// Keys cubic convolution kernel with parameter a.
inline double cubic_kernel(double x, double a = -0.5) {
    x = std::abs(x);
    if (x < 1.0)
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0)
        return a * (((x - 5.0) * x + 8.0) * x - 4.0);
    return 0.0;
}

namespace detail {

struct Taps {
    std::array<std::size_t, 4> index;
    std::array<double, 4> weight;
};

/// Taps of output position `out` on an input axis of length n, with input
/// sample j centered at output coordinate 2j + 0.5.
inline Taps upscale_taps(std::size_t out, std::size_t n) {
    const double x = (static_cast<double>(out) - 0.5) / 2.0;
    const double fl = std::floor(x);
    const auto base = static_cast<long>(fl);
    Taps t;
    for (int k = 0; k < 4; ++k) {
        const long j = base - 1 + k;
        t.index[static_cast<std::size_t>(k)] =
            static_cast<std::size_t>(std::clamp(j, 0L, static_cast<long>(n) - 1));
        t.weight[static_cast<std::size_t>(k)] = cubic_kernel(x - static_cast<double>(j));
    }
    return t;
}

} // namespace detail

/// Factor-2 bicubic upscaling with clamp-to-edge borders; output clamped to
/// [0,1].
inline GrayImage bicubic_upscale(const GrayImage& lr) {
    if (lr.empty())
        throw DimensionError("bicubic_upscale: empty image");
    const std::size_t m = lr.rows(), n = lr.cols();
    // rows pass, then columns pass
    Field tmp(m, 2 * n);
    for (std::size_t c = 0; c < 2 * n; ++c) {
        const auto t = detail::upscale_taps(c, n);
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
                s += t.weight[k] * lr(r, t.index[k]);
            tmp(r, c) = s;
        }
    }
    Field out(2 * m, 2 * n);
    for (std::size_t r = 0; r < 2 * m; ++r) {
        const auto t = detail::upscale_taps(r, m);
        for (std::size_t c = 0; c < 2 * n; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
                s += t.weight[k] * tmp(t.index[k], c);
            out(r, c) = s;
        }
    }
    return GrayImage::clamped(std::move(out));
}

} // namespace tetropix
