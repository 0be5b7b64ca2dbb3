#pragma once

// PSNR and SSIM on the 0-255 scale, evaluated on the interior left after
// excluding `border` pixels on every side.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace tetropix {

/// PSNR in dB, or the distinguished value "infinite" for identical inputs.
class PsnrValue {
public:
    static PsnrValue infinite() { return PsnrValue(true, 0.0); }
    static PsnrValue finite(double db) { return PsnrValue(false, db); }

    bool is_infinite() const noexcept { return inf_; }
    double db() const {
        if (inf_)
            throw PreconditionError("PSNR is infinite");
        return db_;
    }
    /// +infinity for the infinite value; convenient for comparisons only.
    double as_double() const noexcept { return inf_ ? std::numeric_limits<double>::infinity() : db_; }

    std::string str() const {
        if (inf_)
            return "inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", db_);
        return buf;
    }

    friend bool operator==(const PsnrValue&, const PsnrValue&) = default;

private:
    PsnrValue(bool inf, double db) : inf_(inf), db_(db) {}
    bool inf_;
    double db_;
};

namespace detail {

inline void check_metric_args(const GrayImage& a, const GrayImage& b, std::size_t border) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("metrics: image sizes differ");
    if (2 * border >= std::min(a.rows(), a.cols()))
        throw ParameterError("metrics: border leaves no interior");
}

} // namespace detail

inline PsnrValue psnr(const GrayImage& ref, const GrayImage& rec, std::size_t border = 16) {
    detail::check_metric_args(ref, rec, border);
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t r = border; r < ref.rows() - border; ++r)
        for (std::size_t c = border; c < ref.cols() - border; ++c) {
            const double d = 255.0 * (ref(r, c) - rec(r, c));
            sse += d * d;
            ++n;
        }
    const double mse = sse / static_cast<double>(n);
    if (mse == 0.0)
        return PsnrValue::infinite();
    return PsnrValue::finite(10.0 * std::log10(255.0 * 255.0 / mse));
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 255. Windows lie entirely in the interior.
inline double ssim(const GrayImage& ref, const GrayImage& rec, std::size_t border = 16) {
    detail::check_metric_args(ref, rec, border);
    constexpr int win = 11;
    constexpr double sigma = 1.5;
    const std::size_t h = ref.rows() - 2 * border, w = ref.cols() - 2 * border;
    if (h < win || w < win)
        throw DimensionError("ssim: interior smaller than 11x11");

    std::array<double, win> g{};
    double gs = 0.0;
    for (int i = 0; i < win; ++i) {
        const double x = i - win / 2;
        g[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * sigma * sigma));
        gs += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g)
        v /= gs;

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const std::size_t oh = h - win + 1, ow = w - win + 1;

    // separable filtering of x, y, x^2, y^2, xy: rows first, then columns
    std::array<std::vector<double>, 5> tmp;
    for (auto& t : tmp)
        t.assign(h * ow, 0.0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < ow; ++c)
            for (std::size_t k = 0; k < win; ++k) {
                const double x = 255.0 * ref(border + r, border + c + k);
                const double y = 255.0 * rec(border + r, border + c + k);
                const double gk = g[k];
                tmp[0][r * ow + c] += gk * x;
                tmp[1][r * ow + c] += gk * y;
                tmp[2][r * ow + c] += gk * x * x;
                tmp[3][r * ow + c] += gk * y * y;
                tmp[4][r * ow + c] += gk * x * y;
            }
    double total = 0.0;
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            std::array<double, 5> s{};
            for (std::size_t k = 0; k < win; ++k)
                for (std::size_t q = 0; q < 5; ++q)
                    s[q] += g[k] * tmp[q][(r + k) * ow + c];
            const double mx = s[0], my = s[1];
            const double vx = s[2] - mx * mx, vy = s[3] - my * my, cxy = s[4] - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / static_cast<double>(oh * ow);
}

struct MetricReport {
    PsnrValue psnr = PsnrValue::infinite();
    double ssim = 1.0;
    std::size_t border = 16;
    std::size_t rows = 0, cols = 0;
};

inline MetricReport evaluate_metrics(const GrayImage& ref, const GrayImage& rec,
                                     std::size_t border = 16) {
    MetricReport m;
    m.psnr = psnr(ref, rec, border);
    m.ssim = ssim(ref, rec, border);
    m.border = border;
    m.rows = ref.rows() - 2 * border;
    m.cols = ref.cols() - 2 * border;
    return m;
}

} // namespace tetropix
