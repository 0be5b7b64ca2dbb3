#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace tetropix {

/// Row-major raster of unconstrained real values. Used for intermediate
/// quantities (backprojections, iterates) that may leave [0,1].
struct Field {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Field() = default;
    Field(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::size_t size() const noexcept { return data.size(); }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Immutable M x N grayscale image with every sample in [0,1]. Row index is
/// the vertical position, origin in the upper-left corner.
class GrayImage {
public:
    GrayImage() = default;

    /// Takes ownership of the samples; throws ParameterError when a sample is
    /// outside [0,1] or not finite.
    explicit GrayImage(Field f) : field_(std::move(f)) {
        if (field_.data.size() != field_.rows * field_.cols)
            throw DimensionError("sample count does not match image size");
        for (double s : field_.data)
            if (!(s >= 0.0 && s <= 1.0))
                throw ParameterError("image sample outside [0,1]");
    }

    GrayImage(std::size_t rows, std::size_t cols, double fill)
        : GrayImage(Field(rows, cols, fill)) {}

    /// Builds an image from arbitrary values by clamping into [0,1].
    static GrayImage clamped(Field f) {
        for (double& s : f.data)
            s = std::isfinite(s) ? std::clamp(s, 0.0, 1.0) : 0.0;
        return GrayImage(std::move(f));
    }

    std::size_t rows() const noexcept { return field_.rows; }
    std::size_t cols() const noexcept { return field_.cols; }
    std::size_t size() const noexcept { return field_.data.size(); }
    bool empty() const noexcept { return field_.data.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return field_(r, c); }
    std::span<const double> samples() const noexcept { return field_.data; }
    const Field& field() const noexcept { return field_; }

    friend bool operator==(const GrayImage& a, const GrayImage& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a.field_.data == b.field_.data;
    }

private:
    Field field_;
};

/// Sub-image of size h x w anchored at (r0, c0).
inline GrayImage crop(const GrayImage& img, std::size_t r0, std::size_t c0, std::size_t h,
                      std::size_t w) {
    if (h == 0 || w == 0 || r0 + h > img.rows() || c0 + w > img.cols())
        throw DimensionError("crop window outside image");
    Field out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out(r, c) = img(r0 + r, c0 + c);
    return GrayImage(std::move(out));
}

/// Largest top-left anchored sub-image whose sides are multiples of `cell`.
inline GrayImage crop_divisible(const GrayImage& img, std::size_t cell) {
    if (cell < 2)
        throw ParameterError("crop_divisible: cell must be at least 2");
    const std::size_t h = img.rows() / cell * cell;
    const std::size_t w = img.cols() / cell * cell;
    if (h == 0 || w == 0)
        throw DimensionError("crop_divisible: image " + std::to_string(img.rows()) + "x" +
                             std::to_string(img.cols()) + " smaller than cell " +
                             std::to_string(cell));
    if (h == img.rows() && w == img.cols())
        return img;
    return crop(img, 0, 0, h, w);
}

// ---------------------------------------------------------------------------
// Synthetic test charts

enum class ChartKind { fine_lines, diagonal_stripes, zone_plate, constant };

struct ChartSpec {
    ChartKind kind = ChartKind::fine_lines;
    double period = 2.0;      // pixels
    double orientation = 0.0; // degrees; 0 gives horizontal lines (variation along rows)
    double contrast = 1.0;    // in (0,1]
};

inline std::string to_string(ChartKind k) {
    switch (k) {
    case ChartKind::fine_lines: return "fine-lines";
    case ChartKind::diagonal_stripes: return "diagonal-stripes";
    case ChartKind::zone_plate: return "zone-plate";
    case ChartKind::constant: return "constant";
    }
    return "?";
}

inline ChartKind parse_chart_kind(const std::string& s) {
    for (auto k : {ChartKind::fine_lines, ChartKind::diagonal_stripes, ChartKind::zone_plate,
                   ChartKind::constant})
        if (to_string(k) == s)
            return k;
    throw ParameterError("unknown chart kind '" + s + "'");
}

/// Deterministic resolution chart.
///
/// fine-lines: square wave of the given period along the direction normal to
/// the lines. diagonal-stripes: sinusoid with the same geometry. zone-plate:
/// cos(k r^2) around the image center, k chosen so the local period at the
/// inscribed circle equals `period`. constant: 0.5 everywhere.
inline GrayImage make_chart(const ChartSpec& spec, std::size_t rows, std::size_t cols) {
    if (rows < 16 || cols < 16)
        throw DimensionError("make_chart: charts need at least 16x16 pixels");
    if (!(spec.period >= 1.0))
        throw ParameterError("make_chart: period must be at least 1 pixel");
    if (!(spec.contrast > 0.0 && spec.contrast <= 1.0))
        throw ParameterError("make_chart: contrast must be in (0,1]");

    const double amp = 0.5 * spec.contrast;
    const double theta = spec.orientation * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double r_max = 0.5 * static_cast<double>(std::min(rows, cols));
    const double k_zone = std::numbers::pi / (spec.period * r_max);
    const double cr = 0.5 * static_cast<double>(rows), cc = 0.5 * static_cast<double>(cols);

    Field f(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double u = static_cast<double>(r) * ct + static_cast<double>(c) * st;
            double v = 0.5;
            switch (spec.kind) {
            case ChartKind::fine_lines: {
                double phase = u / spec.period;
                phase -= std::floor(phase);
                // snap rounding noise so axis-aligned charts stay exact
                if (phase > 1.0 - 1e-9)
                    phase = 0.0;
                v = phase < 0.5 - 1e-9 ? 0.5 + amp : 0.5 - amp;
                break;
            }
            case ChartKind::diagonal_stripes:
                v = 0.5 + amp * std::cos(2.0 * std::numbers::pi * u / spec.period);
                break;
            case ChartKind::zone_plate: {
                const double dr = static_cast<double>(r) - cr, dc = static_cast<double>(c) - cc;
                v = 0.5 + amp * std::cos(k_zone * (dr * dr + dc * dc));
                break;
            }
            case ChartKind::constant:
                v = 0.5;
                break;
            }
            f(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return GrayImage(std::move(f));
}

} // namespace tetropix
