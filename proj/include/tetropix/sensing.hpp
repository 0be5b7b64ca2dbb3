#pragma once

// Measurement operator y = A f induced by a sensor layout tiled over an
// image. Every row of A sums the pixels of one pixel group (coefficient 1);
// rows have disjoint supports that partition the image.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "layout.hpp"

namespace tetropix {

/// How the periodic tiling meets the image border.
///
/// periodic: M and N must be multiples of the cell. Groups that protrude
///   from a cell land in the neighbouring replica; at the image border the
///   tiling continues on the image torus, so every support has 4 pixels.
/// crop: any size. The tiling is laid from the origin and cut at the image
///   border; the pixels of a cut group inside the image still form one
///   (smaller) measurement.
enum class BorderMode { periodic, crop };

inline std::string to_string(BorderMode m) { return m == BorderMode::periodic ? "periodic" : "crop"; }

inline BorderMode parse_border_mode(const std::string& s) {
    if (s == "periodic")
        return BorderMode::periodic;
    if (s == "crop")
        return BorderMode::crop;
    throw ParameterError("unknown border mode '" + s + "' (expected periodic or crop)");
}

class MeasurementOperator {
public:
    MeasurementOperator() = default;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t pixel_count() const noexcept { return rows_ * cols_; }
    std::size_t measurement_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    int cell() const noexcept { return cell_; }
    ShapeClass shape() const noexcept { return shape_; }
    BorderMode border() const noexcept { return border_; }
    const std::string& layout_id() const noexcept { return layout_id_; }

    /// Flat pixel indices (r * cols + c) of measurement i.
    std::span<const std::size_t> support(std::size_t i) const {
        return {pixels_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    /// Measurement whose support contains flat pixel index p.
    std::size_t owner(std::size_t p) const { return owner_[p]; }

    bool uniform_supports() const noexcept { return uniform_; }

    friend bool operator==(const MeasurementOperator&, const MeasurementOperator&) = default;

private:
    friend MeasurementOperator build_operator(const SensorLayout&, std::size_t, std::size_t, BorderMode);

    std::size_t rows_ = 0, cols_ = 0;
    int cell_ = 0;
    ShapeClass shape_ = ShapeClass::square2x2;
    BorderMode border_ = BorderMode::periodic;
    bool uniform_ = true;
    std::string layout_id_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> pixels_;
    std::vector<std::size_t> owner_;
};

/// Tiles the layout over an M x N image. Measurements are numbered in raster
/// order of the cell replicas, then by group order inside the cell.
inline MeasurementOperator build_operator(const SensorLayout& layout, std::size_t rows,
                                          std::size_t cols,
                                          BorderMode border = BorderMode::periodic) {
    const auto rep = validate_layout(layout);
    if (!rep.ok())
        throw ValidationError("build_operator: invalid layout: " + rep.failures.front());
    const auto k = static_cast<std::size_t>(layout.cell());
    if (rows == 0 || cols == 0)
        throw DimensionError("build_operator: empty image");
    if (border == BorderMode::periodic && (rows % k != 0 || cols % k != 0))
        throw DimensionError("image " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " is not divisible by the layout cell " + std::to_string(k));

    std::vector<Shape4> planar;
    for (const auto& g : layout.groups())
        planar.push_back(*unwrap_group(g, layout.cell()));

    MeasurementOperator op;
    op.rows_ = rows;
    op.cols_ = cols;
    op.cell_ = layout.cell();
    op.shape_ = layout.shape();
    op.border_ = border;
    op.layout_id_ = layout.id().empty() ? "custom" : layout.id();
    op.offsets_.push_back(0);
    op.owner_.assign(rows * cols, static_cast<std::size_t>(-1));

    const auto R = static_cast<long>(rows), C = static_cast<long>(cols), K = static_cast<long>(k);
    // crop mode also visits the replicas left of and above the origin so that
    // protruding groups reach the first rows and columns
    const long lo = border == BorderMode::periodic ? 0 : -1;
    const long hi_r = border == BorderMode::periodic ? R / K : (R + K - 1) / K + 1;
    const long hi_c = border == BorderMode::periodic ? C / K : (C + K - 1) / K + 1;
    for (long br = lo; br < hi_r; ++br) {
        for (long bc = lo; bc < hi_c; ++bc) {
            for (const auto& shape : planar) {
                std::size_t n = 0;
                for (const auto& cell : shape) {
                    long r = br * K + cell.row, c = bc * K + cell.col;
                    if (border == BorderMode::periodic) {
                        r = ((r % R) + R) % R;
                        c = ((c % C) + C) % C;
                    } else if (r < 0 || r >= R || c < 0 || c >= C) {
                        continue;
                    }
                    const auto p = static_cast<std::size_t>(r * C + c);
                    op.owner_[p] = op.offsets_.size() - 1;
                    op.pixels_.push_back(p);
                    ++n;
                }
                if (n == 0)
                    continue;
                if (n != 4)
                    op.uniform_ = false;
                op.offsets_.push_back(op.pixels_.size());
            }
        }
    }
    return op;
}

/// Acquired values y_i together with the descriptor of their operator.
class MeasurementVector {
public:
    MeasurementVector() = default;

    /// Throws ParameterError when a value is outside [0,4] or not finite.
    MeasurementVector(std::vector<double> values, std::string layout_id, std::size_t rows,
                      std::size_t cols)
        : values_(std::move(values)), layout_id_(std::move(layout_id)), rows_(rows), cols_(cols) {
        for (double v : values_)
            if (!(v >= 0.0 && v <= 4.0))
                throw ParameterError("measurement value outside [0,4]");
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& layout_id() const noexcept { return layout_id_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    friend bool operator==(const MeasurementVector&, const MeasurementVector&) = default;

private:
    std::vector<double> values_;
    std::string layout_id_;
    std::size_t rows_ = 0, cols_ = 0;
};

/// A f for an arbitrary real field.
inline std::vector<double> apply(const MeasurementOperator& op, const Field& f) {
    if (f.rows != op.rows() || f.cols != op.cols())
        throw DimensionError("measure: image size does not match operator");
    std::vector<double> y(op.measurement_count(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t p : op.support(i))
            y[i] += f.data[p];
    return y;
}

/// A^T y for an arbitrary real vector.
inline Field apply_adjoint(const MeasurementOperator& op, std::span<const double> y) {
    if (y.size() != op.measurement_count())
        throw DimensionError("adjoint: measurement count does not match operator");
    Field f(op.rows(), op.cols());
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t p : op.support(i))
            f.data[p] += y[i];
    return f;
}

inline MeasurementVector measure(const MeasurementOperator& op, const GrayImage& img) {
    auto y = apply(op, img.field());
    for (double& v : y)
        v = std::clamp(v, 0.0, 4.0); // absorbs rounding only
    return MeasurementVector(std::move(y), op.layout_id(), op.rows(), op.cols());
}

inline void check_compatible(const MeasurementOperator& op, const MeasurementVector& y) {
    if (y.size() != op.measurement_count() || y.rows() != op.rows() || y.cols() != op.cols())
        throw DimensionError("measurement vector (" + std::to_string(y.size()) + " values, " +
                             std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                             ") does not match operator (" +
                             std::to_string(op.measurement_count()) + " values, " +
                             std::to_string(op.rows()) + "x" + std::to_string(op.cols()) + ")");
}

inline Field adjoint(const MeasurementOperator& op, const MeasurementVector& y) {
    check_compatible(op, y);
    return apply_adjoint(op, y.values());
}

/// Low-resolution image 0.25 * y_i of a square-binned acquisition.
inline GrayImage lr_reorder(const MeasurementOperator& op, const MeasurementVector& y) {
    if (op.shape() != ShapeClass::square2x2 || op.border() != BorderMode::periodic)
        throw PreconditionError("lr_reorder needs a periodic square2x2 operator");
    check_compatible(op, y);
    Field lr(op.rows() / 2, op.cols() / 2);
    for (std::size_t i = 0; i < y.size(); ++i)
        lr.data[i] = 0.25 * y[i];
    return GrayImage::clamped(std::move(lr));
}

// ---------------------------------------------------------------------------
// Measurement files
//
//   M <rows>
//   N <cols>
//   L <count>
//   layout <id>
//   <value>      (L lines, 17 significant digits)

inline void write_measurements(const MeasurementVector& y, std::ostream& out) {
    out << "M " << y.rows() << "\nN " << y.cols() << "\nL " << y.size() << "\nlayout "
        << y.layout_id() << '\n';
    char buf[40];
    for (double v : y.values()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

inline void save_measurements(const MeasurementVector& y, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    write_measurements(y, out);
    if (!out)
        throw IoError("error while writing '" + path.string() + "'");
}

inline MeasurementVector read_measurements(std::istream& in) {
    std::size_t m = 0, n = 0, l = 0;
    std::string id;
    auto header = [&](const char* key, auto& value) {
        std::string line, k;
        if (!std::getline(in, line))
            throw FormatError(std::string("measurement file: missing '") + key + "' line");
        std::istringstream ls(line);
        if (!(ls >> k >> value) || k != key)
            throw FormatError(std::string("measurement file: expected '") + key + " <value>'");
    };
    header("M", m);
    header("N", n);
    header("L", l);
    header("layout", id);
    if (m == 0 || n == 0 || l == 0)
        throw FormatError("measurement file: empty dimensions");
    std::vector<double> values;
    values.reserve(l);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            throw FormatError("measurement file: malformed value '" + line + "'");
        }
        if (line.find_first_not_of(" \t\r", used) != std::string::npos)
            throw FormatError("measurement file: malformed value '" + line + "'");
        values.push_back(v);
    }
    if (values.size() != l)
        throw FormatError("measurement file: expected " + std::to_string(l) + " values, found " +
                          std::to_string(values.size()));
    return MeasurementVector(std::move(values), id, m, n);
}

inline MeasurementVector load_measurements(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return read_measurements(in);
}

} // namespace tetropix
