#pragma once

// Separable orthonormal 2-D bases. Atom (s, r) at pixel (a, b) is
// U(a, s) * V(b, r) with U, V the 1-D bases of the row and column axes.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "error.hpp"

namespace tetropix {

enum class TransformKind { dft, dct, identity };

inline std::string to_string(TransformKind k) {
    switch (k) {
    case TransformKind::dft: return "dft";
    case TransformKind::dct: return "dct";
    case TransformKind::identity: return "identity";
    }
    return "?";
}

inline TransformKind parse_transform_kind(const std::string& s) {
    if (s == "dft")
        return TransformKind::dft;
    if (s == "dct")
        return TransformKind::dct;
    if (s == "identity")
        return TransformKind::identity;
    throw ParameterError("unknown transform '" + s + "' (expected dft, dct or identity)");
}

/// Orthonormal DCT-II matrix, entry (s, a) = c_s cos(pi (2a+1) s / 2n).
/// Rows are the atoms, so coefficients are D * x.
inline Eigen::MatrixXd dct_matrix(std::size_t n) {
    Eigen::MatrixXd d(n, n);
    const double nn = static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double c = s == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
        for (std::size_t a = 0; a < n; ++a)
            d(s, a) = c * std::cos(std::numbers::pi * (2.0 * a + 1.0) * s / (2.0 * nn));
    }
    return d;
}

/// 1-D basis with atoms in columns: entry (a, s) is atom s at position a.
inline Eigen::MatrixXcd basis_1d(TransformKind kind, std::size_t n) {
    if (n == 0)
        throw DimensionError("basis_1d: empty axis");
    Eigen::MatrixXcd u(n, n);
    switch (kind) {
    case TransformKind::dft: {
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t s = 0; s < n; ++s) {
                // reduce a*s first so the phase stays exact for large n
                const double ph = 2.0 * std::numbers::pi * static_cast<double>((a * s) % n) /
                                  static_cast<double>(n);
                u(a, s) = std::polar(scale, ph);
            }
        break;
    }
    case TransformKind::dct:
        u = dct_matrix(n).transpose().cast<std::complex<double>>();
        break;
    case TransformKind::identity:
        u = Eigen::MatrixXcd::Identity(n, n);
        break;
    }
    return u;
}

struct TransformBasis {
    TransformKind kind = TransformKind::dft;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Eigen::MatrixXcd u; // rows x rows
    Eigen::MatrixXcd v; // cols x cols

    TransformBasis(TransformKind k, std::size_t m, std::size_t n)
        : kind(k), rows(m), cols(n), u(basis_1d(k, m)), v(basis_1d(k, n)) {}

    std::size_t atom_count() const noexcept { return rows * cols; }

    /// Flat atom index s * cols + r.
    std::size_t atom_index(std::size_t s, std::size_t r) const noexcept { return s * cols + r; }

    std::complex<double> operator()(std::size_t a, std::size_t b, std::size_t s,
                                    std::size_t r) const {
        return u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(s)) *
               v(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(r));
    }
};

} // namespace tetropix
