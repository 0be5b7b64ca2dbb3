#pragma once

// Transform-domain measurement matrix A' = A Phi, its mutual coherence and the
// Welch lower bound.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>
#include <algorithm>

#include "error.hpp"
#include "sensing.hpp"
#include "transform.hpp"

namespace tetropix {

/// L x MN matrix; column s * N + r holds atom (s, r) summed over each support.
inline Eigen::MatrixXcd transformed_matrix(const MeasurementOperator& op, const TransformBasis& phi) {
    if (phi.rows != op.rows() || phi.cols != op.cols())
        throw DimensionError("transformed_matrix: basis size does not match operator");
    const auto L = static_cast<Eigen::Index>(op.measurement_count());
    const auto N = op.cols();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(L, static_cast<Eigen::Index>(phi.atom_count()));
    for (Eigen::Index i = 0; i < L; ++i) {
        for (std::size_t p : op.support(static_cast<std::size_t>(i))) {
            const auto a = static_cast<Eigen::Index>(p / N), b = static_cast<Eigen::Index>(p % N);
            // outer product of the two 1-D atom rows, flattened row-major
            for (Eigen::Index s = 0; s < phi.u.cols(); ++s) {
                const std::complex<double> us = phi.u(a, s);
                for (Eigen::Index r = 0; r < phi.v.cols(); ++r)
                    out(i, s * phi.v.cols() + r) += us * phi.v(b, r);
            }
        }
    }
    return out;
}

struct ColumnCoherence {
    double mu = 0.0;
    Eigen::Index first = -1;
    Eigen::Index second = -1;
    std::size_t zero_columns = 0; // excluded from the maximum
};

/// Largest |<a_j, a_k>| / (|a_j| |a_k|) over distinct nonzero columns. The
/// first pair in (j, k) order attaining the maximum is reported.
inline ColumnCoherence coherence_of_columns(const Eigen::MatrixXcd& a) {
    const Eigen::Index n = a.cols();
    Eigen::VectorXd norms = a.colwise().norm().transpose();
    const double max_norm = n > 0 ? norms.maxCoeff() : 0.0;
    const double zero_tol = 1e-10 * std::max(max_norm, 1e-300);

    ColumnCoherence res;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (norms(j) > zero_tol)
            keep.push_back(j);
        else
            ++res.zero_columns;
    }
    if (keep.size() < 2)
        throw PreconditionError("coherence undefined: fewer than two nonzero columns");

    Eigen::MatrixXcd b(a.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        b.col(static_cast<Eigen::Index>(j)) = a.col(keep[j]) / norms(keep[j]);
    const Eigen::MatrixXcd gram = b.adjoint() * b;

    res.mu = -1.0;
    const auto m = static_cast<Eigen::Index>(keep.size());
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index k = j + 1; k < m; ++k) {
            const double v = std::abs(gram(j, k));
            if (v > res.mu + 1e-12) {
                res.mu = v;
                res.first = keep[static_cast<std::size_t>(j)];
                res.second = keep[static_cast<std::size_t>(k)];
            }
        }
    }
    res.mu = std::min(res.mu, 1.0);
    return res;
}

/// Welch bound sqrt((MN - L) / (L (MN - 1))).
inline double welch_bound(std::size_t m, std::size_t n, std::size_t l) {
    const double mn = static_cast<double>(m) * static_cast<double>(n);
    if (m == 0 || n == 0 || mn < 2.0)
        throw ParameterError("welch_bound: need MN >= 2");
    if (l < 1 || static_cast<double>(l) > mn)
        throw ParameterError("welch_bound: L must lie in [1, MN]");
    const double ld = static_cast<double>(l);
    return std::sqrt((mn - ld) / (ld * (mn - 1.0)));
}

struct CoherenceReport {
    std::string layout;
    TransformKind transform = TransformKind::dft;
    std::size_t rows = 0, cols = 0, measurements = 0;
    double mu = 0.0;
    double welch = 0.0;
    std::pair<std::size_t, std::size_t> atom1{0, 0}; // (sigma, rho)
    std::pair<std::size_t, std::size_t> atom2{0, 0};
    std::size_t zero_columns = 0;
};

inline CoherenceReport coherence(const MeasurementOperator& op, const TransformBasis& phi) {
    const auto cc = coherence_of_columns(transformed_matrix(op, phi));
    CoherenceReport rep;
    rep.layout = op.layout_id();
    rep.transform = phi.kind;
    rep.rows = op.rows();
    rep.cols = op.cols();
    rep.measurements = op.measurement_count();
    rep.mu = cc.mu;
    rep.welch = welch_bound(op.rows(), op.cols(), op.measurement_count());
    const auto n = op.cols();
    rep.atom1 = {static_cast<std::size_t>(cc.first) / n, static_cast<std::size_t>(cc.first) % n};
    rep.atom2 = {static_cast<std::size_t>(cc.second) / n, static_cast<std::size_t>(cc.second) % n};
    rep.zero_columns = cc.zero_columns;
    return rep;
}

inline CoherenceReport coherence(const MeasurementOperator& op, TransformKind kind = TransformKind::dft) {
    return coherence(op, TransformBasis(kind, op.rows(), op.cols()));
}

/// True when two DFT frequencies fold onto each other under 2x2 binning, i.e.
/// they agree modulo half the image size on both axes.
inline bool dft_aliased_2x2(std::size_t m, std::size_t n, std::pair<std::size_t, std::size_t> a,
                            std::pair<std::size_t, std::size_t> b) {
    const std::size_t hm = m / 2, hn = n / 2;
    return a != b && (a.first % hm) == (b.first % hm) && (a.second % hn) == (b.second % hn);
}

inline const char* coherence_csv_header() {
    return "layout,transform,M,N,L,mu,welch,argmax_sigma_rho,argmax_sigma2_rho2";
}

/// One CSV row; atom pairs are written as sigma:rho.
inline std::string coherence_csv_row(const CoherenceReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%zu,%.6f,%.6f,%zu:%zu,%zu:%zu", r.layout.c_str(),
                  to_string(r.transform).c_str(), r.rows, r.cols, r.measurements, r.mu, r.welch,
                  r.atom1.first, r.atom1.second, r.atom2.first, r.atom2.second);
    return buf;
}

} // namespace tetropix
