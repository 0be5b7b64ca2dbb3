#pragma once

// Smoothed projected Landweber reconstruction on overlapping model windows.
//
// The image is split into target blocks; each block is reconstructed inside
// a larger model window (block plus a symmetric border, wrapping on the image
// torus) from the measurements whose whole support lies in that window.
// Only the central target block of every window is kept.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "sensing.hpp"
#include "transform.hpp"

namespace tetropix {

struct SplConfig {
    std::size_t target = 16;
    std::size_t window = 32;
    std::size_t wiener = 3;
    std::size_t max_iters = 200;
    double tol = 1e-4;
    double lambda0 = 0.05;
    double decay = 0.95;
    double wiener_noise = 1e-3;
    std::size_t threads = 1;
    bool record_trace = false;

    void validate() const {
        if (target == 0)
            throw ParameterError("spl: target block size must be positive");
        if (window < target || (window - target) % 2 != 0)
            throw ParameterError("spl: window must be >= target with an even difference");
        if (wiener == 0 || wiener % 2 == 0)
            throw ParameterError("spl: wiener kernel side must be odd");
        if (max_iters == 0)
            throw ParameterError("spl: max_iters must be positive");
        if (!(tol >= 0.0) || !(lambda0 >= 0.0) || !(wiener_noise >= 0.0))
            throw ParameterError("spl: tol, lambda0 and wiener_noise must be non-negative");
        if (!(decay > 0.0 && decay <= 1.0))
            throw ParameterError("spl: decay must lie in (0,1]");
        if (threads == 0)
            throw ParameterError("spl: threads must be positive");
    }
};

/// Residuals ||A_w x - y_w|| immediately before and after each projection.
struct WindowTrace {
    std::size_t block_row = 0, block_col = 0;
    std::vector<double> before;
    std::vector<double> after;
};

enum class Method { bicubic, spl };

inline std::string to_string(Method m) { return m == Method::bicubic ? "bicubic" : "spl"; }

struct Reconstruction {
    GrayImage image;
    Method method = Method::spl;
    double residual = 0.0; // ||A f - y|| / ||y||
    std::size_t iterations_used = 0;
    std::vector<WindowTrace> trace;
};

/// Relative measurement residual of a reconstruction.
inline double relative_residual(const MeasurementOperator& op, const MeasurementVector& y,
                                const Field& f) {
    const auto af = apply(op, f);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < af.size(); ++i) {
        num += (af[i] - y[i]) * (af[i] - y[i]);
        den += y[i] * y[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Local least-squares problem of one model window. Pixel indices are local
/// (row-major over rows x cols).
struct WindowProblem {
    std::size_t rows = 0, cols = 0;
    std::vector<std::vector<std::size_t>> supports;
    std::vector<double> values;
    Eigen::MatrixXd init;
};

struct WindowResult {
    Eigen::MatrixXd estimate;
    std::size_t iterations = 0;
    WindowTrace trace;
};

/// Block and window placement along one image axis.
struct AxisTiling {
    struct Span {
        std::size_t block_start, block_len; // target block in image coordinates
        long window_start;                  // may be negative (torus wrap)
        std::size_t window_len;
    };
    std::vector<Span> spans;

    AxisTiling(std::size_t n, std::size_t target, std::size_t window) {
        if (window >= n) {
            for (std::size_t b = 0; b < n; b += target)
                spans.push_back({b, std::min(target, n - b), 0, n});
            return;
        }
        const long border = static_cast<long>((window - target) / 2);
        for (std::size_t b = 0; b < n; b += target)
            spans.push_back({b, std::min(target, n - b), static_cast<long>(b) - border, window});
    }
};

/// Runs `solve(problem) -> WindowResult` on every window and assembles the
/// central blocks. Windows are independent and may run on several threads;
/// the result does not depend on scheduling.
template <class WindowSolver>
std::vector<WindowResult> sliding_windows(const MeasurementOperator& op, const Field& init,
                                          const MeasurementVector& y, std::size_t target,
                                          std::size_t window, std::size_t threads,
                                          WindowSolver&& solve, Field& assembled) {
    const std::size_t M = op.rows(), N = op.cols();
    const AxisTiling rt(M, target, window), ct(N, target, window);
    const std::size_t nb = rt.spans.size() * ct.spans.size();
    std::vector<WindowResult> results(nb);
    assembled = Field(M, N);

    auto run_one = [&](std::size_t w) {
        const auto& rs = rt.spans[w / ct.spans.size()];
        const auto& cs = ct.spans[w % ct.spans.size()];
        WindowProblem prob;
        prob.rows = rs.window_len;
        prob.cols = cs.window_len;
        std::vector<long> local(M * N, -1);
        std::vector<std::size_t> global(prob.rows * prob.cols);
        prob.init.resize(static_cast<Eigen::Index>(prob.rows), static_cast<Eigen::Index>(prob.cols));
        for (std::size_t i = 0; i < prob.rows; ++i) {
            const auto r = static_cast<std::size_t>(wrap_index(static_cast<int>(rs.window_start + static_cast<long>(i)), static_cast<int>(M)));
            for (std::size_t j = 0; j < prob.cols; ++j) {
                const auto c = static_cast<std::size_t>(wrap_index(static_cast<int>(cs.window_start + static_cast<long>(j)), static_cast<int>(N)));
                const std::size_t p = r * N + c;
                local[p] = static_cast<long>(i * prob.cols + j);
                global[i * prob.cols + j] = p;
                prob.init(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = init.data[p];
            }
        }
        std::vector<char> seen(op.measurement_count(), 0);
        for (std::size_t p : global) {
            const std::size_t m = op.owner(p);
            if (seen[m])
                continue;
            seen[m] = 1;
            std::vector<std::size_t> sup;
            bool inside = true;
            for (std::size_t q : op.support(m)) {
                if (local[q] < 0) {
                    inside = false;
                    break;
                }
                sup.push_back(static_cast<std::size_t>(local[q]));
            }
            if (inside) {
                prob.supports.push_back(std::move(sup));
                prob.values.push_back(y[m]);
            }
        }
        WindowResult res = solve(prob);
        res.trace.block_row = w / ct.spans.size();
        res.trace.block_col = w % ct.spans.size();
        const long off_r = static_cast<long>(rs.block_start) - rs.window_start;
        const long off_c = static_cast<long>(cs.block_start) - cs.window_start;
        for (std::size_t i = 0; i < rs.block_len; ++i)
            for (std::size_t j = 0; j < cs.block_len; ++j)
                assembled(rs.block_start + i, cs.block_start + j) =
                    res.estimate(static_cast<Eigen::Index>(off_r + static_cast<long>(i)),
                                 static_cast<Eigen::Index>(off_c + static_cast<long>(j)));
        results[w] = std::move(res);
    };

    if (threads <= 1) {
        for (std::size_t w = 0; w < nb; ++w)
            run_one(w);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t w = t; w < nb; w += threads)
                    run_one(w);
            });
    }
    return results;
}

/// Local 3x3 (or k x k) empirical Wiener filter with replicated edges: each
/// sample moves toward the local mean by the factor max(var - noise, 0)/var.
inline Eigen::MatrixXd wiener_filter(const Eigen::MatrixXd& x, std::size_t k, double noise) {
    const Eigen::Index R = x.rows(), C = x.cols(), h = static_cast<Eigen::Index>(k / 2);
    Eigen::MatrixXd out(R, C);
    const double n = static_cast<double>(k * k);
    for (Eigen::Index i = 0; i < R; ++i) {
        for (Eigen::Index j = 0; j < C; ++j) {
            double s = 0.0, s2 = 0.0;
            for (Eigen::Index di = -h; di <= h; ++di) {
                const Eigen::Index ii = std::clamp<Eigen::Index>(i + di, 0, R - 1);
                for (Eigen::Index dj = -h; dj <= h; ++dj) {
                    const double v = x(ii, std::clamp<Eigen::Index>(j + dj, 0, C - 1));
                    s += v;
                    s2 += v * v;
                }
            }
            const double mean = s / n;
            const double var = std::max(s2 / n - mean * mean, 0.0);
            const double gain = var > 0.0 ? std::max(var - noise, 0.0) / var : 0.0;
            out(i, j) = mean + gain * (x(i, j) - mean);
        }
    }
    return out;
}

/// SPL iterations on one window: exact Landweber projection (step 1/4),
/// soft thresholding of the orthonormal 2-D DCT coefficients (DC kept),
/// local Wiener smoothing, until the relative change drops below tol.
/// A last projection makes the window consistent with its measurements.
class SplWindowSolver {
public:
    explicit SplWindowSolver(const SplConfig& cfg) : cfg_(cfg) {}

    WindowResult operator()(const WindowProblem& p) const {
        const Eigen::MatrixXd dr = dct_matrix(p.rows), dc = dct_matrix(p.cols);
        Eigen::MatrixXd x = p.init;
        WindowResult res;
        double lambda = cfg_.lambda0;
        for (std::size_t it = 0; it < cfg_.max_iters; ++it) {
            const Eigen::MatrixXd prev = x;
            if (cfg_.record_trace)
                res.trace.before.push_back(residual(p, x));
            project(p, x);
            if (cfg_.record_trace)
                res.trace.after.push_back(residual(p, x));

            Eigen::MatrixXd coef = dr * x * dc.transpose();
            const double dc_term = coef(0, 0);
            coef = coef.unaryExpr([lambda](double v) {
                return v > lambda ? v - lambda : (v < -lambda ? v + lambda : 0.0);
            });
            coef(0, 0) = dc_term;
            x = dr.transpose() * coef * dc;
            x = wiener_filter(x, cfg_.wiener, cfg_.wiener_noise);

            res.iterations = it + 1;
            lambda *= cfg_.decay;
            const double norm = prev.norm();
            if ((x - prev).norm() <= cfg_.tol * (norm > 0.0 ? norm : 1.0))
                break;
        }
        project(p, x);
        res.estimate = std::move(x);
        return res;
    }

    /// x += A^T (y - A x) / 4 on the window measurements.
    static void project(const WindowProblem& p, Eigen::MatrixXd& x) {
        for (std::size_t i = 0; i < p.supports.size(); ++i) {
            double a = 0.0;
            for (std::size_t q : p.supports[i])
                a += at(x, q, p.cols);
            const double upd = 0.25 * (p.values[i] - a);
            for (std::size_t q : p.supports[i])
                at(x, q, p.cols) += upd;
        }
    }

    static double residual(const WindowProblem& p, const Eigen::MatrixXd& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.supports.size(); ++i) {
            double a = 0.0;
            for (std::size_t q : p.supports[i])
                a += at(x, q, p.cols);
            s += (a - p.values[i]) * (a - p.values[i]);
        }
        return std::sqrt(s);
    }

private:
    static double& at(Eigen::MatrixXd& x, std::size_t q, std::size_t cols) {
        return x(static_cast<Eigen::Index>(q / cols), static_cast<Eigen::Index>(q % cols));
    }
    static double at(const Eigen::MatrixXd& x, std::size_t q, std::size_t cols) {
        return x(static_cast<Eigen::Index>(q / cols), static_cast<Eigen::Index>(q % cols));
    }

    SplConfig cfg_;
};

/// Full SPL reconstruction. Starts from A^T y / 4, runs the window solver on
/// every model window, applies one global projection to the assembled image
/// and clamps to [0,1] once at the end.
inline Reconstruction spl_reconstruct(const MeasurementOperator& op, const MeasurementVector& y,
                                      const SplConfig& cfg = {}) {
    cfg.validate();
    check_compatible(op, y);
    if (op.border() != BorderMode::periodic)
        throw PreconditionError("spl_reconstruct needs a periodic operator");

    Field f0 = apply_adjoint(op, y.values());
    for (double& v : f0.data)
        v *= 0.25;

    Field f;
    auto results = sliding_windows(op, f0, y, cfg.target, cfg.window, cfg.threads,
                                   SplWindowSolver(cfg), f);

    const auto af = apply(op, f);
    std::vector<double> r(af.size());
    for (std::size_t i = 0; i < af.size(); ++i)
        r[i] = 0.25 * (y[i] - af[i]);
    const Field corr = apply_adjoint(op, r);
    for (std::size_t p = 0; p < f.size(); ++p)
        f.data[p] += corr.data[p];

    Reconstruction rec;
    rec.method = Method::spl;
    rec.image = GrayImage::clamped(std::move(f));
    rec.residual = relative_residual(op, y, rec.image.field());
    for (auto& w : results) {
        rec.iterations_used = std::max(rec.iterations_used, w.iterations);
        if (cfg.record_trace)
            rec.trace.push_back(std::move(w.trace));
    }
    return rec;
}

} // namespace tetropix
