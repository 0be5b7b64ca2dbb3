#pragma once

// Simulation pipeline: crop -> measure -> reconstruct -> metrics, for single
// images and for corpora.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "icegraph.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "layout.hpp"
#include "metrics.hpp"
#include "sensing.hpp"
#include "solvers.hpp"

namespace tetropix {

struct RunResult {
    std::string image_id;
    std::string layout_id;
    Method method = Method::spl;
    GrayImage reference;
    MeasurementVector measurements;
    Reconstruction reconstruction;
    MetricReport metrics;
    double seconds = 0.0;
};

/// Runs one acquisition and reconstruction. The image must already be
/// cropped to a size the layout divides.
inline RunResult run_pipeline(const GrayImage& img, const SensorLayout& layout, Method method,
                              const SplConfig& cfg = {}, std::size_t border = 16,
                              std::string image_id = {}) {
    const auto op = build_operator(layout, img.rows(), img.cols());
    check_supported(find_solver(method), op);
    RunResult res;
    res.image_id = std::move(image_id);
    res.layout_id = op.layout_id();
    res.method = method;
    res.reference = img;
    res.measurements = measure(op, img);
    const auto t0 = std::chrono::steady_clock::now();
    res.reconstruction = reconstruct(method, op, res.measurements, cfg);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.metrics = evaluate_metrics(img, res.reconstruction.image, border);
    return res;
}

// ---------------------------------------------------------------------------
// Result table

struct ResultRow {
    std::string image_id;
    std::string layout;
    std::string method;
    PsnrValue psnr = PsnrValue::infinite();
    double ssim = 0.0;
    double iterations = 0.0;
    double residual = 0.0;
    double seconds = 0.0;
    bool is_mean = false;
};

inline ResultRow to_row(const RunResult& r) {
    ResultRow row;
    row.image_id = r.image_id;
    row.layout = r.layout_id;
    row.method = to_string(r.method);
    row.psnr = r.metrics.psnr;
    row.ssim = r.metrics.ssim;
    row.iterations = static_cast<double>(r.reconstruction.iterations_used);
    row.residual = r.reconstruction.residual;
    row.seconds = r.seconds;
    return row;
}

/// Arithmetic mean of per-image rows; PSNR is infinite if any input is.
inline ResultRow mean_row(const std::vector<ResultRow>& rows) {
    if (rows.empty())
        throw PreconditionError("mean_row: no rows");
    ResultRow m;
    m.image_id = "mean";
    m.layout = rows.front().layout;
    m.method = rows.front().method;
    m.is_mean = true;
    double psnr_sum = 0.0;
    bool inf = false;
    for (const auto& r : rows) {
        if (r.psnr.is_infinite())
            inf = true;
        else
            psnr_sum += r.psnr.db();
        m.ssim += r.ssim;
        m.iterations += r.iterations;
        m.residual += r.residual;
        m.seconds += r.seconds;
    }
    const double n = static_cast<double>(rows.size());
    m.psnr = inf ? PsnrValue::infinite() : PsnrValue::finite(psnr_sum / n);
    m.ssim /= n;
    m.iterations /= n;
    m.residual /= n;
    m.seconds /= n;
    return m;
}

inline const char* results_csv_header() {
    return "image_id,layout,method,psnr_db,ssim,iterations,residual,seconds";
}

inline std::string results_csv_row(const ResultRow& r) {
    char buf[512];
    if (r.is_mean)
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%.6f,%.6f,%.6f,%.6f", r.image_id.c_str(),
                      r.layout.c_str(), r.method.c_str(), r.psnr.str().c_str(), r.ssim, r.iterations,
                      r.residual, r.seconds);
    else
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%.6f,%.0f,%.6f,%.6f", r.image_id.c_str(),
                      r.layout.c_str(), r.method.c_str(), r.psnr.str().c_str(), r.ssim, r.iterations,
                      r.residual, r.seconds);
    return buf;
}

// ---------------------------------------------------------------------------
// Corpus evaluation

struct EvaluateOptions {
    std::vector<std::string> layouts;
    std::vector<std::string> methods;
    std::size_t crop = 256; // top-left crop side; 0 keeps the full image
    std::size_t border = 16;
    std::size_t threads = 1;
    SplConfig spl;
};

/// Raster files (.png, .pgm) of a directory in lexicographic order.
inline std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("dataset directory '" + dir.string() + "' does not exist");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".pgm")
            files.push_back(e.path());
    }
    if (files.empty())
        throw IoError("dataset directory '" + dir.string() + "' contains no PNG or PGM images");
    std::sort(files.begin(), files.end());
    return files;
}

/// Side length every layout divides (and 2 for the square pipeline).
inline std::size_t common_cell(const std::vector<SensorLayout>& layouts) {
    std::size_t l = 2;
    for (const auto& s : layouts)
        l = std::lcm(l, static_cast<std::size_t>(s.cell()));
    return l;
}

/// Prepares a corpus image: optional top-left crop, then crop to a multiple
/// of `cell` so every layout sees the same region.
inline GrayImage prepare_image(const GrayImage& img, std::size_t crop_side, std::size_t cell) {
    GrayImage out = img;
    if (crop_side > 0 && (img.rows() > crop_side || img.cols() > crop_side))
        out = crop(img, 0, 0, std::min(crop_side, img.rows()), std::min(crop_side, img.cols()));
    return crop_divisible(out, cell);
}

/// Rows for the cross product layouts x methods x images, grouped by
/// (layout, method), each group followed by its mean row.
inline std::vector<ResultRow> evaluate_dataset(const std::filesystem::path& dir,
                                               const EvaluateOptions& opt) {
    if (opt.layouts.empty() || opt.methods.empty())
        throw ParameterError("evaluate: need at least one layout and one method");
    const auto files = list_dataset(dir);
    std::vector<SensorLayout> layouts;
    for (const auto& id : opt.layouts)
        layouts.push_back(resolve_layout(id));
    std::vector<Method> methods;
    for (const auto& id : opt.methods)
        methods.push_back(find_solver(id).method);
    for (const auto& l : layouts)
        for (Method m : methods)
            if (!solver_supports(find_solver(m), l.shape()))
                throw UnsupportedError("method '" + to_string(m) + "' does not support layout '" +
                                       l.id() + "'");

    const std::size_t cell = common_cell(layouts);
    std::vector<GrayImage> images;
    std::vector<std::string> ids;
    for (const auto& f : files) {
        images.push_back(prepare_image(load_image(f), opt.crop, cell));
        ids.push_back(f.stem().string());
    }

    struct Job {
        std::size_t layout, method, image;
    };
    std::vector<Job> jobs;
    for (std::size_t l = 0; l < layouts.size(); ++l)
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (std::size_t i = 0; i < images.size(); ++i)
                jobs.push_back({l, m, i});
    std::vector<ResultRow> done(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    auto work = [&](std::size_t j) {
        try {
            const auto& jb = jobs[j];
            done[j] = to_row(run_pipeline(images[jb.image], layouts[jb.layout], methods[jb.method],
                                          opt.spl, opt.border, ids[jb.image]));
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };
    if (opt.threads <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j)
            work(j);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < opt.threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t j = t; j < jobs.size(); j += opt.threads)
                    work(j);
            });
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::vector<ResultRow> out;
    const std::size_t n = images.size();
    for (std::size_t g = 0; g < jobs.size(); g += n) {
        std::vector<ResultRow> group(done.begin() + static_cast<long>(g),
                                     done.begin() + static_cast<long>(g + n));
        out.insert(out.end(), group.begin(), group.end());
        out.push_back(mean_row(group));
    }
    return out;
}

inline void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << results_csv_header() << '\n';
    for (const auto& r : rows)
        out << results_csv_row(r) << '\n';
}

} // namespace tetropix
