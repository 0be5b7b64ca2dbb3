// tetropix command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tetropix/tetropix.hpp"

namespace fs = std::filesystem;
using namespace tetropix;

namespace {

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
    const auto x = s.find('x');
    std::size_t m = 0, n = 0;
    try {
        if (x == std::string::npos)
            throw std::invalid_argument(s);
        std::size_t u1 = 0, u2 = 0;
        m = std::stoul(s.substr(0, x), &u1);
        n = std::stoul(s.substr(x + 1), &u2);
        if (u1 != x || u2 != s.size() - x - 1)
            throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw ParameterError("malformed size '" + s + "' (expected MxN)");
    }
    if (m == 0 || n == 0)
        throw ParameterError("size must be positive");
    return {m, n};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

void add_spl_options(CLI::App* cmd, SplConfig& cfg) {
    cmd->add_option("--target", cfg.target, "SPL target block side")->capture_default_str();
    cmd->add_option("--window", cfg.window, "SPL model window side")->capture_default_str();
    cmd->add_option("--wiener", cfg.wiener, "Wiener kernel side")->capture_default_str();
    cmd->add_option("--max-iters", cfg.max_iters, "SPL iteration limit")->capture_default_str();
    cmd->add_option("--tol", cfg.tol, "relative-change stopping threshold")->capture_default_str();
    cmd->add_option("--lambda0", cfg.lambda0, "initial soft threshold")->capture_default_str();
    cmd->add_option("--decay", cfg.decay, "threshold decay per iteration")->capture_default_str();
    cmd->add_option("--wiener-noise", cfg.wiener_noise, "Wiener noise floor")->capture_default_str();
}

/// Expands `--config FILE` into command-line flags. The file holds
/// `key=value` lines (`#` comments); a key names a long flag without its
/// dashes. Flags already given on the command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty())
        return out;
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    auto given = [&](const std::string& flag) {
        for (const auto& a : out)
            if (a == flag || a.rfind(flag + "=", 0) == 0)
                return true;
        return false;
    };
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty())
            throw FormatError(path + ":" + std::to_string(lineno) + ": empty key");
        const std::string flag = "--" + key;
        if (given(flag))
            continue;
        if (value == "true") {
            out.push_back(flag);
        } else if (value != "false") {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

/// Diagram of a layout: `repeat` x `repeat` cells, each pixel drawn as a
/// scale x scale square shaded by group index, group boundaries in black.
GrayImage render_layout(const SensorLayout& layout, std::size_t repeat, std::size_t scale) {
    const std::size_t k = static_cast<std::size_t>(layout.cell()), side = k * repeat;
    const auto op = build_operator(layout, side, side);
    const std::size_t groups = layout.group_count();
    auto group_of = [&](std::size_t r, std::size_t c) {
        return op.owner((r % side) * side + (c % side));
    };
    Field f(side * scale, side * scale);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            const std::size_t g = group_of(r, c);
            const double shade = 0.35 + 0.6 * static_cast<double>((g % groups) * 7 % groups) /
                                            static_cast<double>(std::max<std::size_t>(groups - 1, 1));
            const bool right = group_of(r, c + 1) != g, below = group_of(r + 1, c) != g;
            for (std::size_t i = 0; i < scale; ++i)
                for (std::size_t j = 0; j < scale; ++j) {
                    const bool edge = (right && j == scale - 1) || (below && i == scale - 1) ||
                                      (r == 0 && i == 0) || (c == 0 && j == 0);
                    f(r * scale + i, c * scale + j) = edge ? 0.0 : shade;
                }
        }
    return GrayImage::clamped(std::move(f));
}

int cmd_layout_validate(const std::string& what) {
    SensorLayout layout;
    if (auto b = builtin_layout(what)) {
        layout = *b;
    } else {
        std::ifstream in(what);
        if (!in)
            throw IoError("cannot open layout '" + what + "'");
        layout = parse_layout(in, fs::path(what).stem().string());
    }
    const auto rep = validate_layout(layout);
    std::cout << rep.summary();
    if (!rep.ok()) {
        std::cerr << "layout invalid";
        if (rep.first_bad_cell)
            std::cerr << " at cell " << cell_str(*rep.first_bad_cell);
        std::cerr << '\n';
        return 1;
    }
    std::cout << "valid\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tetromino sensor simulation, coherence analysis and reconstruction", "tetropix"};
    app.footer("Any long flag may also come from --config FILE (key=value lines).");
    app.require_subcommand(1);
    int status = 0;

    // layout
    auto* layout_cmd = app.add_subcommand("layout", "Validate, generate or draw sensor layouts");
    layout_cmd->require_subcommand(1);

    std::string validate_target;
    auto* validate_cmd = layout_cmd->add_subcommand("validate", "Check a layout file or built-in id");
    validate_cmd->add_option("layout", validate_target, "layout file or built-in id")->required();

    int gen_cell = 8;
    std::uint64_t gen_seed = 1, gen_tries = geared8x8_tries;
    std::string gen_out;
    auto* gen_cmd = layout_cmd->add_subcommand("gen", "Generate a geared T-tetromino layout");
    gen_cmd->add_option("--cell", gen_cell, "cell size (4 or 8)")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    gen_cmd->add_option("--max-tries", gen_tries, "random graph budget")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "output layout file (stdout when omitted)");

    std::string show_target, show_out;
    std::size_t show_repeat = 2, show_scale = 16;
    auto* show_cmd = layout_cmd->add_subcommand("show", "Render a layout diagram to PNG");
    show_cmd->add_option("layout", show_target, "layout file or built-in id")->required();
    show_cmd->add_option("--out", show_out, "output PNG");
    show_cmd->add_option("--repeat", show_repeat, "cells per side")->capture_default_str();
    show_cmd->add_option("--scale", show_scale, "PNG pixels per sensor pixel")->capture_default_str();
    show_cmd->add_flag("--print", "also print the layout file text");

    // coherence
    std::string coh_layout = "t4x4", coh_size = "30x30", coh_transform = "dft", coh_border = "crop";
    bool coh_header = false;
    auto* coh_cmd = app.add_subcommand("coherence", "Print the coherence report as a CSV row");
    coh_cmd->add_option("--layout", coh_layout, "layout file or built-in id")->capture_default_str();
    coh_cmd->add_option("--size", coh_size, "image size MxN")->capture_default_str();
    coh_cmd->add_option("--transform", coh_transform, "dft, dct or identity")->capture_default_str();
    coh_cmd->add_option("--border", coh_border, "periodic or crop")->capture_default_str();
    coh_cmd->add_flag("--header", coh_header, "print the CSV header first");

    // run
    std::string run_image, run_layout = "t4x4", run_method = "spl", run_out = ".";
    std::size_t run_border = 16;
    SplConfig run_cfg;
    auto* run_cmd = app.add_subcommand("run", "Simulate acquisition and reconstruct one image");
    run_cmd->add_option("--image", run_image, "input PNG or PGM")->required();
    run_cmd->add_option("--layout", run_layout, "layout file or built-in id")->capture_default_str();
    run_cmd->add_option("--method", run_method, "bicubic or spl")->capture_default_str();
    run_cmd->add_option("--out", run_out, "output directory")->capture_default_str();
    run_cmd->add_option("--border", run_border, "metric border")->capture_default_str();
    add_spl_options(run_cmd, run_cfg);

    // evaluate
    std::string ev_dataset, ev_layouts = "t4x4,geared8x8,galdo6x6", ev_methods = "spl", ev_out;
    EvaluateOptions ev_opt;
    auto* ev_cmd = app.add_subcommand("evaluate", "Evaluate layouts and methods over an image directory");
    ev_cmd->add_option("--dataset", ev_dataset, "directory of PNG/PGM images")->required();
    ev_cmd->add_option("--layouts", ev_layouts, "comma-separated layouts")->capture_default_str();
    ev_cmd->add_option("--methods", ev_methods, "comma-separated methods")->capture_default_str();
    ev_cmd->add_option("--out", ev_out, "output CSV (stdout when omitted)");
    ev_cmd->add_option("--crop", ev_opt.crop, "top-left crop side, 0 for none")->capture_default_str();
    ev_cmd->add_option("--border", ev_opt.border, "metric border")->capture_default_str();
    ev_cmd->add_option("--threads", ev_opt.threads, "worker threads")->capture_default_str();
    add_spl_options(ev_cmd, ev_opt.spl);

    // chart
    std::string chart_kind = "fine-lines", chart_size = "128x128", chart_out;
    ChartSpec chart_spec;
    auto* chart_cmd = app.add_subcommand("chart", "Write a synthetic resolution chart");
    chart_cmd->add_option("--kind", chart_kind, "fine-lines, diagonal-stripes, zone-plate or constant")
        ->capture_default_str();
    chart_cmd->add_option("--period", chart_spec.period, "period in pixels")->capture_default_str();
    chart_cmd->add_option("--orientation", chart_spec.orientation, "degrees")->capture_default_str();
    chart_cmd->add_option("--contrast", chart_spec.contrast, "in (0,1]")->capture_default_str();
    chart_cmd->add_option("--size", chart_size, "MxN")->capture_default_str();
    chart_cmd->add_option("--out", chart_out, "output PNG")->required();

    std::vector<std::string> args;
    try {
        args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (validate_cmd->parsed()) {
            status = cmd_layout_validate(validate_target);
        } else if (gen_cmd->parsed()) {
            const auto layout = generate_geared(gen_cell, gen_seed, gen_tries);
            const auto rep = validate_layout(layout);
            if (!rep.ok())
                throw ValidationError("generated layout failed validation: " + rep.failures.front());
            if (gen_out.empty()) {
                std::cout << format_layout(layout);
            } else {
                save_layout(layout, gen_out);
                std::cerr << "wrote " << gen_out << '\n';
            }
        } else if (show_cmd->parsed()) {
            const auto layout = resolve_layout(show_target);
            if (show_repeat == 0 || show_scale == 0)
                throw ParameterError("--repeat and --scale must be positive");
            const bool print = show_cmd->count("--print") > 0;
            if (show_out.empty() && !print)
                throw ParameterError("layout show: give --out, --print or both");
            if (!show_out.empty())
                save_png(render_layout(layout, show_repeat, show_scale), show_out);
            if (print)
                std::cout << format_layout(layout);
        } else if (coh_cmd->parsed()) {
            const auto [m, n] = parse_size(coh_size);
            const auto layout = resolve_layout(coh_layout);
            const auto op = build_operator(layout, m, n, parse_border_mode(coh_border));
            const auto rep = coherence(op, parse_transform_kind(coh_transform));
            if (coh_header)
                std::cout << coherence_csv_header() << '\n';
            std::cout << coherence_csv_row(rep) << '\n';
        } else if (run_cmd->parsed()) {
            const auto layout = resolve_layout(run_layout);
            const auto& solver = find_solver(run_method);
            if (!solver_supports(solver, layout.shape()))
                throw UnsupportedError("method '" + solver.id + "' does not support layout '" +
                                       layout.id() + "' (" + solver.layouts + ")");
            run_cfg.validate();
            const auto img = crop_divisible(load_image(run_image),
                                            std::lcm<std::size_t>(2, static_cast<std::size_t>(layout.cell())));
            const std::string stem = fs::path(run_image).stem().string();
            const auto res = run_pipeline(img, layout, solver.method, run_cfg, run_border, stem);
            fs::create_directories(run_out);
            const std::string base = stem + "_" + res.layout_id + "_" + solver.id;
            save_png(res.reconstruction.image, fs::path(run_out) / (base + ".png"));
            save_measurements(res.measurements, fs::path(run_out) / (base + ".meas"));
            std::ofstream csv(fs::path(run_out) / (base + ".csv"));
            csv << results_csv_header() << '\n' << results_csv_row(to_row(res)) << '\n';
            if (!csv)
                throw IoError("cannot write CSV in '" + run_out + "'");
            std::cout << results_csv_header() << '\n' << results_csv_row(to_row(res)) << '\n';
        } else if (ev_cmd->parsed()) {
            ev_opt.layouts = split_list(ev_layouts);
            ev_opt.methods = split_list(ev_methods);
            ev_opt.spl.validate();
            const auto rows = evaluate_dataset(ev_dataset, ev_opt);
            if (ev_out.empty()) {
                write_results_csv(rows, std::cout);
            } else {
                std::ofstream out(ev_out);
                write_results_csv(rows, out);
                if (!out)
                    throw IoError("cannot write '" + ev_out + "'");
                for (const auto& r : rows)
                    if (r.is_mean)
                        std::cout << results_csv_row(r) << '\n';
            }
        } else if (chart_cmd->parsed()) {
            chart_spec.kind = parse_chart_kind(chart_kind);
            const auto [m, n] = parse_size(chart_size);
            save_png(make_chart(chart_spec, m, n), chart_out);
        }
    } catch (const SearchFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return status;
}
