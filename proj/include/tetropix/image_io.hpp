#pragma once

// Raster I/O: 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) and binary
// PGM (P5). Output is always 8-bit grayscale PNG. Link against libpng.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace tetropix {

/// ITU-R BT.601 luma of an RGB triple, in the units of the inputs. Integer
/// weights keep gray input (r == g == b) exact.
inline double bt601_luma(double r, double g, double b) {
    return (299.0 * r + 587.0 * g + 114.0 * b) / 1000.0;
}

inline std::uint8_t quantize8(double s) {
    return static_cast<std::uint8_t>(std::clamp(std::round(s * 255.0), 0.0, 255.0));
}

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("error while reading '" + path.string() + "'");
    return bytes;
}

inline GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw FormatError("'" + name + "': " + img.message);
    if (img.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&img);
        throw FormatError("'" + name + "': 16-bit PNG is not supported");
    }
    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw FormatError("'" + name + "': " + msg);
    }
    Field f(img.height, img.width);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (color)
            f.data[i] = bt601_luma(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]) / 255.0;
        else
            f.data[i] = buf[i] / 255.0;
    }
    return GrayImage::clamped(std::move(f));
}

inline GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos]))
                ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw FormatError("'" + name + "': malformed PGM header");
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > (1L << 24))
                throw FormatError("'" + name + "': PGM header value too large");
        }
        return v;
    };
    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width <= 0 || height <= 0)
        throw FormatError("'" + name + "': empty PGM");
    if (maxval <= 0 || maxval > 255)
        throw FormatError("'" + name + "': only 8-bit PGM is supported");
    ++pos; // single whitespace before the raster
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() < pos + n)
        throw FormatError("'" + name + "': truncated PGM raster");
    Field f(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
    for (std::size_t i = 0; i < n; ++i)
        f.data[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
    return GrayImage::clamped(std::move(f));
}

} // namespace detail

/// Loads a PNG or binary PGM file. Samples are scaled to [0,1]; color input
/// is reduced to BT.601 luma.
inline GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(png_sig, png_sig + 8, bytes.begin()))
        return detail::decode_png(bytes, path.string());
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        return detail::decode_pgm(bytes, path.string());
    throw FormatError("'" + path.string() + "': unsupported raster format (expected PNG or P5 PGM)");
}

/// Writes an 8-bit grayscale PNG, quantizing with round(s*255).
inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
    if (img.empty())
        throw DimensionError("save_png: empty image");
    std::vector<unsigned char> buf(img.size());
    const auto s = img.samples();
    std::transform(s.begin(), s.end(), buf.begin(), quantize8);

    png_image out;
    std::memset(&out, 0, sizeof out);
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(img.cols());
    out.height = static_cast<png_uint_32>(img.rows());
    out.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&out, path.string().c_str(), 0, buf.data(), 0, nullptr))
        throw IoError("cannot write '" + path.string() + "': " + out.message);
}

/// Writes a binary PGM (P5), maxval 255.
inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
    for (double s : img.samples())
        out.put(static_cast<char>(quantize8(s)));
    if (!out)
        throw IoError("error while writing '" + path.string() + "'");
}

} // namespace tetropix
