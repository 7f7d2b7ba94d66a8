#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msfs/image.hpp"

namespace msfs {

/// Quantize a normalized intensity to 16 bits. This is the only place the
/// pipeline leaves continuous values.
inline std::uint16_t quantize16(double v) {
    const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
}

/// Image as big-endian 16-bit binary PGM (P5, maxval 65535).
inline std::vector<std::uint8_t> encode_pgm16(const Image& img) {
    std::string header = "P5\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n65535\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + img.size() * 2);
    for (std::size_t p = 0; p < img.size(); ++p) {
        const std::uint16_t q = quantize16(img[p]);
        bytes.push_back(static_cast<std::uint8_t>(q >> 8));
        bytes.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
    return bytes;
}

inline void write_pgm16(const std::filesystem::path& path, const Image& img) {
    const std::vector<std::uint8_t> bytes = encode_pgm16(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace detail {

inline int next_pgm_token(std::istream& in, const std::string& path) {
    int ch = in.get();
    while (ch != EOF && (std::isspace(ch) || ch == '#')) {
        if (ch == '#')
            while (ch != EOF && ch != '\n') ch = in.get();
        ch = in.get();
    }
    if (ch == EOF) throw std::runtime_error("truncated PGM header: " + path);
    int value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        ch = in.get();
    }
    return value;
}

} // namespace detail

/// Read a binary PGM (8- or 16-bit), normalizing samples to [0,1] by maxval.
inline Image read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error("not a binary PGM (P5): " + path.string());
    const int width = detail::next_pgm_token(in, path.string());
    const int height = detail::next_pgm_token(in, path.string());
    const int maxval = detail::next_pgm_token(in, path.string());
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("bad PGM header: " + path.string());

    const std::size_t count = static_cast<std::size_t>(width) * height;
    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> raw(count * bytes_per_sample);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("truncated PGM data: " + path.string());

    Image img(width, height);
    const double inv = 1.0 / maxval;
    if (bytes_per_sample == 2) {
        for (std::size_t p = 0; p < count; ++p)
            img[p] = ((raw[2 * p] << 8) | raw[2 * p + 1]) * inv;
    } else {
        for (std::size_t p = 0; p < count; ++p) img[p] = raw[p] * inv;
    }
    return img;
}

} // namespace msfs
