#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace msfs {

/// Grayscale image with row-major double pixels, nominal range [0,1].
/// File I/O quantizes to 16 bits at the boundary; everything in between
/// stays continuous so the optimizer never sees quantization steps.
class Image {
public:
    Image() = default;

    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Image(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
        if (data_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("Image: data length != width*height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }

    double& operator()(int row, int col) {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    double operator()(int row, int col) const {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_size(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Index of the first non-finite pixel, or npos if all values are finite.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t find_non_finite() const {
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (!std::isfinite(data_[i])) return i;
        return npos;
    }
    bool all_finite() const { return find_non_finite() == npos; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

inline void require_same_size(const Image& a, const Image& b, const char* what) {
    if (!a.same_size(b))
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
}

} // namespace msfs
