#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "msfs/image.hpp"

namespace msfs {

/// Forward-difference gradient of an image. Same dimensions as the source;
/// the last column of gx and the last row of gy are zero.
struct GradientPair {
    Image gx;
    Image gy;
};

/// Normalized 1-D Gaussian kernel truncated at radius ceil(3*sigma).
/// Renormalization restores exact constant preservation after truncation.
inline std::vector<double> gaussian_kernel_1d(double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_kernel_1d: sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable Gaussian blur with replicate boundary handling.
/// Horizontal pass then vertical pass; output dimensions unchanged.
inline Image gaussian_blur(const Image& img, double sigma) {
    const std::vector<double> kernel = gaussian_kernel_1d(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width();
    const int h = img.height();

    Image tmp(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                const int cc = std::clamp(c + t, 0, w - 1);
                acc += kernel[t + radius] * img(r, cc);
            }
            tmp(r, c) = acc;
        }
    }
    Image out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                const int rr = std::clamp(r + t, 0, h - 1);
                acc += kernel[t + radius] * tmp(rr, c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

/// gx[r,c] = img[r,c+1] - img[r,c] for c < width-1, else 0; gy analogous.
inline GradientPair gradient(const Image& img) {
    const int w = img.width();
    const int h = img.height();
    GradientPair g{Image(w, h), Image(w, h)};
    for (int r = 0; r < h; ++r)
        for (int c = 0; c + 1 < w; ++c)
            g.gx(r, c) = img(r, c + 1) - img(r, c);
    for (int r = 0; r + 1 < h; ++r)
        for (int c = 0; c < w; ++c)
            g.gy(r, c) = img(r + 1, c) - img(r, c);
    return g;
}

/// Exact adjoint of gradient(): <gradient(u), v> == <u, gradient_adjoint(v)>
/// for all u, v. Entries of gx in the last column and gy in the last row are
/// structurally unused, mirroring the zeros gradient() puts there.
inline Image gradient_adjoint(const GradientPair& g) {
    require_same_size(g.gx, g.gy, "gradient_adjoint");
    const int w = g.gx.width();
    const int h = g.gx.height();
    Image out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double v = 0.0;
            if (c >= 1) v += g.gx(r, c - 1);
            if (c <= w - 2) v -= g.gx(r, c);
            if (r >= 1) v += g.gy(r - 1, c);
            if (r <= h - 2) v -= g.gy(r, c);
            out(r, c) = v;
        }
    }
    return out;
}

/// gradient_adjoint(gradient(u)) -- the discrete "div grad" the smoothness
/// term differentiates to.
inline Image grad_adjoint_grad(const Image& img) {
    return gradient_adjoint(gradient(img));
}

inline Image hadamard(const Image& a, const Image& b) {
    require_same_size(a, b, "hadamard");
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline Image add(const Image& a, const Image& b) {
    require_same_size(a, b, "add");
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Image sub(const Image& a, const Image& b) {
    require_same_size(a, b, "sub");
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Image scale(const Image& a, double s) {
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

inline double dot(const Image& a, const Image& b) {
    require_same_size(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double sum_squares(const Image& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
    return acc;
}

inline Image clamp01(const Image& a) {
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::clamp(a[i], 0.0, 1.0);
    return out;
}

} // namespace msfs
