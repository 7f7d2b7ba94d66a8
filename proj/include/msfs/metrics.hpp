#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "msfs/image.hpp"
#include "msfs/imgops.hpp"
#include "msfs/stack.hpp"

namespace msfs {

/// Peak signal-to-noise ratio in dB for normalized intensities (MAX = 1).
/// Identical images give +infinity.
inline double psnr(const Image& reference, const Image& test) {
    require_same_size(reference, test, "psnr");
    double sum = 0.0;
    for (std::size_t p = 0; p < reference.size(); ++p) {
        const double d = reference[p] - test[p];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

/// Mean structural similarity with the stock 11x11 Gaussian window
/// (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1), replicate boundary.
/// gaussian_blur at sigma 1.5 truncates at radius 5, which is exactly the
/// 11-tap window, so the local moments reuse it.
inline double ssim(const Image& reference, const Image& test) {
    require_same_size(reference, test, "ssim");
    if (reference.width() < 11 || reference.height() < 11)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    constexpr double window_sigma = 1.5;
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;

    const Image mu_x = gaussian_blur(reference, window_sigma);
    const Image mu_y = gaussian_blur(test, window_sigma);
    const Image xx = gaussian_blur(hadamard(reference, reference), window_sigma);
    const Image yy = gaussian_blur(hadamard(test, test), window_sigma);
    const Image xy = gaussian_blur(hadamard(reference, test), window_sigma);

    double total = 0.0;
    for (std::size_t p = 0; p < reference.size(); ++p) {
        const double mx = mu_x[p], my = mu_y[p];
        const double var_x = xx[p] - mx * mx;
        const double var_y = yy[p] - my * my;
        const double cov = xy[p] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                 ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    return total / static_cast<double>(reference.size());
}

/// Per-cell PSNR/SSIM grids for a reconstructed stack against ground truth.
struct EvalTable {
    std::vector<double> depth_schedule;
    std::vector<double> wavelength_schedule;
    std::vector<double> psnr_db; // depth-major N*M grid, +inf for identical cells
    std::vector<double> ssim_val;

    int depths() const { return static_cast<int>(depth_schedule.size()); }
    int wavelengths() const { return static_cast<int>(wavelength_schedule.size()); }

    double psnr_at(int depth, int wavelength) const {
        return psnr_db[static_cast<std::size_t>(depth) * wavelengths() + wavelength];
    }
    double ssim_at(int depth, int wavelength) const {
        return ssim_val[static_cast<std::size_t>(depth) * wavelengths() + wavelength];
    }

    double row_mean_psnr(int depth) const {
        double s = 0.0;
        for (int i = 0; i < wavelengths(); ++i) s += psnr_at(depth, i);
        return s / wavelengths();
    }
    double row_mean_ssim(int depth) const {
        double s = 0.0;
        for (int i = 0; i < wavelengths(); ++i) s += ssim_at(depth, i);
        return s / wavelengths();
    }
    double mean_psnr() const {
        double s = 0.0;
        for (double v : psnr_db) s += v;
        return s / psnr_db.size();
    }
    double mean_ssim() const {
        double s = 0.0;
        for (double v : ssim_val) s += v;
        return s / ssim_val.size();
    }

    /// Averages over cells whose wavelength index differs from the depth
    /// index -- the cells the reconstruction actually had to synthesize.
    double mean_psnr_off_diagonal() const {
        double s = 0.0;
        int count = 0;
        for (int k = 0; k < depths(); ++k)
            for (int i = 0; i < wavelengths(); ++i)
                if (i != k) {
                    s += psnr_at(k, i);
                    ++count;
                }
        return count ? s / count : 0.0;
    }
    double mean_ssim_off_diagonal() const {
        double s = 0.0;
        int count = 0;
        for (int k = 0; k < depths(); ++k)
            for (int i = 0; i < wavelengths(); ++i)
                if (i != k) {
                    s += ssim_at(k, i);
                    ++count;
                }
        return count ? s / count : 0.0;
    }
};

/// Cell-by-cell quality of recon against gt. Schedules must match exactly.
inline EvalTable evaluate_stack(const MultispectralFocalStack& gt,
                                const MultispectralFocalStack& recon) {
    if (gt.depths() != recon.depths() || gt.wavelengths() != recon.wavelengths() ||
        gt.width() != recon.width() || gt.height() != recon.height())
        throw std::invalid_argument("evaluate_stack: stack shape mismatch");
    if (gt.depth_schedule() != recon.depth_schedule() ||
        gt.wavelength_schedule() != recon.wavelength_schedule())
        throw std::invalid_argument("evaluate_stack: schedule mismatch");

    EvalTable table;
    table.depth_schedule = gt.depth_schedule();
    table.wavelength_schedule = gt.wavelength_schedule();
    table.psnr_db.reserve(static_cast<std::size_t>(gt.depths()) * gt.wavelengths());
    table.ssim_val.reserve(table.psnr_db.capacity());
    for (int k = 0; k < gt.depths(); ++k) {
        for (int i = 0; i < gt.wavelengths(); ++i) {
            table.psnr_db.push_back(psnr(gt.cell(k, i), recon.cell(k, i)));
            table.ssim_val.push_back(ssim(gt.cell(k, i), recon.cell(k, i)));
        }
    }
    return table;
}

/// Infinite PSNR renders as the literal token "Inf"; finite values use two
/// decimals, SSIM four.
inline std::string format_psnr(double value) {
    if (std::isinf(value)) return "Inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

inline std::string format_ssim(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

/// CSV report: one row per cell, header
/// `depth_index,wavelength_nm,psnr_db,ssim`.
inline std::string to_csv(const EvalTable& table) {
    std::string out = "depth_index,wavelength_nm,psnr_db,ssim\n";
    char buf[64];
    for (int k = 0; k < table.depths(); ++k) {
        for (int i = 0; i < table.wavelengths(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%.6g,", k, table.wavelength_schedule[i]);
            out += buf;
            out += format_psnr(table.psnr_at(k, i));
            out += ',';
            out += format_ssim(table.ssim_at(k, i));
            out += '\n';
        }
    }
    return out;
}

} // namespace msfs
