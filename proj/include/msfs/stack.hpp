#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msfs/image.hpp"

namespace msfs {

/// Outcome of stack validation: success, or the first violated invariant
/// with enough location detail to find it.
struct ValidationResult {
    bool ok = true;
    std::string error;

    static ValidationResult success() { return {}; }
    static ValidationResult failure(std::string msg) { return {false, std::move(msg)}; }
    explicit operator bool() const { return ok; }
};

/// One captured slice: the scene focused at depth_schedule[depth_index],
/// recorded in the spectral band centered at wavelength_nm.
struct CapturedSlice {
    int depth_index = 0;
    double wavelength_nm = 0.0;
    Image image;
};

namespace detail {

inline ValidationResult check_image_finite(const Image& img, const std::string& where) {
    const std::size_t bad = img.find_non_finite();
    if (bad == Image::npos) return ValidationResult::success();
    const int r = static_cast<int>(bad / img.width());
    const int c = static_cast<int>(bad % img.width());
    return ValidationResult::failure(where + ": non-finite pixel at (" + std::to_string(r) +
                                     ", " + std::to_string(c) + ")");
}

} // namespace detail

/// Raw-parts validator for a spectral-varying stack. Reports the first
/// violated invariant; constructors call this and throw on failure.
inline ValidationResult validate_spectral_varying(const std::vector<CapturedSlice>& slices,
                                                  const std::vector<double>& depth_schedule,
                                                  const std::vector<double>& wavelength_schedule) {
    const std::size_t n = slices.size();
    if (n == 0)
        return ValidationResult::failure("spectral-varying stack: no slices");
    if (depth_schedule.size() != n)
        return ValidationResult::failure("spectral-varying stack: depth_schedule length " +
                                         std::to_string(depth_schedule.size()) + " != slice count " +
                                         std::to_string(n));
    if (wavelength_schedule.size() != n)
        return ValidationResult::failure("spectral-varying stack: wavelength_schedule length " +
                                         std::to_string(wavelength_schedule.size()) +
                                         " != slice count " + std::to_string(n));
    for (std::size_t k = 1; k < n; ++k)
        if (!(wavelength_schedule[k] > wavelength_schedule[k - 1]))
            return ValidationResult::failure(
                "spectral-varying stack: wavelength_schedule not strictly increasing at index " +
                std::to_string(k));

    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const CapturedSlice& s = slices[k];
        if (s.image.empty())
            return ValidationResult::failure("slice " + std::to_string(k) + ": empty image");
        if (!s.image.same_size(slices[0].image))
            return ValidationResult::failure("slice " + std::to_string(k) +
                                             ": dimension mismatch with slice 0");
        if (s.depth_index < 0 || static_cast<std::size_t>(s.depth_index) >= n)
            return ValidationResult::failure("slice " + std::to_string(k) +
                                             ": depth_index out of range: " +
                                             std::to_string(s.depth_index));
        if (seen[s.depth_index])
            return ValidationResult::failure("duplicate depth_index " +
                                             std::to_string(s.depth_index) + " at slice " +
                                             std::to_string(k));
        seen[s.depth_index] = true;
        if (s.wavelength_nm != wavelength_schedule[k])
            return ValidationResult::failure("slice " + std::to_string(k) +
                                             ": wavelength_nm does not match schedule entry");
        ValidationResult fin = detail::check_image_finite(s.image, "slice " + std::to_string(k));
        if (!fin) return fin;
    }
    return ValidationResult::success();
}

/// The camera output: N slices, one spectral channel per focus depth.
/// Immutable after construction; construction validates every invariant.
class SpectralVaryingStack {
public:
    SpectralVaryingStack(std::vector<CapturedSlice> slices,
                         std::vector<double> depth_schedule,
                         std::vector<double> wavelength_schedule)
        : slices_(std::move(slices)),
          depth_schedule_(std::move(depth_schedule)),
          wavelength_schedule_(std::move(wavelength_schedule)) {
        ValidationResult r = validate_spectral_varying(slices_, depth_schedule_, wavelength_schedule_);
        if (!r) throw std::invalid_argument(r.error);
    }

    int count() const { return static_cast<int>(slices_.size()); }
    int width() const { return slices_[0].image.width(); }
    int height() const { return slices_[0].image.height(); }

    const CapturedSlice& slice(int k) const { return slices_.at(k); }
    const std::vector<CapturedSlice>& slices() const { return slices_; }

    /// List position of the slice focused at depth index d.
    int position_of_depth(int d) const {
        for (std::size_t k = 0; k < slices_.size(); ++k)
            if (slices_[k].depth_index == d) return static_cast<int>(k);
        throw std::out_of_range("no slice with depth_index " + std::to_string(d));
    }

    const std::vector<double>& depth_schedule() const { return depth_schedule_; }
    const std::vector<double>& wavelength_schedule() const { return wavelength_schedule_; }

private:
    std::vector<CapturedSlice> slices_;
    std::vector<double> depth_schedule_;
    std::vector<double> wavelength_schedule_;
};

/// Raw-parts validator for the N-depths x M-wavelengths grid.
/// cells is depth-major: cells[k*M + i] holds (depth k, wavelength i).
inline ValidationResult validate_multispectral(const std::vector<Image>& cells,
                                               const std::vector<double>& depth_schedule,
                                               const std::vector<double>& wavelength_schedule) {
    const std::size_t n = depth_schedule.size();
    const std::size_t m = wavelength_schedule.size();
    if (n == 0 || m == 0)
        return ValidationResult::failure("multispectral stack: empty schedule");
    if (cells.size() != n * m)
        return ValidationResult::failure("multispectral stack: cell count " +
                                         std::to_string(cells.size()) + " != " +
                                         std::to_string(n) + "x" + std::to_string(m));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            const Image& img = cells[k * m + i];
            const std::string where = "cell (" + std::to_string(k) + ", " + std::to_string(i) + ")";
            if (img.empty())
                return ValidationResult::failure(where + ": empty image");
            if (!img.same_size(cells[0]))
                return ValidationResult::failure(where + ": dimension mismatch with cell (0, 0)");
            ValidationResult fin = detail::check_image_finite(img, where);
            if (!fin) return fin;
        }
    }
    return ValidationResult::success();
}

/// Full multispectral focal stack: ground truth on the way in,
/// reconstruction on the way out.
class MultispectralFocalStack {
public:
    MultispectralFocalStack(std::vector<Image> cells,
                            std::vector<double> depth_schedule,
                            std::vector<double> wavelength_schedule)
        : cells_(std::move(cells)),
          depth_schedule_(std::move(depth_schedule)),
          wavelength_schedule_(std::move(wavelength_schedule)) {
        ValidationResult r = validate_multispectral(cells_, depth_schedule_, wavelength_schedule_);
        if (!r) throw std::invalid_argument(r.error);
    }

    int depths() const { return static_cast<int>(depth_schedule_.size()); }
    int wavelengths() const { return static_cast<int>(wavelength_schedule_.size()); }
    int width() const { return cells_[0].width(); }
    int height() const { return cells_[0].height(); }

    const Image& cell(int depth, int wavelength) const {
        return cells_.at(static_cast<std::size_t>(depth) * wavelengths() + wavelength);
    }
    const std::vector<Image>& cells() const { return cells_; }

    const std::vector<double>& depth_schedule() const { return depth_schedule_; }
    const std::vector<double>& wavelength_schedule() const { return wavelength_schedule_; }

private:
    std::vector<Image> cells_;
    std::vector<double> depth_schedule_;
    std::vector<double> wavelength_schedule_;
};

inline ValidationResult validate_stack(const SpectralVaryingStack& s) {
    return validate_spectral_varying(s.slices(), s.depth_schedule(), s.wavelength_schedule());
}

inline ValidationResult validate_stack(const MultispectralFocalStack& s) {
    return validate_multispectral(s.cells(), s.depth_schedule(), s.wavelength_schedule());
}

/// Per-pixel affine maps relating two channels: target ~ gain (.) source + offset.
struct LltMaps {
    Image gain;
    Image offset;
};

/// Reconstruction parameters. Defaults: a sigma=10 pre-blur is strong enough
/// to wash out the per-slice defocus difference, and the alpha/beta weights
/// balance the gradient-consistency and map-smoothness terms.
struct ReconConfig {
    double blur_sigma = 10.0;
    double alpha = 1.0;
    double beta = 0.1;
    int max_iters = 500;
    double rel_tol = 1e-6;
    double init_step = 1.0;

    void validate() const {
        if (!(blur_sigma > 0.0)) throw std::invalid_argument("ReconConfig: blur_sigma must be > 0");
        if (!(alpha >= 0.0)) throw std::invalid_argument("ReconConfig: alpha must be >= 0");
        if (!(beta >= 0.0)) throw std::invalid_argument("ReconConfig: beta must be >= 0");
        if (max_iters < 1) throw std::invalid_argument("ReconConfig: max_iters must be >= 1");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("ReconConfig: rel_tol must be > 0");
        if (!(init_step > 0.0)) throw std::invalid_argument("ReconConfig: init_step must be > 0");
    }
};

} // namespace msfs
