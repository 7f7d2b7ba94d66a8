#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "msfs/image.hpp"
#include "msfs/imgops.hpp"
#include "msfs/stack.hpp"

namespace msfs {

/// One scene layer: a matte (possibly soft) and one reflectance texture per
/// wavelength, all sharing the scene dimensions.
struct SceneLayer {
    double depth = 0.0;
    Image mask;
    std::vector<Image> spectra;
};

/// Back-to-front layered scene; the backmost layer's mask covers the frame.
struct LayeredScene {
    std::vector<SceneLayer> layers;
    std::vector<double> wavelength_schedule;
    int width = 0;
    int height = 0;
};

/// Software stand-in for the chromatic optic: defocus blur grows linearly
/// with distance from the focus plane, sigma_b = kappa * |depth - focus|.
struct DefocusModel {
    double kappa = 1.5;
    std::vector<double> focus_depths;

    void validate() const {
        if (!(kappa >= 0.0)) throw std::invalid_argument("DefocusModel: kappa must be >= 0");
        for (std::size_t a = 0; a < focus_depths.size(); ++a)
            for (std::size_t b = a + 1; b < focus_depths.size(); ++b)
                if (focus_depths[a] == focus_depths[b])
                    throw std::invalid_argument("DefocusModel: focus_depths must be distinct");
    }
};

/// N focus planes at depths 1..N. The physical optic has non-uniform depth
/// intervals; pass explicit focus_depths to model that.
inline DefocusModel default_defocus_model(int n_slices, double kappa = 1.5) {
    DefocusModel model;
    model.kappa = kappa;
    model.focus_depths.resize(n_slices);
    for (int k = 0; k < n_slices; ++k) model.focus_depths[k] = 1.0 + k;
    return model;
}

/// Evenly spaced band centers from 430 nm to 700 nm (30 nm steps at M = 10).
inline std::vector<double> default_wavelength_schedule(int m) {
    std::vector<double> ws(m);
    for (int i = 0; i < m; ++i)
        ws[i] = m == 1 ? 430.0 : 430.0 + (700.0 - 430.0) * i / (m - 1);
    return ws;
}

inline ValidationResult validate_scene(const LayeredScene& scene) {
    if (scene.width <= 0 || scene.height <= 0)
        return ValidationResult::failure("scene: dimensions must be positive");
    if (scene.layers.empty())
        return ValidationResult::failure("scene: no layers");
    const std::size_t m = scene.wavelength_schedule.size();
    for (std::size_t l = 0; l < scene.layers.size(); ++l) {
        const SceneLayer& layer = scene.layers[l];
        const std::string where = "scene layer " + std::to_string(l);
        if (layer.mask.width() != scene.width || layer.mask.height() != scene.height)
            return ValidationResult::failure(where + ": mask dimension mismatch");
        if (layer.spectra.size() != m)
            return ValidationResult::failure(where + ": spectra count != wavelength count");
        for (const Image& tex : layer.spectra)
            if (tex.width() != scene.width || tex.height() != scene.height)
                return ValidationResult::failure(where + ": texture dimension mismatch");
        for (std::size_t o = 0; o < l; ++o)
            if (scene.layers[o].depth == layer.depth)
                return ValidationResult::failure(where + ": duplicate layer depth");
    }
    for (int r = 0; r < scene.height; ++r)
        for (int c = 0; c < scene.width; ++c) {
            double coverage = 0.0;
            for (const SceneLayer& layer : scene.layers)
                coverage = std::max(coverage, layer.mask(r, c));
            if (!(coverage > 0.0))
                return ValidationResult::failure("scene: masks leave pixel (" + std::to_string(r) +
                                                 ", " + std::to_string(c) + ") uncovered");
        }
    return ValidationResult::success();
}

namespace detail {

/// Uniform double in [0,1) from the engine's raw 64-bit output. The standard
/// distributions are implementation-defined; this mapping is not.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_double(rng);
}

/// Band-limited noise texture rescaled into [lo, hi].
inline Image noise_texture(std::mt19937_64& rng, int width, int height, double smooth_sigma,
                           double lo, double hi) {
    Image img(width, height);
    for (std::size_t p = 0; p < img.size(); ++p) img[p] = unit_double(rng);
    img = gaussian_blur(img, smooth_sigma);
    double vmin = img[0], vmax = img[0];
    for (std::size_t p = 0; p < img.size(); ++p) {
        vmin = std::min(vmin, img[p]);
        vmax = std::max(vmax, img[p]);
    }
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    for (std::size_t p = 0; p < img.size(); ++p)
        img[p] = lo + (hi - lo) * (img[p] - vmin) / span;
    return img;
}

/// Soft-edged rotated ellipse matte: 1 inside, 0 outside, smoothstep across
/// an edge band so compositing seams stay mild.
inline Image ellipse_mask(std::mt19937_64& rng, int width, int height) {
    const double cx = uniform_in(rng, 0.25, 0.75) * width;
    const double cy = uniform_in(rng, 0.25, 0.75) * height;
    const double ax = uniform_in(rng, 0.18, 0.38) * width;
    const double ay = uniform_in(rng, 0.18, 0.38) * height;
    const double theta = uniform_in(rng, 0.0, 2.0 * 3.14159265358979323846);
    const double edge = 0.15;

    const double ct = std::cos(theta), st = std::sin(theta);
    Image mask(width, height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const double dx = c - cx, dy = r - cy;
            const double u = (dx * ct + dy * st) / ax;
            const double v = (-dx * st + dy * ct) / ay;
            const double d = std::sqrt(u * u + v * v);
            // solid for d <= 1-edge, zero for d >= 1, smoothstep between
            const double t = std::clamp((1.0 - d) / edge, 0.0, 1.0);
            mask(r, c) = t * t * (3.0 - 2.0 * t);
        }
    }
    return mask;
}

} // namespace detail

/// Deterministic seed-keyed scene: per-layer band-limited random textures
/// whose brightness and offset vary smoothly across the wavelength schedule,
/// behind random soft elliptical mattes. Layer 0 is backmost and covers the
/// frame; later layers sit progressively closer.
inline LayeredScene synth_scene(int width, int height, int n_layers, int n_wavelengths,
                                std::uint64_t seed) {
    if (width < 16 || height < 16)
        throw std::invalid_argument("synth_scene: dimensions must be >= 16");
    if (n_layers < 1) throw std::invalid_argument("synth_scene: n_layers must be >= 1");
    if (n_wavelengths < 2) throw std::invalid_argument("synth_scene: n_wavelengths must be >= 2");

    std::mt19937_64 rng(seed);
    LayeredScene scene;
    scene.width = width;
    scene.height = height;
    scene.wavelength_schedule = default_wavelength_schedule(n_wavelengths);

    const double far_depth = static_cast<double>(n_wavelengths);
    for (int l = 0; l < n_layers; ++l) {
        SceneLayer layer;
        layer.depth = n_layers == 1
                          ? 0.5 * (1.0 + far_depth)
                          : far_depth - (far_depth - 1.0) * l / (n_layers - 1);

        layer.mask = l == 0 ? Image(width, height, 1.0) : detail::ellipse_mask(rng, width, height);

        const Image base = detail::noise_texture(rng, width, height, 3.0, 0.15, 0.85);
        const double base_gain = detail::uniform_in(rng, 0.50, 0.70);
        const double mod_gain = detail::uniform_in(rng, 0.12, 0.25);
        const double freq_gain = detail::uniform_in(rng, 0.5, 1.5);
        const double phase_gain = detail::uniform_in(rng, 0.0, 6.28318530717958648);
        const double mod_off = detail::uniform_in(rng, 0.05, 0.15);
        const double freq_off = detail::uniform_in(rng, 0.5, 1.5);
        const double phase_off = detail::uniform_in(rng, 0.0, 6.28318530717958648);

        layer.spectra.reserve(n_wavelengths);
        for (int i = 0; i < n_wavelengths; ++i) {
            const double x = static_cast<double>(i) / (n_wavelengths - 1);
            const double gain =
                base_gain + mod_gain * std::sin(6.28318530717958648 * freq_gain * x + phase_gain);
            const double offset =
                mod_off * (0.5 + 0.5 * std::cos(6.28318530717958648 * freq_off * x + phase_off));
            Image tex(width, height);
            for (std::size_t p = 0; p < tex.size(); ++p)
                tex[p] = std::clamp(gain * base[p] + offset, 0.0, 1.0);
            layer.spectra.push_back(std::move(tex));
        }
        scene.layers.push_back(std::move(layer));
    }
    return scene;
}

/// Render one channel of the scene focused at focus_depth. Each layer's
/// texture and matte are defocused by sigma_b = kappa * |depth - focus|,
/// then alpha-composited back to front with the blurred matte.
inline Image render_slice(const LayeredScene& scene, double focus_depth, const DefocusModel& model,
                          int wavelength_index) {
    if (wavelength_index < 0 ||
        static_cast<std::size_t>(wavelength_index) >= scene.wavelength_schedule.size())
        throw std::invalid_argument("render_slice: wavelength_index out of range");
    if (!(model.kappa >= 0.0)) throw std::invalid_argument("render_slice: kappa must be >= 0");

    Image canvas(scene.width, scene.height, 0.0);
    for (const SceneLayer& layer : scene.layers) {
        const double sigma_b = model.kappa * std::abs(layer.depth - focus_depth);
        const Image& tex = layer.spectra[wavelength_index];
        const Image blurred_tex = sigma_b > 0.0 ? gaussian_blur(tex, sigma_b) : tex;
        const Image blurred_mask = sigma_b > 0.0 ? gaussian_blur(layer.mask, sigma_b) : layer.mask;
        for (std::size_t p = 0; p < canvas.size(); ++p) {
            const double m = blurred_mask[p];
            canvas[p] = m * blurred_tex[p] + (1.0 - m) * canvas[p];
        }
    }
    return canvas;
}

/// Ground-truth stack: cell (k, i) is the scene rendered in channel i,
/// focused at model.focus_depths[k].
inline MultispectralFocalStack render_ground_truth(const LayeredScene& scene,
                                                   const DefocusModel& model,
                                                   const std::vector<double>& wavelength_schedule) {
    ValidationResult valid = validate_scene(scene);
    if (!valid) throw std::invalid_argument("render_ground_truth: " + valid.error);
    model.validate();
    if (wavelength_schedule.size() != scene.wavelength_schedule.size())
        throw std::invalid_argument("render_ground_truth: wavelength schedule length mismatch");
    if (model.focus_depths.empty())
        throw std::invalid_argument("render_ground_truth: empty focus_depths");

    const int n = static_cast<int>(model.focus_depths.size());
    const int m = static_cast<int>(wavelength_schedule.size());
    std::vector<Image> cells;
    cells.reserve(static_cast<std::size_t>(n) * m);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < m; ++i)
            cells.push_back(render_slice(scene, model.focus_depths[k], model, i));
    return MultispectralFocalStack(std::move(cells), model.focus_depths, wavelength_schedule);
}

/// The camera picks one channel per depth: slice k of the output is ground
/// truth cell (k, k). Requires a square (N = M) stack.
inline SpectralVaryingStack capture_spectral_varying(const MultispectralFocalStack& gt) {
    if (gt.depths() != gt.wavelengths())
        throw std::invalid_argument("capture_spectral_varying: stack must have equal depth and "
                                    "wavelength counts (got " +
                                    std::to_string(gt.depths()) + "x" +
                                    std::to_string(gt.wavelengths()) + ")");
    std::vector<CapturedSlice> slices;
    slices.reserve(gt.depths());
    for (int k = 0; k < gt.depths(); ++k)
        slices.push_back({k, gt.wavelength_schedule()[k], gt.cell(k, k)});
    return SpectralVaryingStack(std::move(slices), gt.depth_schedule(), gt.wavelength_schedule());
}

} // namespace msfs
