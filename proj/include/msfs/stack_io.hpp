#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "msfs/capture.hpp"
#include "msfs/pgm.hpp"
#include "msfs/stack.hpp"

namespace msfs {

inline constexpr int kManifestFormatVersion = 1;

/// Pixel file name for a slice: d{depth index}_w{wavelength nm}.pgm.
inline std::string slice_filename(int depth_index, double wavelength_nm) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "d%02d_w%03ld.pgm", depth_index,
                  std::lround(wavelength_nm));
    return buf;
}

namespace detail {

inline nlohmann::json manifest_common(const char* kind, int width, int height,
                                      const std::vector<double>& depth_schedule,
                                      const std::vector<double>& wavelength_schedule) {
    nlohmann::json j;
    j["format_version"] = kManifestFormatVersion;
    j["kind"] = kind;
    j["width"] = width;
    j["height"] = height;
    j["depth_schedule"] = depth_schedule;
    j["wavelength_schedule"] = wavelength_schedule;
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline nlohmann::json load_manifest(const std::filesystem::path& dir) {
    const std::filesystem::path manifest = dir / "manifest.json";
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("missing manifest: " + manifest.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad manifest " + manifest.string() + ": " + e.what());
    }
    if (j.value("format_version", -1) != kManifestFormatVersion)
        throw std::runtime_error("unsupported manifest format_version in " + manifest.string());
    return j;
}

inline Image load_slice_file(const std::filesystem::path& dir, const std::string& rel,
                             int width, int height) {
    const std::filesystem::path file = dir / rel;
    if (!std::filesystem::exists(file))
        throw std::runtime_error("missing slice file: " + file.string());
    Image img = read_pgm(file);
    if (img.width() != width || img.height() != height)
        throw std::runtime_error("slice file " + file.string() +
                                 " does not match manifest dimensions");
    return img;
}

} // namespace detail

/// Write a spectral-varying stack: one PGM per slice, manifest.json last so
/// an interrupted write never looks complete.
inline std::filesystem::path write_stack(const SpectralVaryingStack& stack,
                                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j = detail::manifest_common("spectral_varying", stack.width(), stack.height(),
                                               stack.depth_schedule(), stack.wavelength_schedule());
    nlohmann::json slices = nlohmann::json::array();
    for (int k = 0; k < stack.count(); ++k) {
        const CapturedSlice& s = stack.slice(k);
        const std::string name = slice_filename(s.depth_index, s.wavelength_nm);
        write_pgm16(dir / name, s.image);
        slices.push_back({{"depth_index", s.depth_index},
                          {"wavelength_index", k},
                          {"wavelength_nm", s.wavelength_nm},
                          {"file", name}});
    }
    j["slices"] = slices;
    const std::filesystem::path manifest = dir / "manifest.json";
    detail::write_text_file(manifest, j.dump(2) + "\n");
    return manifest;
}

/// Write the full N x M grid, one PGM per cell.
inline std::filesystem::path write_stack(const MultispectralFocalStack& stack,
                                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j = detail::manifest_common("multispectral", stack.width(), stack.height(),
                                               stack.depth_schedule(), stack.wavelength_schedule());
    nlohmann::json slices = nlohmann::json::array();
    for (int k = 0; k < stack.depths(); ++k) {
        for (int i = 0; i < stack.wavelengths(); ++i) {
            const double nm = stack.wavelength_schedule()[i];
            slices.push_back({{"depth_index", k},
                              {"wavelength_index", i},
                              {"wavelength_nm", nm},
                              {"file", slice_filename(k, nm)}});
        }
    }
    // Rounded-nm names must be unique before anything is written.
    for (std::size_t a = 0; a < slices.size(); ++a)
        for (std::size_t b = a + 1; b < slices.size(); ++b)
            if (slices[a]["file"] == slices[b]["file"])
                throw std::runtime_error("write_stack: wavelength schedule rounds to duplicate "
                                         "file name " +
                                         slices[a]["file"].get<std::string>());
    for (int k = 0; k < stack.depths(); ++k)
        for (int i = 0; i < stack.wavelengths(); ++i)
            write_pgm16(dir / slice_filename(k, stack.wavelength_schedule()[i]),
                        stack.cell(k, i));
    j["slices"] = slices;
    const std::filesystem::path manifest = dir / "manifest.json";
    detail::write_text_file(manifest, j.dump(2) + "\n");
    return manifest;
}

inline SpectralVaryingStack read_spectral_varying(const std::filesystem::path& dir) {
    const nlohmann::json j = detail::load_manifest(dir);
    if (j.value("kind", "") != "spectral_varying")
        throw std::runtime_error("stack in " + dir.string() + " is not spectral-varying");
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const auto depth_schedule = j.at("depth_schedule").get<std::vector<double>>();
    const auto wavelength_schedule = j.at("wavelength_schedule").get<std::vector<double>>();

    std::vector<CapturedSlice> slices;
    for (const nlohmann::json& entry : j.at("slices")) {
        CapturedSlice s;
        s.depth_index = entry.at("depth_index").get<int>();
        s.wavelength_nm = entry.at("wavelength_nm").get<double>();
        s.image = detail::load_slice_file(dir, entry.at("file").get<std::string>(), width, height);
        slices.push_back(std::move(s));
    }
    return SpectralVaryingStack(std::move(slices), depth_schedule, wavelength_schedule);
}

inline MultispectralFocalStack read_multispectral(const std::filesystem::path& dir) {
    const nlohmann::json j = detail::load_manifest(dir);
    if (j.value("kind", "") != "multispectral")
        throw std::runtime_error("stack in " + dir.string() + " is not multispectral");
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const auto depth_schedule = j.at("depth_schedule").get<std::vector<double>>();
    const auto wavelength_schedule = j.at("wavelength_schedule").get<std::vector<double>>();
    const std::size_t n = depth_schedule.size();
    const std::size_t m = wavelength_schedule.size();

    std::vector<Image> cells(n * m);
    std::vector<bool> filled(n * m, false);
    for (const nlohmann::json& entry : j.at("slices")) {
        const int k = entry.at("depth_index").get<int>();
        const int i = entry.at("wavelength_index").get<int>();
        if (k < 0 || static_cast<std::size_t>(k) >= n || i < 0 ||
            static_cast<std::size_t>(i) >= m)
            throw std::runtime_error("manifest slice index out of range in " + dir.string());
        cells[k * m + i] =
            detail::load_slice_file(dir, entry.at("file").get<std::string>(), width, height);
        filled[k * m + i] = true;
    }
    for (std::size_t c = 0; c < filled.size(); ++c)
        if (!filled[c])
            throw std::runtime_error("manifest is missing cell (" + std::to_string(c / m) + ", " +
                                     std::to_string(c % m) + ") in " + dir.string());
    return MultispectralFocalStack(std::move(cells), depth_schedule, wavelength_schedule);
}

using AnyStack = std::variant<SpectralVaryingStack, MultispectralFocalStack>;

/// Load whichever stack kind the manifest declares.
inline AnyStack read_stack(const std::filesystem::path& dir) {
    const nlohmann::json j = detail::load_manifest(dir);
    const std::string kind = j.value("kind", "");
    if (kind == "spectral_varying") return read_spectral_varying(dir);
    if (kind == "multispectral") return read_multispectral(dir);
    throw std::runtime_error("unknown stack kind '" + kind + "' in " + dir.string());
}

/// Scene serialization, used by `synth` for provenance and by `simulate`
/// when re-rendering the capture with a different kappa.
inline std::filesystem::path write_scene(const LayeredScene& scene,
                                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["format_version"] = kManifestFormatVersion;
    j["width"] = scene.width;
    j["height"] = scene.height;
    j["wavelength_schedule"] = scene.wavelength_schedule;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < scene.layers.size(); ++l) {
        const SceneLayer& layer = scene.layers[l];
        char mask_name[32];
        std::snprintf(mask_name, sizeof(mask_name), "layer%02zu_mask.pgm", l);
        write_pgm16(dir / mask_name, layer.mask);
        nlohmann::json spectra = nlohmann::json::array();
        for (std::size_t i = 0; i < layer.spectra.size(); ++i) {
            char tex_name[32];
            std::snprintf(tex_name, sizeof(tex_name), "layer%02zu_w%03ld.pgm", l,
                          std::lround(scene.wavelength_schedule[i]));
            write_pgm16(dir / tex_name, layer.spectra[i]);
            spectra.push_back(tex_name);
        }
        layers.push_back({{"depth", layer.depth}, {"mask", mask_name}, {"spectra", spectra}});
    }
    j["layers"] = layers;
    const std::filesystem::path manifest = dir / "scene.json";
    detail::write_text_file(manifest, j.dump(2) + "\n");
    return manifest;
}

inline LayeredScene read_scene(const std::filesystem::path& dir) {
    const std::filesystem::path manifest = dir / "scene.json";
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("missing scene manifest: " + manifest.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad scene manifest " + manifest.string() + ": " + e.what());
    }
    LayeredScene scene;
    scene.width = j.at("width").get<int>();
    scene.height = j.at("height").get<int>();
    scene.wavelength_schedule = j.at("wavelength_schedule").get<std::vector<double>>();
    for (const nlohmann::json& entry : j.at("layers")) {
        SceneLayer layer;
        layer.depth = entry.at("depth").get<double>();
        layer.mask = detail::load_slice_file(dir, entry.at("mask").get<std::string>(),
                                             scene.width, scene.height);
        for (const nlohmann::json& tex : entry.at("spectra"))
            layer.spectra.push_back(detail::load_slice_file(dir, tex.get<std::string>(),
                                                            scene.width, scene.height));
        scene.layers.push_back(std::move(layer));
    }
    ValidationResult valid = validate_scene(scene);
    if (!valid) throw std::runtime_error("scene in " + dir.string() + ": " + valid.error);
    return scene;
}

} // namespace msfs
