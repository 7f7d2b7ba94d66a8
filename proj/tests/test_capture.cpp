#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msfs/capture.hpp"
#include "msfs/imgops.hpp"
#include "oracles.hpp"

using msfs::DefocusModel;
using msfs::Image;
using msfs::LayeredScene;
using msfs::SceneLayer;

namespace {

// FNV-1a over the quantized pixel stream of every mask and texture, in layer
// order. Frozen from the first verified run of synth_scene; any change to the
// generator or the blur kernel shows up here.
constexpr std::uint64_t kSeed7SceneHash = 0x3bf08912db06e077ULL;

// Same digest over the rendered 4x4-cell ground truth of the small fixture.
constexpr std::uint64_t kSmallGroundTruthHash = 0x484f727fd6cfdd2aULL;

std::uint64_t scene_hash(const LayeredScene& scene) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const SceneLayer& layer : scene.layers) {
        h = oracle::fnv1a_image(layer.mask, h);
        for (const Image& tex : layer.spectra) h = oracle::fnv1a_image(tex, h);
    }
    return h;
}

std::uint64_t stack_hash(const msfs::MultispectralFocalStack& stack) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const Image& cell : stack.cells()) h = oracle::fnv1a_image(cell, h);
    return h;
}

double gradient_energy(const Image& img, int margin) {
    double acc = 0.0;
    for (int r = margin; r < img.height() - margin - 1; ++r)
        for (int c = margin; c < img.width() - margin - 1; ++c) {
            const double dx = img(r, c + 1) - img(r, c);
            const double dy = img(r + 1, c) - img(r, c);
            acc += dx * dx + dy * dy;
        }
    return acc;
}

LayeredScene single_layer_scene(int w, int h, double depth, int channels) {
    LayeredScene scene;
    scene.width = w;
    scene.height = h;
    scene.wavelength_schedule = msfs::default_wavelength_schedule(channels);
    SceneLayer layer;
    layer.depth = depth;
    layer.mask = Image(w, h, 1.0);
    for (int i = 0; i < channels; ++i) {
        Image tex(w, h);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                tex(r, c) = 0.5 + 0.3 * std::sin(0.4 * c + 0.1 * i) * std::cos(0.3 * r);
        layer.spectra.push_back(std::move(tex));
    }
    scene.layers.push_back(std::move(layer));
    return scene;
}

} // namespace

TEST_CASE("synth_scene is deterministic in the seed") {
    LayeredScene a = msfs::synth_scene(32, 32, 2, 3, 42);
    LayeredScene b = msfs::synth_scene(32, 32, 2, 3, 42);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].depth == b.layers[l].depth);
        CHECK(oracle::bit_equal(a.layers[l].mask, b.layers[l].mask));
        for (std::size_t i = 0; i < a.layers[l].spectra.size(); ++i)
            CHECK(oracle::bit_equal(a.layers[l].spectra[i], b.layers[l].spectra[i]));
    }
    LayeredScene c = msfs::synth_scene(32, 32, 2, 3, 43);
    CHECK(scene_hash(a) != scene_hash(c));
}

TEST_CASE("synth_scene validates its arguments") {
    CHECK_THROWS_AS(msfs::synth_scene(15, 32, 2, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(msfs::synth_scene(32, 15, 2, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(msfs::synth_scene(32, 32, 0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(msfs::synth_scene(32, 32, 2, 1, 1), std::invalid_argument);
}

TEST_CASE("single-layer scene covers the frame") {
    LayeredScene scene = msfs::synth_scene(32, 32, 1, 3, 9);
    REQUIRE(scene.layers.size() == 1);
    CHECK(oracle::bit_equal(scene.layers[0].mask, Image(32, 32, 1.0)));
    CHECK(msfs::validate_scene(scene).ok);
}

TEST_CASE("generated scenes satisfy the scene invariants") {
    for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
        LayeredScene scene = msfs::synth_scene(32, 32, 3, 4, seed);
        CHECK(msfs::validate_scene(scene).ok);
    }
}

TEST_CASE("pinned seed-7 fixture checksum") {
    LayeredScene scene = msfs::synth_scene(128, 128, 3, 10, 7);
    CHECK(scene_hash(scene) == kSeed7SceneHash);
}

TEST_CASE("rendering at the layer depth returns the texture exactly") {
    LayeredScene scene = single_layer_scene(24, 24, 4.0, 3);
    DefocusModel model{1.5, {4.0}};
    Image out = msfs::render_slice(scene, 4.0, model, 1);
    CHECK(oracle::bit_equal(out, scene.layers[0].spectra[1]));
}

TEST_CASE("kappa zero renders identical slices at every focus depth") {
    LayeredScene scene = msfs::synth_scene(32, 32, 2, 3, 3);
    DefocusModel model{0.0, {1.0, 2.0, 3.0}};
    Image s1 = msfs::render_slice(scene, 1.0, model, 0);
    Image s2 = msfs::render_slice(scene, 2.0, model, 0);
    Image s3 = msfs::render_slice(scene, 3.0, model, 0);
    CHECK(oracle::bit_equal(s1, s2));
    CHECK(oracle::bit_equal(s1, s3));
}

TEST_CASE("render_slice rejects a bad wavelength index") {
    LayeredScene scene = single_layer_scene(16, 16, 1.0, 2);
    DefocusModel model{1.0, {1.0}};
    CHECK_THROWS_AS(msfs::render_slice(scene, 1.0, model, 2), std::invalid_argument);
    CHECK_THROWS_AS(msfs::render_slice(scene, 1.0, model, -1), std::invalid_argument);
}

TEST_CASE("occluded background matches the direct blur away from the matte") {
    // front layer over a full-frame back layer; where the blurred matte is
    // numerically zero the composite must be the blurred background
    LayeredScene scene = msfs::synth_scene(64, 64, 2, 3, 17);
    const double focus_front = scene.layers[1].depth;
    DefocusModel model{1.5, {focus_front}};
    const double sigma_back = model.kappa * std::abs(scene.layers[0].depth - focus_front);
    REQUIRE(sigma_back > 0.0);

    Image rendered = msfs::render_slice(scene, focus_front, model, 1);
    Image back_blurred = oracle::dense_gaussian_blur(scene.layers[0].spectra[1], sigma_back);
    // front layer is in focus, so its matte is unblurred
    const Image& matte = scene.layers[1].mask;
    int checked = 0;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (matte(r, c) == 0.0) {
                CHECK(std::abs(rendered(r, c) - back_blurred(r, c)) < 1e-9);
                ++checked;
            }
    REQUIRE(checked > 0);
}

TEST_CASE("defocus never adds high-frequency energy") {
    LayeredScene scene = single_layer_scene(48, 48, 5.0, 2);
    double previous = std::numeric_limits<double>::infinity();
    for (double kappa : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        DefocusModel model{kappa, {1.0}};
        Image slice = msfs::render_slice(scene, 1.0, model, 0);
        const double energy = gradient_energy(slice, 4);
        CHECK(energy <= previous * (1.0 + 1e-12));
        previous = energy;
    }
}

TEST_CASE("ground truth grid layout") {
    LayeredScene scene = single_layer_scene(16, 16, 2.0, 2);

    SECTION("1x1 stack equals the single rendered slice") {
        LayeredScene mono = single_layer_scene(16, 16, 2.0, 2);
        mono.wavelength_schedule = {500.0};
        mono.layers[0].spectra.resize(1);
        DefocusModel model{1.0, {3.0}};
        auto gt = msfs::render_ground_truth(mono, model, mono.wavelength_schedule);
        REQUIRE(gt.depths() == 1);
        REQUIRE(gt.wavelengths() == 1);
        CHECK(oracle::bit_equal(gt.cell(0, 0), msfs::render_slice(mono, 3.0, model, 0)));
    }
    SECTION("kappa zero makes all depth rows identical") {
        DefocusModel model{0.0, {1.0, 2.0, 3.0}};
        auto gt = msfs::render_ground_truth(scene, model, scene.wavelength_schedule);
        for (int i = 0; i < gt.wavelengths(); ++i) {
            CHECK(oracle::bit_equal(gt.cell(0, i), gt.cell(1, i)));
            CHECK(oracle::bit_equal(gt.cell(0, i), gt.cell(2, i)));
        }
    }
    SECTION("schedule length mismatch throws") {
        DefocusModel model{1.0, {1.0, 2.0}};
        CHECK_THROWS_AS(msfs::render_ground_truth(scene, model, {500.0}), std::invalid_argument);
    }
}

TEST_CASE("pinned small ground-truth checksum") {
    LayeredScene scene = msfs::synth_scene(64, 64, 2, 4, 7);
    DefocusModel model = msfs::default_defocus_model(4, 1.5);
    auto gt = msfs::render_ground_truth(scene, model, scene.wavelength_schedule);
    CHECK(stack_hash(gt) == kSmallGroundTruthHash);
}

TEST_CASE("capture selects the diagonal") {
    SECTION("constant cells carry their (k,k) values through") {
        std::vector<Image> cells;
        std::vector<double> depths{1.0, 2.0, 3.0}, ws{430.0, 460.0, 490.0};
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i) cells.emplace_back(16, 16, (10.0 * k + i) / 100.0);
        msfs::MultispectralFocalStack gt(cells, depths, ws);
        auto captured = msfs::capture_spectral_varying(gt);
        REQUIRE(captured.count() == 3);
        for (int k = 0; k < 3; ++k) {
            CHECK(captured.slice(k).depth_index == k);
            CHECK(captured.slice(k).wavelength_nm == ws[k]);
            CHECK(oracle::bit_equal(captured.slice(k).image, Image(16, 16, (10.0 * k + k) / 100.0)));
        }
        CHECK(captured.depth_schedule() == depths);
        CHECK(captured.wavelength_schedule() == ws);
    }
    SECTION("1x1 stack captures its only cell") {
        msfs::MultispectralFocalStack gt({Image(16, 16, 0.25)}, {1.0}, {430.0});
        auto captured = msfs::capture_spectral_varying(gt);
        REQUIRE(captured.count() == 1);
        CHECK(oracle::bit_equal(captured.slice(0).image, gt.cell(0, 0)));
    }
    SECTION("non-square stack is rejected") {
        std::vector<Image> cells(6, Image(16, 16, 0.1));
        msfs::MultispectralFocalStack gt(cells, {1.0, 2.0}, {430.0, 460.0, 490.0});
        CHECK_THROWS_AS(msfs::capture_spectral_varying(gt), std::invalid_argument);
    }
}

TEST_CASE("capture then reconstruct keeps the diagonal bit-exact") {
    LayeredScene scene = msfs::synth_scene(32, 32, 2, 3, 23);
    DefocusModel model = msfs::default_defocus_model(3, 1.5);
    auto gt = msfs::render_ground_truth(scene, model, scene.wavelength_schedule);
    auto captured = msfs::capture_spectral_varying(gt);
    msfs::ReconConfig cfg;
    cfg.max_iters = 40;
    auto recon = msfs::reconstruct_focal_stack(captured, cfg, 2);
    for (int k = 0; k < 3; ++k) CHECK(oracle::bit_equal(recon.cell(k, k), gt.cell(k, k)));
}

TEST_CASE("default schedules") {
    auto ws = msfs::default_wavelength_schedule(10);
    REQUIRE(ws.size() == 10);
    CHECK(ws.front() == 430.0);
    CHECK(ws.back() == 700.0);
    for (int i = 1; i < 10; ++i) CHECK(ws[i] - ws[i - 1] == Catch::Approx(30.0).margin(1e-12));

    auto model = msfs::default_defocus_model(10);
    CHECK(model.kappa == 1.5);
    REQUIRE(model.focus_depths.size() == 10);
    CHECK(model.focus_depths.front() == 1.0);
    CHECK(model.focus_depths.back() == 10.0);
    CHECK_NOTHROW(model.validate());
}
