#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "msfs/stack.hpp"
#include "oracles.hpp"

using msfs::CapturedSlice;
using msfs::Image;
using msfs::MultispectralFocalStack;
using msfs::ReconConfig;
using msfs::SpectralVaryingStack;
using msfs::ValidationResult;

namespace {

std::vector<CapturedSlice> make_slices(int n, int width = 8, int height = 8) {
    std::vector<CapturedSlice> slices;
    for (int k = 0; k < n; ++k)
        slices.push_back({k, 430.0 + 30.0 * k, Image(width, height, 0.1 * k)});
    return slices;
}

std::vector<double> iota_schedule(int n, double start = 1.0, double step = 1.0) {
    std::vector<double> s(n);
    for (int k = 0; k < n; ++k) s[k] = start + step * k;
    return s;
}

std::vector<double> wavelengths(int n) { return iota_schedule(n, 430.0, 30.0); }

} // namespace

TEST_CASE("image basics") {
    Image img(4, 3, 0.5);
    REQUIRE(img.width() == 4);
    REQUIRE(img.height() == 3);
    REQUIRE(img.size() == 12);
    img(2, 3) = 1.0;
    REQUIRE(img(2, 3) == 1.0);
    REQUIRE(img[2 * 4 + 3] == 1.0);

    CHECK_THROWS_AS(Image(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Image(4, -1), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("well-formed 10-slice stack validates") {
    auto result = msfs::validate_spectral_varying(make_slices(10), iota_schedule(10), wavelengths(10));
    REQUIRE(result.ok);

    SpectralVaryingStack stack(make_slices(10), iota_schedule(10), wavelengths(10));
    REQUIRE(msfs::validate_stack(stack).ok);
    REQUIRE(stack.count() == 10);
    REQUIRE(stack.position_of_depth(7) == 7);
}

TEST_CASE("duplicate depth index is reported with its index") {
    auto slices = make_slices(5);
    slices[4].depth_index = 3;
    auto result = msfs::validate_spectral_varying(slices, iota_schedule(5), wavelengths(5));
    REQUIRE_FALSE(result.ok);
    CHECK(result.error.find("duplicate depth_index 3") != std::string::npos);
    CHECK_THROWS_AS(SpectralVaryingStack(slices, iota_schedule(5), wavelengths(5)),
                    std::invalid_argument);
}

TEST_CASE("non-finite pixel is reported with coordinates") {
    auto slices = make_slices(3);
    slices[1].image(2, 5) = std::numeric_limits<double>::quiet_NaN();
    auto result = msfs::validate_spectral_varying(slices, iota_schedule(3), wavelengths(3));
    REQUIRE_FALSE(result.ok);
    CHECK(result.error.find("slice 1") != std::string::npos);
    CHECK(result.error.find("(2, 5)") != std::string::npos);
}

TEST_CASE("non-monotone wavelength schedule is rejected") {
    auto ws = wavelengths(4);
    ws[2] = ws[1];
    auto slices = make_slices(4);
    for (int k = 0; k < 4; ++k) slices[k].wavelength_nm = ws[k];
    auto result = msfs::validate_spectral_varying(slices, iota_schedule(4), ws);
    REQUIRE_FALSE(result.ok);
    CHECK(result.error.find("strictly increasing") != std::string::npos);
}

TEST_CASE("slice dimension mismatch is rejected") {
    auto slices = make_slices(3);
    slices[2].image = Image(9, 8, 0.0);
    auto result = msfs::validate_spectral_varying(slices, iota_schedule(3), wavelengths(3));
    REQUIRE_FALSE(result.ok);
    CHECK(result.error.find("slice 2") != std::string::npos);
    CHECK(result.error.find("dimension") != std::string::npos);
}

TEST_CASE("slice wavelength must match the schedule entry") {
    auto slices = make_slices(3);
    slices[1].wavelength_nm = 461.0;
    auto result = msfs::validate_spectral_varying(slices, iota_schedule(3), wavelengths(3));
    REQUIRE_FALSE(result.ok);
}

TEST_CASE("multispectral stack validation") {
    std::vector<Image> cells(6, Image(4, 4, 0.3));
    MultispectralFocalStack stack(cells, iota_schedule(2), wavelengths(3));
    REQUIRE(msfs::validate_stack(stack).ok);
    REQUIRE(stack.depths() == 2);
    REQUIRE(stack.wavelengths() == 3);

    SECTION("cell count mismatch") {
        auto result = msfs::validate_multispectral(std::vector<Image>(5, Image(4, 4)),
                                                   iota_schedule(2), wavelengths(3));
        REQUIRE_FALSE(result.ok);
    }
    SECTION("cell dimension mismatch names the cell") {
        cells[4] = Image(5, 4, 0.0);
        auto result = msfs::validate_multispectral(cells, iota_schedule(2), wavelengths(3));
        REQUIRE_FALSE(result.ok);
        CHECK(result.error.find("(1, 1)") != std::string::npos);
    }
    SECTION("non-finite cell pixel names cell and pixel") {
        cells[2](1, 3) = std::numeric_limits<double>::infinity();
        auto result = msfs::validate_multispectral(cells, iota_schedule(2), wavelengths(3));
        REQUIRE_FALSE(result.ok);
        CHECK(result.error.find("(0, 2)") != std::string::npos);
        CHECK(result.error.find("(1, 3)") != std::string::npos);
    }
}

TEST_CASE("recon config defaults and bounds") {
    ReconConfig cfg;
    CHECK(cfg.blur_sigma == 10.0);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.beta == 0.1);
    CHECK(cfg.max_iters == 500);
    CHECK(cfg.rel_tol == 1e-6);
    CHECK(cfg.init_step == 1.0);
    CHECK_NOTHROW(cfg.validate());

    auto invalid = [](auto mutate) {
        ReconConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    invalid([](ReconConfig& c) { c.blur_sigma = 0.0; });
    invalid([](ReconConfig& c) { c.alpha = -0.5; });
    invalid([](ReconConfig& c) { c.beta = -1e-9; });
    invalid([](ReconConfig& c) { c.max_iters = 0; });
    invalid([](ReconConfig& c) { c.rel_tol = 0.0; });
    invalid([](ReconConfig& c) { c.init_step = 0.0; });
}
