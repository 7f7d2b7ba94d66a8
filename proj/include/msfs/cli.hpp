#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msfs/capture.hpp"
#include "msfs/llt.hpp"
#include "msfs/metrics.hpp"
#include "msfs/stack_io.hpp"

namespace msfs::cli {

namespace detail {

/// Map visualization: affine rescale to [0,1] plus a sidecar recording the
/// original range so the map can be recovered from the PGM.
inline void write_map_visualization(const std::filesystem::path& out, const Image& map) {
    double vmin = map[0], vmax = map[0];
    for (std::size_t p = 0; p < map.size(); ++p) {
        vmin = std::min(vmin, map[p]);
        vmax = std::max(vmax, map[p]);
    }
    Image norm(map.width(), map.height());
    const double span = vmax - vmin;
    for (std::size_t p = 0; p < map.size(); ++p)
        norm[p] = span > 0.0 ? (map[p] - vmin) / span : 0.5;
    write_pgm16(out, norm);

    std::filesystem::path sidecar = out;
    sidecar.replace_extension();
    sidecar += ".scale.txt";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "min %.17g\nmax %.17g\n", vmin, vmax);
    msfs::detail::write_text_file(sidecar, buf);
}

} // namespace detail

/// Command-line front end. Returns the process exit code: 0 on success,
/// 1 on an operational error (single-line `error: ...` on stderr),
/// 2 on a usage error.
inline int run(int argc, const char* const* argv) {
    CLI::App app{"multispectral focal stack toolkit"};
    app.require_subcommand(1);

    // synth
    std::string synth_out;
    int synth_width = 128, synth_height = 128, synth_layers = 3, synth_channels = 10;
    std::uint64_t synth_seed = 7;
    double synth_kappa = 1.5;
    CLI::App* synth = app.add_subcommand(
        "synth", "generate a synthetic scene and its ground-truth multispectral focal stack");
    synth->add_option("--out", synth_out, "output stack directory")->required();
    synth->add_option("--width", synth_width, "scene width in pixels");
    synth->add_option("--height", synth_height, "scene height in pixels");
    synth->add_option("--layers", synth_layers, "number of depth layers");
    synth->add_option("--channels", synth_channels, "number of spectral channels (= depths)");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--kappa", synth_kappa, "defocus blur growth, px per unit depth");
    synth->callback([&] {
        const LayeredScene scene =
            synth_scene(synth_width, synth_height, synth_layers, synth_channels, synth_seed);
        const DefocusModel model = default_defocus_model(synth_channels, synth_kappa);
        const MultispectralFocalStack gt =
            render_ground_truth(scene, model, scene.wavelength_schedule);
        const std::filesystem::path manifest = write_stack(gt, synth_out);
        write_scene(scene, std::filesystem::path(synth_out) / "scene");
        std::cout << "wrote " << manifest.string() << " (" << gt.depths() << " depths x "
                  << gt.wavelengths() << " channels)\n";
    });

    // simulate
    std::string sim_gt, sim_out;
    double sim_kappa = 0.0;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "select the camera's one channel per depth from a ground-truth stack");
    simulate->add_option("--gt", sim_gt, "ground-truth stack directory")->required();
    simulate->add_option("--out", sim_out, "output stack directory")->required();
    CLI::Option* sim_kappa_opt = simulate->add_option(
        "--kappa", sim_kappa, "re-render the captured slices from the stored scene with this "
                              "defocus coefficient instead of selecting stored cells");
    simulate->callback([&] {
        const MultispectralFocalStack gt = read_multispectral(sim_gt);
        if (sim_kappa_opt->count() > 0) {
            if (gt.depths() != gt.wavelengths())
                throw std::runtime_error("simulate: stack must have equal depth and wavelength "
                                         "counts");
            const LayeredScene scene = read_scene(std::filesystem::path(sim_gt) / "scene");
            DefocusModel model;
            model.kappa = sim_kappa;
            model.focus_depths = gt.depth_schedule();
            model.validate();
            std::vector<CapturedSlice> slices;
            for (int k = 0; k < gt.depths(); ++k)
                slices.push_back({k, gt.wavelength_schedule()[k],
                                  render_slice(scene, model.focus_depths[k], model, k)});
            const SpectralVaryingStack captured(std::move(slices), gt.depth_schedule(),
                                                gt.wavelength_schedule());
            std::cout << "wrote " << write_stack(captured, sim_out).string() << "\n";
        } else {
            const SpectralVaryingStack captured = capture_spectral_varying(gt);
            std::cout << "wrote " << write_stack(captured, sim_out).string() << "\n";
        }
    });

    // reconstruct
    std::string rec_in, rec_out;
    ReconConfig rec_cfg;
    int rec_jobs = 0;
    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "recover the full multispectral focal stack from a "
                                          "spectral-varying capture");
    reconstruct->add_option("--in", rec_in, "captured spectral-varying stack directory")
        ->required();
    reconstruct->add_option("--out", rec_out, "output stack directory")->required();
    reconstruct->add_option("--sigma", rec_cfg.blur_sigma, "pre-blur standard deviation");
    reconstruct->add_option("--alpha", rec_cfg.alpha, "gradient-consistency weight");
    reconstruct->add_option("--beta", rec_cfg.beta, "map-smoothness weight");
    reconstruct->add_option("--max-iters", rec_cfg.max_iters, "gradient descent iteration cap");
    reconstruct->add_option("--rel-tol", rec_cfg.rel_tol, "relative decrease stopping tolerance");
    reconstruct->add_option("--jobs", rec_jobs,
                            "concurrent channel-pair fits (0 = hardware concurrency)");
    reconstruct->callback([&] {
        const SpectralVaryingStack captured = read_spectral_varying(rec_in);
        const MultispectralFocalStack recon = reconstruct_focal_stack(captured, rec_cfg, rec_jobs);
        std::cout << "wrote " << write_stack(recon, rec_out).string() << "\n";
    });

    // fit
    std::string fit_source, fit_target, fit_out_a, fit_out_b;
    ReconConfig fit_cfg;
    CLI::App* fit = app.add_subcommand(
        "fit", "fit one gain/offset map pair between two slices and write them as images");
    fit->add_option("--source", fit_source, "source slice PGM")->required();
    fit->add_option("--target", fit_target, "target slice PGM")->required();
    fit->add_option("--out-a", fit_out_a, "gain map output PGM")->required();
    fit->add_option("--out-b", fit_out_b, "offset map output PGM")->required();
    fit->add_option("--sigma", fit_cfg.blur_sigma, "pre-blur standard deviation");
    fit->add_option("--alpha", fit_cfg.alpha, "gradient-consistency weight");
    fit->add_option("--beta", fit_cfg.beta, "map-smoothness weight");
    fit->add_option("--max-iters", fit_cfg.max_iters, "gradient descent iteration cap");
    fit->add_option("--rel-tol", fit_cfg.rel_tol, "relative decrease stopping tolerance");
    fit->callback([&] {
        const Image source = read_pgm(fit_source);
        const Image target = read_pgm(fit_target);
        const Image blurred_source = gaussian_blur(source, fit_cfg.blur_sigma);
        const Image blurred_target = gaussian_blur(target, fit_cfg.blur_sigma);
        const auto [maps, report] = fit_llt(blurred_source, blurred_target, fit_cfg);
        detail::write_map_visualization(fit_out_a, maps.gain);
        detail::write_map_visualization(fit_out_b, maps.offset);
        std::cout << "fit: " << report.iterations << " iterations, objective "
                  << report.initial_objective << " -> " << report.final_objective
                  << (report.converged ? "" : " (not converged)") << "\n";
    });

    // evaluate
    std::string eval_gt, eval_recon, eval_report;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "PSNR/SSIM table for a reconstruction against ground truth");
    evaluate->add_option("--gt", eval_gt, "ground-truth stack directory")->required();
    evaluate->add_option("--recon", eval_recon, "reconstructed stack directory")->required();
    evaluate->add_option("--report", eval_report, "output CSV path")->required();
    evaluate->callback([&] {
        const MultispectralFocalStack gt = read_multispectral(eval_gt);
        const MultispectralFocalStack recon = read_multispectral(eval_recon);
        const EvalTable table = evaluate_stack(gt, recon);
        msfs::detail::write_text_file(eval_report, to_csv(table));
        std::cout << "wrote " << eval_report << " (mean PSNR off-diagonal "
                  << format_psnr(table.mean_psnr_off_diagonal()) << " dB, mean SSIM "
                  << format_ssim(table.mean_ssim_off_diagonal()) << ")\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("msfs");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace msfs::cli
