#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "msfs/image.hpp"
#include "msfs/imgops.hpp"
#include "msfs/stack.hpp"

namespace msfs {

/// What a fit_llt run did: objective at start and end, accepted-step trace,
/// and whether the stopping rule (rather than the iteration cap) fired.
struct FitReport {
    double initial_objective = 0.0;
    double final_objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> step_history;      // accepted step size per iteration
    std::vector<double> objective_history; // objective after each accepted step, [0] = initial
};

namespace detail {

inline void check_llt_inputs(const LltMaps& maps, const Image& source, const Image& target,
                             const char* what) {
    require_same_size(maps.gain, maps.offset, what);
    require_same_size(maps.gain, source, what);
    require_same_size(source, target, what);
    if (!maps.gain.all_finite() || !maps.offset.all_finite() || !source.all_finite() ||
        !target.all_finite())
        throw std::invalid_argument(std::string(what) + ": non-finite input");
}

} // namespace detail

/// Fitting energy for one channel pair (both pre-blurred):
///   E = ||gain (.) source + offset - target||^2
///     + alpha * (||gain (.) dx source - dx target||^2 + ||gain (.) dy source - dy target||^2)
///     + beta  * (||grad gain||^2 + ||grad offset||^2)
/// The gain map multiplies the source's gradient images directly; it is not
/// differentiated through, so llt_gradients below is the exact gradient.
inline double llt_objective(const LltMaps& maps, const Image& source, const Image& target,
                            double alpha, double beta) {
    detail::check_llt_inputs(maps, source, target, "llt_objective");
    const Image& A = maps.gain;
    const Image& B = maps.offset;
    const int w = source.width();
    const int h = source.height();

    double data = 0.0;
    for (std::size_t p = 0; p < source.size(); ++p) {
        const double r0 = A[p] * source[p] + B[p] - target[p];
        data += r0 * r0;
    }

    double grad_fit = 0.0;
    if (alpha != 0.0) {
        const GradientPair gs = gradient(source);
        const GradientPair gt = gradient(target);
        for (std::size_t p = 0; p < source.size(); ++p) {
            const double rx = A[p] * gs.gx[p] - gt.gx[p];
            const double ry = A[p] * gs.gy[p] - gt.gy[p];
            grad_fit += rx * rx + ry * ry;
        }
    }

    double smooth = 0.0;
    if (beta != 0.0) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c + 1 < w; ++c) {
                const double da = A(r, c + 1) - A(r, c);
                const double db = B(r, c + 1) - B(r, c);
                smooth += da * da + db * db;
            }
        }
        for (int r = 0; r + 1 < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double da = A(r + 1, c) - A(r, c);
                const double db = B(r + 1, c) - B(r, c);
                smooth += da * da + db * db;
            }
        }
    }
    return data + alpha * grad_fit + beta * smooth;
}

/// Exact gradient of llt_objective with respect to the gain and offset maps.
inline std::pair<Image, Image> llt_gradients(const LltMaps& maps, const Image& source,
                                             const Image& target, double alpha, double beta) {
    detail::check_llt_inputs(maps, source, target, "llt_gradients");
    const Image& A = maps.gain;
    const Image& B = maps.offset;

    Image gA(source.width(), source.height());
    Image gB(source.width(), source.height());
    for (std::size_t p = 0; p < source.size(); ++p) {
        const double r0 = A[p] * source[p] + B[p] - target[p];
        gA[p] = 2.0 * source[p] * r0;
        gB[p] = 2.0 * r0;
    }
    if (alpha != 0.0) {
        const GradientPair gs = gradient(source);
        const GradientPair gt = gradient(target);
        for (std::size_t p = 0; p < source.size(); ++p) {
            const double rx = A[p] * gs.gx[p] - gt.gx[p];
            const double ry = A[p] * gs.gy[p] - gt.gy[p];
            gA[p] += 2.0 * alpha * (gs.gx[p] * rx + gs.gy[p] * ry);
        }
    }
    if (beta != 0.0) {
        const Image lapA = grad_adjoint_grad(A);
        const Image lapB = grad_adjoint_grad(B);
        for (std::size_t p = 0; p < source.size(); ++p) {
            gA[p] += 2.0 * beta * lapA[p];
            gB[p] += 2.0 * beta * lapB[p];
        }
    }
    return {std::move(gA), std::move(gB)};
}

/// Gradient descent on llt_objective from the identity transform (gain=1,
/// offset=0), with a backtracking line search per iteration: start at
/// cfg.init_step and halve until the Armijo condition holds. Stops on
/// relative objective decrease below cfg.rel_tol, a vanished gradient, or the
/// iteration cap. The accepted-objective sequence is strictly decreasing.
inline std::pair<LltMaps, FitReport> fit_llt(const Image& source, const Image& target,
                                             const ReconConfig& cfg) {
    cfg.validate();
    require_same_size(source, target, "fit_llt");

    constexpr double armijo_c = 1e-4;
    constexpr int max_halvings = 80;

    LltMaps maps{Image(source.width(), source.height(), 1.0),
                 Image(source.width(), source.height(), 0.0)};

    FitReport report;
    double energy = llt_objective(maps, source, target, cfg.alpha, cfg.beta);
    if (!std::isfinite(energy))
        throw std::invalid_argument("fit_llt: non-finite objective (pathological input)");
    report.initial_objective = energy;
    report.objective_history.push_back(energy);

    bool converged = false;
    int iterations = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        auto [gA, gB] = llt_gradients(maps, source, target, cfg.alpha, cfg.beta);
        const double grad_norm2 = sum_squares(gA) + sum_squares(gB);
        if (grad_norm2 == 0.0) {
            converged = true; // stationary point, nothing left to descend
            break;
        }

        double step = cfg.init_step;
        bool accepted = false;
        LltMaps trial{Image(), Image()};
        double trial_energy = 0.0;
        for (int halving = 0; halving < max_halvings; ++halving) {
            trial.gain = maps.gain;
            trial.offset = maps.offset;
            for (std::size_t p = 0; p < source.size(); ++p) {
                trial.gain[p] -= step * gA[p];
                trial.offset[p] -= step * gB[p];
            }
            trial_energy = llt_objective(trial, source, target, cfg.alpha, cfg.beta);
            if (std::isfinite(trial_energy) &&
                trial_energy <= energy - armijo_c * step * grad_norm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break; // no decreasing step at machine precision; converged stays false

        maps = std::move(trial);
        iterations = it;
        const double decrease = energy - trial_energy;
        const double rel_decrease = decrease / energy; // energy > 0 here: grad != 0 excludes E == 0
        energy = trial_energy;
        report.step_history.push_back(step);
        report.objective_history.push_back(energy);
        if (energy == 0.0 || rel_decrease < cfg.rel_tol) {
            converged = true;
            break;
        }
    }

    report.final_objective = energy;
    report.iterations = iterations;
    report.converged = converged;
    return {std::move(maps), std::move(report)};
}

/// Apply fitted maps to a sharp slice: gain (.) slice + offset, clamped to
/// [0,1] to match the quantized file format.
inline Image transfer_channel(const LltMaps& maps, const Image& sharp_source) {
    require_same_size(maps.gain, maps.offset, "transfer_channel");
    require_same_size(maps.gain, sharp_source, "transfer_channel");
    Image out(sharp_source.width(), sharp_source.height());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double v = maps.gain[p] * sharp_source[p] + maps.offset[p];
        out[p] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

/// Recover the full N x N multispectral focal stack from the captured
/// spectral-varying stack. For output cell (depth k, wavelength i): the cell
/// whose wavelength matches the captured slice passes through unchanged;
/// every other cell is fitted on the sigma-blurred pair (captured slice at
/// depth k as source, captured slice i as target) and filled by transferring
/// the sharp slice at depth k.
///
/// The N*(N-1) fits are independent and may run on up to `jobs` worker
/// threads (0 = hardware concurrency). Each fit is internally sequential and
/// writes its own output cell, so results do not depend on the worker count.
inline MultispectralFocalStack reconstruct_focal_stack(const SpectralVaryingStack& captured,
                                                       const ReconConfig& cfg, int jobs = 0) {
    cfg.validate();
    ValidationResult valid = validate_stack(captured);
    if (!valid) throw std::invalid_argument("reconstruct_focal_stack: " + valid.error);
    const int n = captured.count();
    if (n < 2) throw std::invalid_argument("reconstruct_focal_stack: need at least 2 slices");

    std::vector<Image> blurred(n);
    for (int k = 0; k < n; ++k)
        blurred[k] = gaussian_blur(captured.slice(k).image, cfg.blur_sigma);

    struct Task {
        int depth;
        int wavelength;
        int source_pos;
    };
    std::vector<Task> tasks;
    std::vector<Image> cells(static_cast<std::size_t>(n) * n);
    for (int d = 0; d < n; ++d) {
        const int pos = captured.position_of_depth(d);
        for (int i = 0; i < n; ++i) {
            if (i == pos)
                cells[static_cast<std::size_t>(d) * n + i] = captured.slice(pos).image;
            else
                tasks.push_back({d, i, pos});
        }
    }

    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(tasks.size()));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            try {
                auto [maps, report] =
                    fit_llt(blurred[task.source_pos], blurred[task.wavelength], cfg);
                (void)report;
                cells[static_cast<std::size_t>(task.depth) * n + task.wavelength] =
                    transfer_channel(maps, captured.slice(task.source_pos).image);
            } catch (...) {
                try {
                    std::rethrow_exception(std::current_exception());
                } catch (const std::exception& e) {
                    errors[t] = std::make_exception_ptr(std::runtime_error(
                        "cell (" + std::to_string(task.depth) + ", " +
                        std::to_string(task.wavelength) + "): " + e.what()));
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    return MultispectralFocalStack(std::move(cells), captured.depth_schedule(),
                                   captured.wavelength_schedule());
}

} // namespace msfs
