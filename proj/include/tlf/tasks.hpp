#pragma once

#include <cstdint>
#include <optional>

#include "tlf/denoise.hpp"
#include "tlf/engine.hpp"
#include "tlf/feasibility.hpp"
#include "tlf/problem.hpp"

namespace tlf {

// A composite objective together with its latent feasibility model.
struct TaskProblem {
    CompositeProblem problem;
    FeasibilityModel feasibility;
};

// Wavelet-sparsity deblurring: variables are Haar coefficients beta with
// x = W^T beta, data operator K W^T and L = ||K||^2 (exact, from the kernel
// spectrum). The feasibility model is TV-regularized deconvolution with an
// FFT x-solve.
TaskProblem build_deblur(const ImageTensor& blurry, const BlurKernel& kernel, double lambda1, Exponent p,
                         double lambda2, Exponent q, int wavelet_levels = kDefaultWaveletLevels);

// Inpainting with a binary mask (1 = observed). Data operator M W^T, L = 1,
// CG x-solve in the feasibility model (diag(M) is not circulant).
TaskProblem build_inpaint(const ImageTensor& observed, const ImageTensor& mask, double lambda1, Exponent p,
                          double lambda2, Exponent q, int wavelet_levels = kDefaultWaveletLevels);

// Throws ValidationError unless every entry is exactly 0 or 1.
void validate_binary_mask(const ImageTensor& mask);

// ---------------------------------------------------------------------------
// Rain streak removal, y = x_b + x_r with both layers in [0, 1].

struct DerainModel {
    double nu1 = 0.005;  // sparsity of background codes
    double nu2 = 0.002;  // sparsity of rain codes
    double rho1 = 0.03;  // TV weight on the background in the feasibility model
    double rho2 = 0.02;  // l_p weight on the rain layer in the feasibility model
    // l0 on the background codes: a piecewise-smooth background has few
    // significant Haar coefficients while streaks add many small ones.
    Exponent p1 = Exponent::zero;
    Exponent p2 = Exponent::one;
    int hqs_iters = 5;
    int wavelet_levels = kDefaultWaveletLevels;

    void validate() const;
};

struct DerainState {
    ImageTensor x_b;
    ImageTensor x_r;
    ImageTensor beta;   // Haar codes of the background
    ImageTensor gamma;  // Haar codes of the rain layer
    double alpha = 0.0;
    double mu = 0.0;    // shared eta_1 = eta_2 anchor weight
    double F = 0.0;
};

// Objective on the layers with the codes eliminated:
//   1/2 ||y - x_b - x_r||^2 + E_nu1(W x_b) + E_nu2(W x_r) + indicator_[0,1]
// where E_nu(c) = min_beta 1/2 ||beta - c||^2 + nu ||beta||_p^p. Infinite
// outside the box.
double derain_objective(const ImageTensor& y, const ImageTensor& x_b, const ImageTensor& x_r, const DerainModel& m);

// Same objective with explicit codes:
//   1/2 ||y - x_b - x_r||^2 + 1/2 ||x_b - W^T beta||^2 + 1/2 ||x_r - W^T gamma||^2
//   + nu1 ||beta||_p1 + nu2 ||gamma||_p2 + indicator_[0,1].
double derain_objective(const ImageTensor& y, const DerainState& s, const DerainModel& m);

// Exact minimizer over [0,1]^2 of 1/2 (y-a-b)^2 + 1/2 (a-c)^2 + 1/2 (b-d)^2.
std::pair<double, double> layer_fit(double y, double c, double d);

// argmin_r 1/2 (r - c)^2 + eta/2 (r - anchor)^2 + rho |r|^p.
double rain_layer_update(double c, double anchor, double eta, double rho, Exponent p);

DerainState derain_init(const ImageTensor& y, const DerainModel& m, const SolverParams& params);

struct DerainDenoisers {
    DenoiserSpec background;
    DenoiserSpec rain;
};

// One outer iteration; appends a record to `trace` when given.
DerainState derain_step(const ImageTensor& y, const DerainState& state, const DerainDenoisers& denoisers,
                        const SolverParams& params, const DerainModel& model, int k, TraceRecord* record = nullptr);

struct DerainResult {
    DerainState state;
    IterateTrace trace;
};

DerainResult derain_solve(const ImageTensor& y, const DerainState& init, const DerainDenoisers& denoisers,
                          const SolverParams& params, const DerainModel& model,
                          const std::optional<ImageTensor>& background_truth = std::nullopt);

// ---------------------------------------------------------------------------
// Synthetic data.

// Piecewise-smooth grayscale test scene (size must be >= 16): shaded
// background, rectangles, a disk, a stripe patch and a soft blob.
ImageTensor desk_scene(std::size_t size = 64);

// Motion-blurred salt noise at a fixed angle, scaled so the peak equals
// `amplitude` (<= 0.5).
ImageTensor synthetic_rain(Shape shape, std::uint64_t seed, double amplitude = 0.4, double density = 0.02,
                           double angle_degrees = 70.0, int streak_length = 9);

// 1 = observed, 0 = missing; exactly round(missing_fraction * HW) missing
// pixels, chosen by a seeded shuffle and shared across channels.
ImageTensor random_mask(Shape shape, double missing_fraction, std::uint64_t seed);

}  // namespace tlf
