#pragma once

// Synthetic instances shared by the solver tests.

#include "tlf/operators.hpp"
#include "tlf/rng.hpp"
#include "tlf/tasks.hpp"

namespace scenes {

struct Deblur {
    tlf::ImageTensor truth;
    tlf::BlurKernel kernel;
    tlf::ImageTensor blurry;
};

// desk scene, 9x9 Gaussian blur (sigma 1.5), 1% noise
inline Deblur deblur(std::size_t size = 64, std::uint64_t seed = 42) {
    tlf::ImageTensor truth = tlf::desk_scene(size);
    tlf::BlurKernel k = tlf::BlurKernel::gaussian(9, 1.5);
    tlf::ImageTensor b =
        tlf::add_gaussian_noise(tlf::LinearOperator::convolution(k, truth.shape()).apply(truth), 1.0, seed);
    return {truth, k, b};
}

inline tlf::TaskProblem deblur_problem(const Deblur& d) {
    return tlf::build_deblur(d.blurry, d.kernel, 4e-4, tlf::Exponent::one, 1e-4, tlf::Exponent::one);
}

struct Inpaint {
    tlf::ImageTensor truth;
    tlf::ImageTensor mask;
    tlf::ImageTensor observed;
};

// desk scene, 40% of pixels missing, 1% noise on the observed ones
inline Inpaint inpaint(std::size_t size = 64, std::uint64_t seed = 7) {
    tlf::ImageTensor truth = tlf::desk_scene(size);
    tlf::ImageTensor mask = tlf::random_mask(truth.shape(), 0.4, seed);
    tlf::ImageTensor obs = tlf::add_gaussian_noise(truth, 1.0, seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < obs.size(); ++i) obs[i] *= mask[i];
    return {truth, mask, obs};
}

struct Derain {
    tlf::ImageTensor background;
    tlf::ImageTensor rain;
    tlf::ImageTensor rainy;
};

// dimmed desk scene plus streaks of peak 0.4, so both layers stay in [0, 1]
inline Derain derain(std::size_t size = 64, std::uint64_t seed = 11) {
    tlf::ImageTensor bg = tlf::desk_scene(size);
    for (double& v : bg.values()) v = 0.1 + 0.5 * v;
    tlf::ImageTensor rain = tlf::synthetic_rain(bg.shape(), seed, 0.4);
    return {bg, rain, bg + rain};
}

inline tlf::DerainDenoisers derain_denoisers() {
    return {tlf::parse_denoiser("tv-rof:0.01"), tlf::parse_denoiser("wavelet-shrink:0.01")};
}

}  // namespace scenes
