#pragma once

#include "tlf/tensor.hpp"

namespace tlf {

constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) on peak 1.0, capped at 100 dB for (near-)identical images.
double psnr(const ImageTensor& x, const ImageTensor& ref);

// PSNR restricted to pixels where `region` is nonzero (same shape as x).
double psnr_masked(const ImageTensor& x, const ImageTensor& ref, const ImageTensor& region);

// Mean SSIM over all fully-contained 11x11 windows (Gaussian weights, sigma
// 1.5, K1 = 0.01, K2 = 0.03, peak 1). Color inputs are reduced to the mean of
// their channels first. Throws ValidationError for images smaller than the
// window.
double ssim(const ImageTensor& x, const ImageTensor& ref);

// Channel mean as a single-channel image.
ImageTensor to_gray(const ImageTensor& x);

// Anisotropic total variation sum |grad_h x| + |grad_v x| with circular wrap.
double total_variation(const ImageTensor& x);

}  // namespace tlf
