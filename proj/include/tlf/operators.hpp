#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "tlf/tensor.hpp"

namespace tlf {

// Blur kernel with odd dimensions. Taps are normalized to sum to one unless
// normalization is explicitly disabled (operator tests only).
class BlurKernel {
public:
    BlurKernel(std::size_t rows, std::size_t cols, std::vector<double> taps, bool normalize = true);

    static BlurKernel gaussian(std::size_t size, double sigma);
    static BlurKernel box(std::size_t size);
    static BlurKernel delta();

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double tap(std::size_t r, std::size_t c) const { return taps_[r * cols_ + c]; }
    const std::vector<double>& taps() const noexcept { return taps_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> taps_;
};

enum class OperatorKind {
    identity,
    convolution,
    mask,
    gradient_h,
    gradient_v,
    wavelet_forward,
    wavelet_inverse,
    composition,
};

constexpr int kDefaultWaveletLevels = 3;

// Immutable linear map between image tensors. Convolution and gradients use
// circular boundaries, so both are diagonalized by the 2-D DFT. Copies share
// the underlying (read-only) state.
class LinearOperator {
public:
    static LinearOperator identity(Shape shape);
    static LinearOperator convolution(const BlurKernel& kernel, Shape shape);
    // Diagonal 0/1 (or general nonnegative) weight per pixel.
    static LinearOperator mask(ImageTensor weights);
    // Forward differences with wrap-around: x(i, j+1) - x(i, j).
    static LinearOperator gradient_h(Shape shape);
    // x(i+1, j) - x(i, j).
    static LinearOperator gradient_v(Shape shape);
    static LinearOperator wavelet_forward(Shape shape, int levels = kDefaultWaveletLevels);
    static LinearOperator wavelet_inverse(Shape shape, int levels = kDefaultWaveletLevels);
    // compose({A, B, C}) applies C first: A(B(C x)).
    static LinearOperator compose(std::vector<LinearOperator> factors);

    OperatorKind kind() const noexcept;
    const Shape& input_shape() const noexcept;
    const Shape& output_shape() const noexcept;

    // True when the operator is a product of convolutions, gradients and the
    // identity, i.e. diagonal in the DFT basis.
    bool is_circulant() const noexcept;

    // Transfer function over the half spectrum (height x (width/2+1)) of a
    // circulant operator; nullopt otherwise.
    std::optional<std::vector<std::complex<double>>> transfer_function() const;

    // Exact ||A||_2^2 for circulant operators, masks and orthonormal wavelets
    // (and their products with circulant factors); nullopt otherwise.
    std::optional<double> exact_norm_sq() const;

    ImageTensor apply(const ImageTensor& x) const;
    ImageTensor adjoint(const ImageTensor& y) const;

    const BlurKernel* kernel() const noexcept;
    const ImageTensor* mask_weights() const noexcept;
    int wavelet_levels() const noexcept;
    const std::vector<LinearOperator>& factors() const noexcept;

    struct Impl;

private:
    explicit LinearOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

ImageTensor apply(const LinearOperator& op, const ImageTensor& x);
ImageTensor adjoint(const LinearOperator& op, const ImageTensor& y);

// Orthonormal multi-level 2-D Haar transform in the usual pyramid layout: the
// approximation band of the last level sits in the top-left corner.
ImageTensor wavelet_forward(const ImageTensor& x, int levels = kDefaultWaveletLevels);
ImageTensor wavelet_inverse(const ImageTensor& coeffs, int levels = kDefaultWaveletLevels);

// Power-iteration estimate of ||A^T A||_2 from a fixed-seed start vector. The
// Rayleigh quotient of the iterates is nondecreasing in `iters`.
double estimate_lipschitz(const LinearOperator& op, int iters = 50);

// Exact value when available, else the power-iteration estimate.
double lipschitz_constant(const LinearOperator& op, int iters = 50);

}  // namespace tlf
